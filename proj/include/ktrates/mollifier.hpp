// Copyright the ktrates authors
// SPDX-License-Identifier: MIT

#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "ktrates/errors.hpp"
#include "ktrates/piecewise_poly.hpp"
#include "ktrates/rational.hpp"

namespace ktrates {

// Plateau cutoff built from exact box-kernel convolutions of chi_[-3/2,3/2]:
// k0+1 dyadic boxes of widths 2^-2 .. 2^-(k0+2), then ell equal boxes of
// width 1/(2^(k0+2) ell). Equals 1 on [-1,1], vanishes outside [-2,2], lies
// strictly between elsewhere, and is C^(ell+k0).
struct Mollifier {
    int ell = 0;
    int k0 = 0;
    PiecewisePolynomial phi;
    // Certified brackets for sup |phi^(j)|, j = 0 .. ell+k0+1. The smoothness
    // class itself only needs orders up to ell+k0; the one extra
    // order (a piecewise constant) feeds the sharpest integration-by-parts
    // tail bound available to the coefficient machinery.
    std::vector<SupBracket> derivative_norms;

    int max_tail_order() const { return ell + k0 + 1; }
};

struct MollifierOptions {
    std::size_t max_pieces = 100000;
    double norm_rel_tol = 1e-6;
    bool certify_norms = true;
};

inline Mollifier build_mollifier(int ell, int k0, const MollifierOptions& opts = {}) {
    if (ell < 1) throw invalid_parameter_error("mollifier requires ell >= 1");
    if (k0 < 1) throw invalid_parameter_error("mollifier requires k0 >= 1");
    const std::size_t scale = std::size_t(1) << (k0 + 2);
    const std::size_t estimated = scale * (static_cast<std::size_t>(ell) + 1);
    if (estimated > opts.max_pieces)
        throw construction_too_large_error("mollifier piece budget exceeded", estimated);

    PiecewisePolynomial f = make_indicator(Rational(-3, 2), Rational(3, 2));
    for (int i = 2; i <= k0 + 2; ++i) f = convolve_box(f, Rational(Integer(1), Integer(1) << i));
    Integer small_den = Integer(static_cast<long>(ell)) * Integer(static_cast<long>(scale));
    const Rational small(Integer(1), small_den);
    for (int i = 0; i < ell; ++i) f = convolve_box(f, small);

    Mollifier m;
    m.ell = ell;
    m.k0 = k0;
    m.phi = std::move(f);
    if (opts.certify_norms) {
        // phi is even and stays so under differentiation up to sign, so the
        // sup over [-2,2] equals the sup over [0,2].
        PiecewisePolynomial d = m.phi;
        for (int j = 0; j <= m.max_tail_order(); ++j) {
            m.derivative_norms.push_back(sup_norm(d, Rational(0), Rational(2), opts.norm_rel_tol));
            if (j < m.max_tail_order()) d = differentiate(d);
        }
    }
    return m;
}

// Verification report for the five construction properties: (i) plateau,
// (ii) support, (iii) strict range on the transition, (iv) bounded low-order
// derivative norms, (v) growth of high-order norms against (2^(k0+2) ell)^j.
struct PropertyReport {
    bool plateau_exact = false;
    bool support_exact = false;
    bool range_samples_exact = false;
    bool range_interior_certified = false;
    SupBracket low_order_max;       // max over 1 <= j <= k0+1
    std::vector<double> growth_ratios; // j = k0+2 .. ell+k0
    double growth_ratio_max = 0.0;
    bool passed() const {
        return plateau_exact && support_exact && range_samples_exact && range_interior_certified;
    }
};

namespace detail {

// Coefficient-sign value range of p(u + (v-u) t), t in [0,1].
inline std::pair<Rational, Rational> interval_value_range(const Polynomial& p, const Rational& u,
                                                          const Rational& v) {
    Polynomial q = compose_affine(p, u, v - u);
    Rational lo = q.c.empty() ? Rational(0) : q.c[0];
    Rational hi = lo;
    for (std::size_t i = 1; i < q.c.size(); ++i) {
        if (q.c[i] > 0) hi += q.c[i];
        else lo += q.c[i];
    }
    return {std::move(lo), std::move(hi)};
}

// Certifies lo_bound < p < hi_bound on [u, v] by recursive range splitting.
inline bool certify_open_range(const Polynomial& p, const Rational& u, const Rational& v,
                               const Rational& lo_bound, const Rational& hi_bound, int depth = 48) {
    auto [lo, hi] = interval_value_range(p, u, v);
    if (lo > lo_bound && hi < hi_bound) return true;
    if (depth == 0) return false;
    const Rational mid = (u + v) / 2;
    // A witness outside the open range refutes immediately.
    for (const Rational& x : {u, mid, v}) {
        const Rational val = p(x);
        if (val <= lo_bound || val >= hi_bound) return false;
    }
    return certify_open_range(p, u, mid, lo_bound, hi_bound, depth - 1) &&
           certify_open_range(p, mid, v, lo_bound, hi_bound, depth - 1);
}

} // namespace detail

inline PropertyReport verify_properties(const Mollifier& m) {
    PropertyReport rep;
    const PiecewisePolynomial& phi = m.phi;

    rep.plateau_exact = equals_constant_on(phi, Rational(1), Rational(-1), Rational(1));
    rep.support_exact = !phi.is_zero() && phi.hull_lo() == -2 && phi.hull_hi() == 2 &&
                        evaluate(phi, Rational(-2)) == 0 && evaluate(phi, Rational(2)) == 0;

    // (iii) at rational samples, exactly; strict positivity at every real
    // point is then certified piecewise on the interior of the transition.
    rep.range_samples_exact = true;
    for (int i = 1; i <= 50; ++i) {
        const Rational t = Rational(1) + Rational(i, 51);
        for (const Rational& x : {t, Rational(-t)}) {
            const Rational v = evaluate(phi, x);
            if (!(v > 0 && v < 1)) rep.range_samples_exact = false;
        }
    }
    rep.range_interior_certified = true;
    for (std::size_t i = 0; i < phi.piece_count(); ++i) {
        const Rational& u = phi.breakpoints()[i];
        const Rational& v = phi.breakpoints()[i + 1];
        const bool in_right = u > 1 && v < 2;
        const bool in_left = u > -2 && v < -1;
        if (!in_right && !in_left) continue; // pieces touching the plateau or hull attain 0/1
        if (!detail::certify_open_range(phi.piece(i), u, v, Rational(0), Rational(1)))
            rep.range_interior_certified = false;
    }

    if (!m.derivative_norms.empty()) {
        rep.low_order_max = SupBracket{Rational(0), Rational(0)};
        for (int j = 1; j <= m.k0 + 1 && j < static_cast<int>(m.derivative_norms.size()); ++j) {
            const auto& b = m.derivative_norms[static_cast<std::size_t>(j)];
            rep.low_order_max.lower = std::max(rep.low_order_max.lower, b.lower);
            rep.low_order_max.upper = std::max(rep.low_order_max.upper, b.upper);
        }
        const double scale = std::ldexp(static_cast<double>(m.ell), m.k0 + 2);
        for (int j = m.k0 + 2; j <= m.ell + m.k0 && j < static_cast<int>(m.derivative_norms.size()); ++j) {
            const double num = m.derivative_norms[static_cast<std::size_t>(j)].upper_d();
            const double ratio = num / std::pow(scale, j - (m.k0 + 1));
            rep.growth_ratios.push_back(ratio);
            rep.growth_ratio_max = std::max(rep.growth_ratio_max, ratio);
        }
    }
    return rep;
}

// psi_ell = 1 - phi_ell, represented on the rational hull [-7/2, 7/2] which
// contains [-pi, pi]; +-pi themselves are irrational and cannot be
// breakpoints of this type. Every consumer evaluates inside [-pi, pi], where
// this representation agrees with 1 - phi exactly.
inline PiecewisePolynomial complement_on_pi(const Mollifier& m) {
    return make_indicator(Rational(-7, 2), Rational(7, 2)) - m.phi;
}

// 2pi-periodic sum of delta-scaled copies of phi centred at the given
// angles. Angles are a + b*pi with rational a, b, so placement at the
// irrational points the circle geometry needs (e.g. pi itself) stays exact.
struct PeriodicMollifier {
    Mollifier base;
    std::vector<PiAffine> angles; // within (-pi, pi], pairwise distinct
    Rational delta;
    // Exact single-chart representation on [-pi, pi]; present only when all
    // angles are rational and every support [theta_p - 2 delta, theta_p + 2 delta]
    // is interior to (-pi, pi).
    std::optional<PiecewisePolynomial> representation;

    // Numeric evaluation at any angle (2pi-periodic).
    long double operator()(long double theta) const {
        constexpr long double two_pi = 6.28318530717958647692528676655900577L;
        theta -= two_pi * std::floor((theta + two_pi / 2) / two_pi);
        const long double d = to_long_double(delta);
        long double sum = 0.0L;
        for (const auto& ang : angles) {
            const long double t0 = to_long_double(ang);
            for (int k = -1; k <= 1; ++k) {
                const long double u = (theta - t0 - two_pi * k) / d;
                if (u > -2.0L && u < 2.0L) sum += evaluate_ld(base.phi, u);
            }
        }
        return sum;
    }

    // Exact evaluation at a + b*pi. Defined wherever the value is forced by
    // the plateau/support structure or the local coordinate is rational;
    // otherwise the value is a polynomial in pi and an exactness error is
    // thrown.
    Rational evaluate_exact(PiAffine theta) const {
        const PiAffine pi_pos = PiAffine::pi();
        const PiAffine two_pi = PiAffine::pi(Rational(2));
        while (theta > pi_pos) theta = theta - two_pi;
        while (theta <= -pi_pos) theta = theta + two_pi;
        Rational sum(0);
        for (const auto& ang : angles) {
            for (int k = -1; k <= 1; ++k) {
                PiAffine w = theta - ang;
                w.b -= Rational(2 * k);
                const PiAffine u = w / delta;
                const PiAffine au = abs(u);
                if (sign(au - PiAffine(Rational(2))) >= 0) continue;
                if (sign(au - PiAffine(Rational(1))) <= 0) {
                    sum += 1;
                    continue;
                }
                if (u.b != 0)
                    throw inexact_evaluation_error(
                        "transition-region value at an irrational offset is not rational");
                sum += evaluate(base.phi, u.a);
            }
        }
        return sum;
    }
};

struct PeriodicOptions {
    MollifierOptions mollifier;
};

inline PeriodicMollifier build_periodic_multi(int ell, int k0, std::vector<PiAffine> angles,
                                              const Rational& delta,
                                              const PeriodicOptions& opts = {}) {
    if (angles.empty()) throw invalid_parameter_error("periodic mollifier needs at least one angle");
    if (!(delta > 0)) throw invalid_parameter_error("periodic mollifier requires delta > 0");
    const PiAffine pi_pos = PiAffine::pi();
    const PiAffine two_pi = PiAffine::pi(Rational(2));
    for (const auto& a : angles)
        if (a <= -pi_pos || a > pi_pos)
            throw invalid_parameter_error("angles must lie in (-pi, pi]");
    // Minimal circular gap between distinct angles; full circle for N = 1.
    PiAffine gap = two_pi;
    for (std::size_t i = 0; i < angles.size(); ++i)
        for (std::size_t j = i + 1; j < angles.size(); ++j) {
            const PiAffine d = abs(angles[i] - angles[j]);
            if (sign(d) == 0) throw invalid_parameter_error("angles must be pairwise distinct");
            const PiAffine wrapped = two_pi - d;
            const PiAffine circ = wrapped < d ? wrapped : d;
            if (circ < gap) gap = circ;
        }
    if (!(PiAffine(4 * delta) < gap))
        throw invalid_delta_error("support half-widths overlap: need 4*delta < minimal angle gap");

    PeriodicMollifier pm;
    pm.base = build_mollifier(ell, k0, opts.mollifier);
    pm.angles = std::move(angles);
    pm.delta = delta;

    bool representable = true;
    for (const auto& a : pm.angles) {
        if (a.b != 0) representable = false;
        else if (!(PiAffine(a.a - 2 * delta) > -pi_pos && PiAffine(a.a + 2 * delta) < pi_pos))
            representable = false;
    }
    if (representable) {
        PiecewisePolynomial rep;
        const PiecewisePolynomial bump = scale_argument(pm.base.phi, delta);
        for (const auto& a : pm.angles) rep = rep + translate(bump, a.a);
        pm.representation = std::move(rep);
    }
    return pm;
}

} // namespace ktrates

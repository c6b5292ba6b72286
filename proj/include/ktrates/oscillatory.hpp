// Copyright the ktrates authors
// SPDX-License-Identifier: MIT

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <vector>

#include "ktrates/errors.hpp"
#include "ktrates/mollifier.hpp"
#include "ktrates/piecewise_poly.hpp"
#include "ktrates/quadrature.hpp"
#include "ktrates/rational.hpp"

namespace ktrates {

namespace detail {

// Per-piece data for integrals against e^{in theta}: exact endpoint jets for
// the integration-by-parts expansion and exact centred moments for the
// power-series route. Everything rational is computed once; per-n evaluation
// runs in complex long double.
struct OscPiece {
    long double a, b, mid, half;
    std::vector<long double> jet_a, jet_b; // p^(j) at the endpoints
    std::vector<long double> moments;      // integral of p(t) (t-mid)^j over the piece
};

// Route threshold: |n| * halfwidth below this uses the moment series (the
// by-parts sum cancels catastrophically when the exponential barely rotates
// across the piece); above it the by-parts terms decay and the finite
// expansion is exact up to rounding.
inline constexpr long double osc_route_threshold = 8.0L;
inline constexpr int osc_moment_count = 64;

inline OscPiece make_osc_piece(const Polynomial& p, const Rational& a, const Rational& b) {
    OscPiece out;
    out.a = to_long_double(a);
    out.b = to_long_double(b);
    const Rational mid = (a + b) / 2;
    const Rational half = (b - a) / 2;
    out.mid = to_long_double(mid);
    out.half = to_long_double(half);

    // Jets p^(j)(a), p^(j)(b), exact.
    Polynomial d = p;
    const int deg = std::max(p.degree(), 0);
    for (int j = 0; j <= deg; ++j) {
        out.jet_a.push_back(to_long_double(d(a)));
        out.jet_b.push_back(to_long_double(d(b)));
        d = derivative(d);
    }

    // Centred moments: with q(t) = p(mid + t) on [-h, h],
    // M_j = sum_k q_k (h^(k+j+1) - (-h)^(k+j+1)) / (k+j+1), nonzero for k+j even.
    const Polynomial q = compose_affine(p, mid, Rational(1));
    std::vector<Rational> hpow(static_cast<std::size_t>(deg + osc_moment_count + 2), Rational(1));
    for (std::size_t i = 1; i < hpow.size(); ++i) hpow[i] = hpow[i - 1] * half;
    for (int j = 0; j <= osc_moment_count; ++j) {
        Rational m(0);
        for (std::size_t k = 0; k < q.c.size(); ++k) {
            const std::size_t e = k + static_cast<std::size_t>(j) + 1;
            if (e % 2 == 1) m += q.c[k] * 2 * hpow[e] / Rational(static_cast<long>(e));
        }
        out.moments.push_back(to_long_double(m));
    }
    return out;
}

inline std::complex<long double> cis(long double x) {
    return {std::cos(x), std::sin(x)};
}

inline std::complex<long double> osc_piece_integral(const OscPiece& pc, long long n) {
    using C = std::complex<long double>;
    if (n == 0) return C(pc.moments[0], 0.0L);
    const long double nf = static_cast<long double>(n);
    if (std::abs(nf) * pc.half <= osc_route_threshold) {
        // e^{in mid} * sum_j (in)^j / j! * M_j, truncated far past decay.
        C coeff(1.0L, 0.0L);
        const C in(0.0L, nf);
        C sum(0.0L, 0.0L);
        for (int j = 0; j <= osc_moment_count; ++j) {
            sum += coeff * pc.moments[static_cast<std::size_t>(j)];
            coeff *= in / static_cast<long double>(j + 1);
        }
        return cis(nf * pc.mid) * sum;
    }
    // Finite by-parts expansion: [e^{in t} sum_j (-1)^j p^(j)(t) / (in)^(j+1)]_a^b.
    const C inv_in = C(0.0L, -1.0L) / nf; // 1/(in)
    const auto endpoint = [&](const std::vector<long double>& jet) {
        C acc(0.0L, 0.0L);
        C w = inv_in;
        for (std::size_t j = 0; j < jet.size(); ++j) {
            acc += (j % 2 == 0 ? w : -w) * jet[j];
            w *= inv_in;
        }
        return acc;
    };
    return cis(nf * pc.b) * endpoint(pc.jet_b) - cis(nf * pc.a) * endpoint(pc.jet_a);
}

} // namespace detail

// Reusable table for many values of n against a fixed f.
class OscillatoryTable {
public:
    explicit OscillatoryTable(const PiecewisePolynomial& f) {
        for (std::size_t i = 0; i < f.piece_count(); ++i)
            pieces_.push_back(detail::make_osc_piece(f.piece(i), f.breakpoints()[i],
                                                     f.breakpoints()[i + 1]));
    }

    // integral of f(theta) e^{in theta} over the support of f.
    std::complex<long double> integral(long long n) const {
        std::complex<long double> sum(0.0L, 0.0L);
        for (const auto& pc : pieces_) sum += detail::osc_piece_integral(pc, n);
        return sum;
    }

private:
    std::vector<detail::OscPiece> pieces_;
};

// integral of f(theta) e^{in theta} d theta over [lo, hi].
inline std::complex<double> oscillatory_integral(const PiecewisePolynomial& f, long long n,
                                                 const Rational& lo, const Rational& hi) {
    if (!(lo < hi)) throw invalid_interval_error("oscillatory_integral requires lo < hi");
    const PiecewisePolynomial g = clip(f, lo, hi);
    if (g.is_zero()) return {0.0, 0.0};
    const auto v = OscillatoryTable(g).integral(n);
    return {static_cast<double>(v.real()), static_cast<double>(v.imag())};
}

inline std::complex<double> oscillatory_integral(const PiecewisePolynomial& f, long long n) {
    if (f.is_zero()) return {0.0, 0.0};
    const auto v = OscillatoryTable(f).integral(n);
    return {static_cast<double>(v.real()), static_cast<double>(v.imag())};
}

// Fourier coefficients z_n = (2 pi)^{-1} integral e^{in theta} phi(theta/eps),
// real and even in n; y_n = [n = 0] - z_n.
struct CoefficientSequence {
    Rational eps;
    int ell = 0;
    int k0 = 0;
    long long n_max = 0;
    bool is_y = false;
    std::vector<double> z; // z[|n|]
    double tail_bound = 0.0;
    int tail_order = 0;

    double z_at(long long n) const {
        const long long a = std::llabs(n);
        return a <= n_max ? z[static_cast<std::size_t>(a)] : 0.0;
    }
    double value(long long n) const {
        const double base = is_y ? (n == 0 ? 1.0 : 0.0) : 0.0;
        return is_y ? base - z_at(n) : z_at(n);
    }
    // sum over |n| <= n_max of |value(n)|.
    double l1_norm() const {
        double s = std::abs(value(0));
        for (long long n = 1; n <= n_max; ++n) s += 2.0 * std::abs(value(n));
        return s;
    }
    double eps_d() const { return to_double(eps); }
};

namespace detail {

// Certified tail bound: p-fold by parts gives |z_j| <= K_p / |j|^p with
// K_p = (2/pi) eps^(1-p) ||phi^(p)||, hence
// sum_{|j|>N} |z_j| <= 2 K_p N^(1-p) / (p-1). Minimised over the certified
// orders 2 <= p <= ell+k0+1.
inline std::pair<double, int> coefficient_tail_bound(const Mollifier& m, const Rational& eps,
                                                     long long n_max) {
    if (m.derivative_norms.empty())
        throw invalid_parameter_error("coefficient tail bound needs certified derivative norms");
    const double e = to_double(eps);
    const double N = static_cast<double>(n_max);
    double best = std::numeric_limits<double>::infinity();
    int best_p = 0;
    for (int p = 2; p <= m.max_tail_order() && p < static_cast<int>(m.derivative_norms.size()); ++p) {
        const double kp = (2.0 / std::numbers::pi) * std::pow(e, 1 - p) *
                          m.derivative_norms[static_cast<std::size_t>(p)].upper_d();
        const double tail = 2.0 * kp * std::pow(N, 1 - p) / (p - 1);
        if (tail < best) {
            best = tail;
            best_p = p;
        }
    }
    return {best, best_p};
}

inline void validate_eps(const Rational& eps) {
    if (!(eps > 0) || PiAffine(eps) > PiAffine::pi(Rational(1, 2)))
        throw invalid_parameter_error("eps must lie in (0, pi/2]");
}

} // namespace detail

inline CoefficientSequence z_coefficients(const Mollifier& m, const Rational& eps, long long n_max) {
    detail::validate_eps(eps);
    if (n_max < 1) throw invalid_parameter_error("n_max must be >= 1");
    CoefficientSequence seq;
    seq.eps = eps;
    seq.ell = m.ell;
    seq.k0 = m.k0;
    seq.n_max = n_max;

    const PiecewisePolynomial scaled = scale_argument(m.phi, eps);
    const OscillatoryTable table(scaled);
    constexpr long double two_pi = 6.28318530717958647692528676655900577L;
    seq.z.resize(static_cast<std::size_t>(n_max) + 1);
    for (long long n = 0; n <= n_max; ++n)
        seq.z[static_cast<std::size_t>(n)] = static_cast<double>(table.integral(n).real() / two_pi);

    const auto [tail, order] = detail::coefficient_tail_bound(m, eps, n_max);
    seq.tail_bound = tail;
    seq.tail_order = order;
    return seq;
}

inline CoefficientSequence y_coefficients(const Mollifier& m, const Rational& eps, long long n_max) {
    CoefficientSequence seq = z_coefficients(m, eps, n_max);
    seq.is_y = true;
    return seq;
}

// Measured constants for the two difference estimates the smoothing step
// rests on: |z_n - z_{n-1}| over eps^2 uniformly, and n^2 |z_n - z_{n-1}|.
struct DifferenceReport {
    double sup_d_over_eps_sq = 0.0;
    double sup_nsq_d = 0.0;
    double d0_two_way_gap = 0.0;
};

inline DifferenceReport difference_bounds(const Mollifier& m, const CoefficientSequence& seq) {
    DifferenceReport rep;
    const double e2 = seq.eps_d() * seq.eps_d();
    // d_n = z_n - z_{n-1} over the full stored range; by symmetry the
    // negative-n differences are sign flips of |z_k - z_{k+1}|.
    for (long long n = -seq.n_max + 1; n <= seq.n_max; ++n) {
        const double d = seq.z_at(n) - seq.z_at(n - 1);
        rep.sup_d_over_eps_sq = std::max(rep.sup_d_over_eps_sq, std::abs(d) / e2);
        if (n != 0)
            rep.sup_nsq_d = std::max(rep.sup_nsq_d, static_cast<double>(n) * static_cast<double>(n) * std::abs(d));
    }
    // d_0 recomputed through the quadrature engine as an independent route.
    const PiecewisePolynomial scaled = scale_argument(m.phi, seq.eps);
    const double lo = to_double(scaled.hull_lo());
    const double hi = to_double(scaled.hull_hi());
    std::vector<double> seeds;
    for (const auto& b : scaled.breakpoints()) seeds.push_back(to_double(b));
    QuadratureOptions qo;
    qo.rel_tol = 1e-13;
    qo.abs_tol = 1e-15;
    qo.seeds = std::move(seeds);
    const auto integrand = [&scaled](double t) {
        const std::complex<double> w = 1.0 - std::exp(std::complex<double>(0.0, -t));
        return w * static_cast<double>(evaluate_ld(scaled, t));
    };
    const auto q = integrate_adaptive_scalar(integrand, lo, hi, qo);
    const std::complex<double> direct = q.value(0, 0) / (2.0 * std::numbers::pi);
    const double stored = seq.z_at(0) - seq.z_at(-1);
    rep.d0_two_way_gap = std::abs(direct - std::complex<double>(stored, 0.0));
    return rep;
}

// Boundary function of an operator on the unit circle: value (and optional
// first two derivatives) of F(theta), plus the peripheral spectrum points the
// construction must avoid. Diagonal models store entrywise values as a d x 1
// column; dense models store full matrices.
struct BoundaryFunction {
    Eigen::Index rows = 1;
    Eigen::Index cols = 1;
    bool diagonal_entries = false;
    std::function<Eigen::MatrixXcd(double)> value;
    std::function<Eigen::MatrixXcd(double)> deriv1;
    std::function<Eigen::MatrixXcd(double)> deriv2;
};

struct BoundaryIntegralOptions {
    double rel_tol = 1e-9;
    std::size_t max_panels = 20000;
};

struct BoundaryIntegralResult {
    Eigen::MatrixXcd value;
    double error_estimate = 0.0;
    bool converged = false;
    std::size_t panels = 0;
};

// (2 pi)^{-1} integral over [-pi, pi] of e^{i (n+1) theta} F(theta)
// (1 - phi(theta/eps)). The integrand vanishes on [-eps, eps]; panels are
// seeded at the scaled mollifier breakpoints.
inline BoundaryIntegralResult boundary_integral(const BoundaryFunction& F, const Mollifier& m,
                                                const Rational& eps, long long n,
                                                const BoundaryIntegralOptions& opts = {}) {
    detail::validate_eps(eps);
    if (n < 0) throw invalid_parameter_error("boundary integral requires n >= 0");
    const PiecewisePolynomial scaled = scale_argument(m.phi, eps);
    const double e = to_double(eps);
    const double pi_d = std::numbers::pi;

    const auto psi = [&scaled](double t) -> double {
        return 1.0 - static_cast<double>(evaluate_ld(scaled, static_cast<long double>(t)));
    };
    const auto integrand = [&](double t) -> Eigen::MatrixXcd {
        const double w = psi(t);
        if (w == 0.0) return Eigen::MatrixXcd::Zero(F.rows, F.cols);
        const std::complex<double> phase =
            std::exp(std::complex<double>(0.0, static_cast<double>(n + 1) * t));
        return (phase * w) * F.value(t);
    };

    QuadratureOptions qo;
    qo.rel_tol = opts.rel_tol;
    qo.abs_tol = 1e-300; // pure relative control; exact zero handled below
    qo.max_panels = opts.max_panels;
    for (const auto& b : scaled.breakpoints()) {
        const double x = to_double(b);
        if (std::abs(x) > e && std::abs(x) < pi_d) {
            qo.seeds.push_back(x);
            qo.seeds.push_back(-x);
        }
    }
    // Give the oscillation a head start: initial panels no wider than half a
    // period (skipped for very large n, where the panel budget takes over).
    if (n + 1 <= 2000) {
        const double period = 2.0 * pi_d / std::max<double>(1.0, static_cast<double>(n + 1));
        for (double x = e; x < pi_d; x += 0.5 * period) {
            qo.seeds.push_back(x);
            qo.seeds.push_back(-x);
        }
    }

    const auto left = integrate_adaptive(integrand, -pi_d, -e, qo);
    const auto right = integrate_adaptive(integrand, e, pi_d, qo);
    BoundaryIntegralResult res;
    res.value = (left.value + right.value) / (2.0 * pi_d);
    res.error_estimate = (left.error_estimate + right.error_estimate) / (2.0 * pi_d);
    const double scale = res.value.norm();
    res.converged = res.error_estimate <= opts.rel_tol * std::max(scale, 1e-30) ||
                    (left.converged && right.converged);
    res.panels = left.panels + right.panels;
    return res;
}

} // namespace ktrates

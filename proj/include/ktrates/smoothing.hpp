// Copyright the ktrates authors
// SPDX-License-Identifier: MIT

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "ktrates/errors.hpp"
#include "ktrates/operators.hpp"
#include "ktrates/oscillatory.hpp"
#include "ktrates/rates.hpp"

namespace ktrates {

struct SmoothingOptions {
    double tail_fraction = 0.01;  // truncation error budget as a fraction of eps
    double tail_absolute = 0.0;   // optional tighter absolute budget (0 = unused)
    long long n_trunc_max = 200000;
    long long sup_scan_limit = 2000; // pre-scan range for sup ||x_n||
};

// Smoothed sequence x^{eps,ell}_n = sum_{|j| <= N} y_j x_{n-j} on a grid,
// with the truncation radius N certified against the coefficient tail bound.
struct SmoothingResult {
    Rational eps;
    int ell = 0;
    int k0 = 0;
    long long n_trunc = 0;
    double tail_bound = 0.0;             // sum_{|j| > N} |z_j| upper bound
    double sup_x = 0.0;                  // measured over every index touched
    double truncation_error_bound = 0.0; // tail_bound * sup_x
    bool diagonal_entries = true;
    std::vector<long long> grid;
    std::vector<Eigen::MatrixXcd> values;
    std::vector<double> norms;

    double eps_d() const { return to_double(eps); }
};

namespace detail {

// Smallest N with tail(N) <= target, solved per certified order p from
// 2 K_p N^{1-p} / (p-1) <= target and minimised across p.
inline long long solve_truncation_radius(const Mollifier& m, const Rational& eps, double target,
                                         long long n_trunc_max) {
    if (!(target > 0)) throw invalid_parameter_error("truncation target must be positive");
    const double e = to_double(eps);
    double best = std::numeric_limits<double>::infinity();
    for (int p = 2; p <= m.max_tail_order() && p < static_cast<int>(m.derivative_norms.size());
         ++p) {
        const double kp = (2.0 / std::numbers::pi) * std::pow(e, 1 - p) *
                          m.derivative_norms[static_cast<std::size_t>(p)].upper_d();
        const double need = std::pow(2.0 * kp / ((p - 1) * target), 1.0 / (p - 1));
        best = std::min(best, need);
    }
    const double capped = std::ceil(std::max(best, 8.0));
    if (!(capped <= static_cast<double>(n_trunc_max))) {
        const std::size_t required =
            capped < 1e18 ? static_cast<std::size_t>(capped) : static_cast<std::size_t>(-1);
        throw truncation_infeasible_error("truncation radius exceeds the configured cap",
                                          required);
    }
    return static_cast<long long>(capped);
}

} // namespace detail

inline SmoothingResult smooth_sequence(const SequenceSource& x, const Mollifier& m,
                                       const Rational& eps, std::vector<long long> n_grid,
                                       const SmoothingOptions& opts = {}) {
    detail::validate_eps(eps);
    if (n_grid.empty()) throw invalid_parameter_error("smoothing requires a nonempty grid");
    std::sort(n_grid.begin(), n_grid.end());
    if (n_grid.front() < 0) throw invalid_parameter_error("smoothing grid indices must be >= 0");

    const double eps_d = to_double(eps);
    double target = opts.tail_fraction * eps_d;
    if (opts.tail_absolute > 0) target = std::min(target, opts.tail_absolute);

    // Estimate sup ||x_n|| on a bounded prefix; power-bounded sources attain
    // it early. The post-pass recheck below catches underestimates.
    double sup_x = 0.0;
    const long long scan = std::min(opts.sup_scan_limit, n_grid.back());
    for (long long n = 0; n <= scan; ++n)
        sup_x = std::max(sup_x, model_norm(x.at(n), x.diagonal_entries));

    SmoothingResult res;
    res.eps = eps;
    res.ell = m.ell;
    res.k0 = m.k0;
    res.diagonal_entries = x.diagonal_entries;
    res.grid = n_grid;

    for (int attempt = 0;; ++attempt) {
        const double divisor = std::max(sup_x, 1e-300);
        const long long N =
            detail::solve_truncation_radius(m, eps, target / divisor, opts.n_trunc_max);
        const CoefficientSequence y = y_coefficients(m, eps, N);

        res.n_trunc = N;
        res.tail_bound = y.tail_bound;
        res.values.clear();
        res.norms.clear();

        double sup_seen = sup_x;
        for (long long n : n_grid) {
            Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(x.rows, x.cols);
            for (long long k = std::max<long long>(0, n - N); k <= n + N; ++k) {
                const Eigen::MatrixXcd xv = x.at(k);
                sup_seen = std::max(sup_seen, model_norm(xv, x.diagonal_entries));
                sum += y.value(n - k) * xv;
            }
            res.values.push_back(std::move(sum));
            res.norms.push_back(model_norm(res.values.back(), x.diagonal_entries));
        }
        res.sup_x = sup_seen;
        res.truncation_error_bound = res.tail_bound * sup_seen;
        if (res.truncation_error_bound <= target * (1 + 1e-9) || attempt >= 1) break;
        sup_x = sup_seen; // rare: the prefix scan missed the sup; re-solve once
    }
    return res;
}

struct DefectReport {
    double defect = 0.0;       // sup over the grid of ||x_n - x^{eps,ell}_n||
    double ratio_to_eps = 0.0; // defect / eps
};

inline DefectReport approximation_defect(const SequenceSource& x, const SmoothingResult& sm) {
    DefectReport r;
    for (std::size_t i = 0; i < sm.grid.size(); ++i) {
        const Eigen::MatrixXcd diff = x.at(sm.grid[i]) - sm.values[i];
        r.defect = std::max(r.defect, model_norm(diff, sm.diagonal_entries));
    }
    r.ratio_to_eps = r.defect / sm.eps_d();
    return r;
}

struct ParameterChoice {
    double eps = 0.0;
    long long k_ell = 1;
    bool clamped_lo = false;
    bool clamped_hi = false;
};

// eps = m_log^{-1}(c n), k_ell = floor(c n / m(eps)), floored at 1.
inline ParameterChoice choose_parameters(const RateFunction& m, long long n, double c) {
    if (!(c > 0) || !(c < 1)) throw invalid_parameter_error("c must lie in (0,1)");
    if (n < 1) throw invalid_parameter_error("choose_parameters requires n >= 1");
    const double cn = c * static_cast<double>(n);
    const InverseResult inv = m_log_inverse(m, cn);
    ParameterChoice p;
    p.eps = inv.eps;
    p.clamped_lo = inv.clamped_lo;
    p.clamped_hi = inv.clamped_hi;
    const double ratio = cn / m(inv.eps);
    p.k_ell = std::max<long long>(
        1, ratio < 9e18 ? static_cast<long long>(std::floor(ratio)) : 9000000000000000000LL);
    return p;
}

struct CrosscheckReport {
    std::vector<long long> ns;
    std::vector<double> discrepancies; // relative, per n
    double max_discrepancy = 0.0;
    long long n_trunc = 0;
};

// The proof's central identity, numerically: the smoothed sequence equals
// (2 pi)^{-1} integral e^{i(n+1)theta} F(theta) (1 - phi(theta/eps)) dtheta.
inline CrosscheckReport identity_crosscheck(const OperatorModel& T, const Mollifier& m,
                                            const Rational& eps,
                                            const std::vector<long long>& n_list,
                                            double tail_absolute = 1e-10) {
    SmoothingOptions opts;
    opts.tail_absolute = tail_absolute;
    opts.n_trunc_max = 400000;
    const SmoothingResult sm = smooth_sequence(make_kt_source(T), m, eps, n_list, opts);
    const BoundaryFunction F = kt_boundary_function(T);

    CrosscheckReport rep;
    rep.n_trunc = sm.n_trunc;
    rep.ns = sm.grid;
    for (std::size_t i = 0; i < sm.grid.size(); ++i) {
        const BoundaryIntegralResult b = boundary_integral(F, m, eps, sm.grid[i]);
        const double denom = std::max(model_norm(b.value, sm.diagonal_entries), 1e-30);
        const double disc =
            model_norm(sm.values[i] - b.value, sm.diagonal_entries) / denom;
        rep.discrepancies.push_back(disc);
        rep.max_discrepancy = std::max(rep.max_discrepancy, disc);
    }
    return rep;
}

} // namespace ktrates

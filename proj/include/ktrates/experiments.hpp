// Copyright the ktrates authors
// SPDX-License-Identifier: MIT

#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ktrates/operators.hpp"
#include "ktrates/rates.hpp"
#include "ktrates/smoothing.hpp"

namespace ktrates {

// Geometric default grid {ceil(10^{j/8})}, deduplicated, capped at n_max.
inline std::vector<long long> default_n_grid(long long n_max = 100000, long long n_min = 1) {
    if (n_min < 1 || n_max < n_min) throw invalid_parameter_error("bad n-grid range");
    std::vector<long long> g;
    for (int j = 0;; ++j) {
        const long long n = static_cast<long long>(std::ceil(std::pow(10.0, j / 8.0)));
        if (n > n_max) break;
        if (n < n_min) continue;
        if (g.empty() || g.back() != n) g.push_back(n);
    }
    if (g.empty() || g.back() != n_max) g.push_back(n_max);
    return g;
}

struct Verdict {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string comparison; // how value relates to threshold, e.g. "<="
};

struct DecayReport {
    std::string experiment;
    std::string operator_desc;
    DecaySequence sequence;
    std::string rate_desc;
    bool rate_fitted = false;
    double c = 0.9;

    double power_bound_constant = std::numeric_limits<double>::quiet_NaN();
    double ritt_constant = std::numeric_limits<double>::quiet_NaN();
    long long envelope_violations = 0;
    double fitted_exponent = std::numeric_limits<double>::quiet_NaN();
    long long exponent_window_lo = 0;
    long long exponent_window_hi = 0;
    double envelope_C = std::numeric_limits<double>::quiet_NaN();
    double sup_n_norm = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::pair<long long, double>> shape_values;   // (n, n^2 eps ||x^eps_n||)
    std::vector<std::pair<double, double>> rotated_bounds;    // (theta_p, bound)
    std::vector<Verdict> verdicts;

    bool passed() const {
        for (const auto& v : verdicts)
            if (!v.passed) return false;
        return true;
    }
};

struct ExperimentOptions {
    double c = 0.9;
    long long envelope_n_min = 10;
    std::vector<double> theta_validation;        // resolvent hypothesis grid
    std::vector<long long> shape_ns = {100, 316, 1000};
    int shape_ell = 2;
    int shape_k0 = 1;
    long long rotated_n_max = 2000;
};

namespace detail {

inline std::vector<double> default_theta_grid() {
    std::vector<double> g;
    for (double t = 0.01; t <= 2.0; t *= 1.25) g.push_back(t);
    return g;
}

// Exponent fit window [grid_min, min(grid_max, dimension)]: a K-dimensional
// model saturates into exponential decay past n ~ K, which would corrupt the
// power-law fit.
inline void fit_exponent(DecayReport& rep, const OperatorModel& T,
                         const std::vector<long long>& grid) {
    rep.exponent_window_lo = grid.front();
    rep.exponent_window_hi = std::min<long long>(grid.back(), T.dimension());
    try {
        rep.fitted_exponent =
            decay_exponent(rep.sequence, rep.exponent_window_lo, rep.exponent_window_hi);
    } catch (const insufficient_data_error&) {
        // degenerate sequences (all zeros) carry no exponent
    }
}

inline void add_verdict(DecayReport& rep, std::string name, bool passed, double value,
                        double threshold, std::string cmp) {
    rep.verdicts.push_back({std::move(name), passed, value, threshold, std::move(cmp)});
}

inline void trend_verdict(DecayReport& rep, const std::vector<long long>& grid,
                          const std::vector<double>& values) {
    double first_decade = 0.0, last_decade = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double scaled = static_cast<double>(grid[i]) * values[i];
        if (grid[i] <= grid.front() * 10) first_decade = std::max(first_decade, scaled);
        if (grid[i] * 10 >= grid.back()) last_decade = std::max(last_decade, scaled);
    }
    rep.sup_n_norm = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        rep.sup_n_norm = std::max(rep.sup_n_norm, static_cast<double>(grid[i]) * values[i]);
    add_verdict(rep, "no_upward_trend", last_decade <= 2.0 * first_decade + 1e-300,
                last_decade, 2.0 * first_decade, "<=");
}

} // namespace detail

// Quantified KT experiment: hypothesis check of the resolvent envelope,
// decay measurement, envelope constant against m_log^{-1}(c n).
inline DecayReport kt_experiment(const OperatorModel& T, std::optional<RateFunction> m,
                                 const std::vector<long long>& n_grid,
                                 const ExperimentOptions& opts = {}) {
    if (n_grid.empty()) throw invalid_parameter_error("kt_experiment requires a grid");
    DecayReport rep;
    rep.experiment = "kt";
    rep.operator_desc = T.description();
    rep.c = opts.c;

    rep.power_bound_constant = check_power_bounded(T, std::min<long long>(n_grid.back(), 100000));
    detail::add_verdict(rep, "power_bound_finite", std::isfinite(rep.power_bound_constant),
                        rep.power_bound_constant, 0.0, "finite");

    const std::vector<double> thetas =
        opts.theta_validation.empty() ? detail::default_theta_grid() : opts.theta_validation;
    const auto profile = resolvent_profile(T, thetas);
    if (!m) {
        m = fit_power_law(profile);
        rep.rate_fitted = true;
    }
    rep.rate_desc = m->describe();
    for (const auto& [t, r] : profile)
        if (t <= m->domain_hi() && r > (*m)(t) * (1 + 1e-9)) ++rep.envelope_violations;
    detail::add_verdict(rep, "resolvent_envelope_holds", rep.envelope_violations == 0,
                        static_cast<double>(rep.envelope_violations), 0.0, "==");

    rep.sequence = kt_sequence(T, n_grid);
    detail::fit_exponent(rep, T, n_grid);

    const RateFunction& rate = *m;
    const auto env = [&rate, &opts](long long n) {
        return m_log_inverse(rate, opts.c * static_cast<double>(n)).eps;
    };
    try {
        rep.envelope_C = envelope_constant(rep.sequence, env, opts.envelope_n_min);
    } catch (const insufficient_data_error&) {
        rep.envelope_C = std::numeric_limits<double>::quiet_NaN();
    }
    detail::add_verdict(rep, "envelope_constant_finite", std::isfinite(rep.envelope_C),
                        rep.envelope_C, 0.0, "finite");
    return rep;
}

// Ritt experiment: C_Ritt measurement, n * norm boundedness, and the
// predicted 1/(n^2 eps) shape of the smoothed sequence at eps = 1/n.
inline DecayReport ritt_experiment(const OperatorModel& T, const std::vector<long long>& n_grid,
                                   const ExperimentOptions& opts = {}) {
    if (n_grid.empty()) throw invalid_parameter_error("ritt_experiment requires a grid");
    DecayReport rep;
    rep.experiment = "ritt";
    rep.operator_desc = T.description();

    rep.ritt_constant = check_ritt(T, make_ritt_sample_grid());
    detail::add_verdict(rep, "ritt_constant_finite", std::isfinite(rep.ritt_constant),
                        rep.ritt_constant, 0.0, "finite");
    rep.power_bound_constant = check_power_bounded(T, std::min<long long>(n_grid.back(), 100000));

    rep.sequence = kt_sequence(T, n_grid);
    detail::fit_exponent(rep, T, n_grid);
    detail::trend_verdict(rep, n_grid, rep.sequence.values);

    if (!opts.shape_ns.empty()) {
        const Mollifier moll = build_mollifier(opts.shape_ell, opts.shape_k0);
        bool feasible = true;
        double worst = 0.0;
        for (long long n : opts.shape_ns) {
            try {
                SmoothingOptions so;
                so.n_trunc_max = 400000;
                const auto sm =
                    smooth_sequence(make_kt_source(T), moll, Rational(1, n), {n}, so);
                const double scaled = static_cast<double>(n) * sm.norms.front();
                rep.shape_values.emplace_back(n, scaled);
                worst = std::max(worst, scaled);
            } catch (const truncation_infeasible_error&) {
                feasible = false;
            }
        }
        detail::add_verdict(rep, "shape_probe_feasible", feasible,
                            static_cast<double>(rep.shape_values.size()),
                            static_cast<double>(opts.shape_ns.size()), "==");
        detail::add_verdict(rep, "shape_bounded", std::isfinite(worst), worst, 0.0, "finite");
    }
    return rep;
}

// E-Ritt experiment: product decay plus rotated partial-sum bounds per xi.
inline DecayReport e_ritt_experiment(const OperatorModel& T, const std::vector<Complex>& E,
                                     const std::vector<long long>& n_grid,
                                     const ExperimentOptions& opts = {}) {
    if (n_grid.empty()) throw invalid_parameter_error("e_ritt_experiment requires a grid");
    DecayReport rep;
    rep.experiment = "e_ritt";
    rep.operator_desc = T.description();

    rep.ritt_constant = check_e_ritt(T, E, make_ritt_sample_grid());
    detail::add_verdict(rep, "e_ritt_constant_finite", std::isfinite(rep.ritt_constant),
                        rep.ritt_constant, 0.0, "finite");
    rep.power_bound_constant = check_power_bounded(T, std::min<long long>(n_grid.back(), 100000));

    rep.sequence = e_kt_sequence(T, E, n_grid);
    detail::fit_exponent(rep, T, n_grid);
    detail::trend_verdict(rep, n_grid, rep.sequence.values);

    for (const auto& xi : E) {
        const double theta_p = std::arg(xi);
        const double half =
            rotated_partial_sums(make_e_kt_source(T, E), theta_p, opts.rotated_n_max / 2);
        const double full =
            rotated_partial_sums(make_e_kt_source(T, E), theta_p, opts.rotated_n_max);
        rep.rotated_bounds.emplace_back(theta_p, full);
        detail::add_verdict(rep, "partial_sums_saturated", full <= 1.5 * half + 1e-300, full,
                            1.5 * half, "<=");
    }
    return rep;
}

} // namespace ktrates

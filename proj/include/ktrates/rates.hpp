// Copyright the ktrates authors
// SPDX-License-Identifier: MIT

#pragma once

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "ktrates/errors.hpp"
#include "ktrates/operators.hpp"

namespace ktrates {

// Resolvent envelope m on a domain (0, d]: continuous, non-increasing,
// strictly positive. Tabulated profiles interpolate linearly between nodes
// and clamp to the first node below it.
class RateFunction {
public:
    enum class Kind { power_law, constant, tabulated };

    static RateFunction power_law(double C, double alpha, double domain_hi = std::numbers::pi) {
        if (!(C > 0) || !(alpha >= 0) || !(domain_hi > 0))
            throw invalid_parameter_error("power_law requires C > 0, alpha >= 0, domain > 0");
        RateFunction m;
        m.kind_ = Kind::power_law;
        m.c_ = C;
        m.alpha_ = alpha;
        m.domain_hi_ = domain_hi;
        return m;
    }

    static RateFunction constant(double M, double domain_hi = std::numbers::pi) {
        if (!(M > 0) || !(domain_hi > 0))
            throw invalid_parameter_error("constant rate requires M > 0, domain > 0");
        RateFunction m;
        m.kind_ = Kind::constant;
        m.c_ = M;
        m.domain_hi_ = domain_hi;
        return m;
    }

    static RateFunction tabulated(std::vector<std::pair<double, double>> nodes) {
        if (nodes.size() < 2)
            throw invalid_parameter_error("tabulated rate requires at least two nodes");
        std::sort(nodes.begin(), nodes.end());
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (!(nodes[i].first > 0) || !(nodes[i].second > 0))
                throw invalid_parameter_error("tabulated nodes must be positive");
            if (i > 0 && nodes[i].first == nodes[i - 1].first)
                throw invalid_parameter_error("tabulated nodes must have distinct abscissae");
            if (i > 0 && nodes[i].second > nodes[i - 1].second * (1 + 1e-12))
                throw invalid_parameter_error("tabulated rate must be non-increasing");
        }
        RateFunction m;
        m.kind_ = Kind::tabulated;
        m.table_ = std::move(nodes);
        m.domain_hi_ = m.table_.back().first;
        return m;
    }

    double operator()(double eps) const {
        if (!(eps > 0) || eps > domain_hi_ * (1 + 1e-12))
            throw invalid_parameter_error("rate function argument outside (0, d]");
        switch (kind_) {
        case Kind::constant:
            return c_;
        case Kind::power_law:
            return c_ * std::pow(eps, -alpha_);
        case Kind::tabulated: {
            if (eps <= table_.front().first) return table_.front().second;
            auto it = std::lower_bound(table_.begin(), table_.end(), eps,
                                       [](const auto& n, double x) { return n.first < x; });
            if (it == table_.end()) return table_.back().second;
            if (it->first == eps) return it->second;
            const auto& hi = *it;
            const auto& lo = *(it - 1);
            const double t = (eps - lo.first) / (hi.first - lo.first);
            return lo.second + t * (hi.second - lo.second);
        }
        }
        return c_;
    }

    Kind kind() const { return kind_; }
    double domain_hi() const { return domain_hi_; }
    double power_law_constant() const { return c_; }
    double power_law_exponent() const { return alpha_; }
    const std::vector<std::pair<double, double>>& table() const { return table_; }

    std::string describe() const {
        char buf[96];
        switch (kind_) {
        case Kind::constant:
            std::snprintf(buf, sizeof(buf), "constant(%g)", c_);
            return buf;
        case Kind::power_law:
            std::snprintf(buf, sizeof(buf), "power_law(%g,%g)", c_, alpha_);
            return buf;
        case Kind::tabulated:
            std::snprintf(buf, sizeof(buf), "tabulated(%zu nodes)", table_.size());
            return buf;
        }
        return "rate";
    }

private:
    Kind kind_ = Kind::constant;
    double c_ = 1.0;
    double alpha_ = 0.0;
    double domain_hi_ = std::numbers::pi;
    std::vector<std::pair<double, double>> table_;
};

inline double m_value(const RateFunction& m, double eps) { return m(eps); }

// m_k(eps) = m(eps) (m(eps)/eps)^{1/k}
inline double m_k_value(const RateFunction& m, int k, double eps) {
    if (k < 1) throw invalid_parameter_error("m_k requires k >= 1");
    const double v = m(eps);
    return v * std::pow(v / eps, 1.0 / static_cast<double>(k));
}

// m_log(eps) = m(eps) log(1 + m(eps)/eps)
inline double m_log_value(const RateFunction& m, double eps) {
    const double v = m(eps);
    return v * std::log1p(v / eps);
}

struct InverseResult {
    double eps = 0.0;
    bool clamped_lo = false; // y at least g at the smallest representable point
    bool clamped_hi = false; // y below g at the right endpoint
};

// Generalized inverse inf{eps in (0, d] : g(eps) <= y} for non-increasing g,
// by bisection in log(eps) to relative tolerance 1e-12. Out-of-range targets
// clamp to the respective endpoint and set a flag.
inline InverseResult inverse(const std::function<double(double)>& g, double domain_hi, double y) {
    if (!(y > 0)) throw invalid_parameter_error("inverse requires y > 0");
    if (!(domain_hi > 0)) throw invalid_parameter_error("inverse requires a positive domain");
    InverseResult r;
    if (g(domain_hi) > y) {
        r.eps = domain_hi;
        r.clamped_hi = true;
        return r;
    }
    double lo = DBL_MIN;
    if (g(lo) <= y) {
        r.eps = lo;
        r.clamped_lo = true;
        return r;
    }
    double hi = domain_hi; // invariant: g(hi) <= y < g(lo)
    while (hi - lo > 1e-12 * hi) {
        const double mid = std::sqrt(lo) * std::sqrt(hi);
        if (mid <= lo || mid >= hi) break;
        if (g(mid) <= y)
            hi = mid;
        else
            lo = mid;
    }
    r.eps = hi;
    return r;
}

inline InverseResult m_log_inverse(const RateFunction& m, double y) {
    return inverse([&m](double e) { return m_log_value(m, e); }, m.domain_hi(), y);
}

// Least C with data(n) <= C env(n) over grid points n >= n_min.
inline double envelope_constant(const DecaySequence& data,
                                const std::function<double(long long)>& env, long long n_min) {
    double best = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < data.grid.size(); ++i) {
        if (data.grid[i] < n_min) continue;
        const double e = env(data.grid[i]);
        if (!(e > 0)) throw invalid_parameter_error("envelope must be positive on the grid");
        best = std::max(best, data.values[i] / e);
        any = true;
    }
    if (!any) throw insufficient_data_error("no grid points at or above n_min");
    return best;
}

// Least-squares slope of log(value) against log(n) over [n_lo, n_hi];
// non-positive values are skipped, at least 5 points required.
inline double decay_exponent(const DecaySequence& data, long long n_lo, long long n_hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    long long count = 0;
    for (std::size_t i = 0; i < data.grid.size(); ++i) {
        const long long n = data.grid[i];
        if (n < n_lo || n > n_hi || !(data.values[i] > 0)) continue;
        const double lx = std::log(static_cast<double>(n));
        const double ly = std::log(data.values[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++count;
    }
    if (count < 5) throw insufficient_data_error("decay_exponent needs at least 5 positive points");
    const double d = static_cast<double>(count);
    return (d * sxy - sx * sy) / (d * sxx - sx * sx);
}

// Fit m(eps) = C eps^{-alpha} to profile samples (theta, value): slope by
// log-log least squares, C the least constant dominating every sample,
// inflated by a safety factor. The result is a pointwise upper envelope of
// the samples.
inline RateFunction fit_power_law(const std::vector<std::pair<double, double>>& profile,
                                  double safety = 1.1) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    long long count = 0;
    double dmax = 0.0;
    for (const auto& [t, v] : profile) {
        if (!(t > 0) || !(v > 0)) continue;
        const double lx = std::log(t), ly = std::log(v);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        dmax = std::max(dmax, t);
        ++count;
    }
    if (count < 5) throw insufficient_data_error("fit_power_law needs at least 5 positive samples");
    const double d = static_cast<double>(count);
    const double slope = (d * sxy - sx * sy) / (d * sxx - sx * sx);
    const double alpha = std::max(0.0, -slope);
    double c = 0.0;
    for (const auto& [t, v] : profile)
        if (t > 0 && v > 0) c = std::max(c, v * std::pow(t, alpha));
    return RateFunction::power_law(c * safety, alpha, std::min(dmax, std::numbers::pi));
}

} // namespace ktrates

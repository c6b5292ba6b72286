// Copyright the ktrates authors
// SPDX-License-Identifier: MIT

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <queue>
#include <vector>

namespace ktrates {

// Matrix-valued adaptive Gauss-Kronrod 7/15 quadrature. Panel error is the
// Frobenius norm of the Kronrod/Gauss difference; the worst panel is bisected
// until the summed estimate meets the tolerance or the panel budget runs out.
struct QuadratureResult {
    Eigen::MatrixXcd value;
    double error_estimate = 0.0;
    bool converged = false;
    std::size_t panels = 0;
};

namespace detail {

// 15-point Kronrod nodes with embedded 7-point Gauss rule (QUADPACK dqk15).
inline constexpr double gk15_nodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr double gk15_weights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double g7_weights[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b;
    Eigen::MatrixXcd value;
    double err;
};

template <typename F>
Panel evaluate_panel(const F& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    Eigen::MatrixXcd fc = f(mid);
    Eigen::MatrixXcd kronrod = gk15_weights[7] * fc;
    Eigen::MatrixXcd gauss = g7_weights[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double dx = half * gk15_nodes[i];
        Eigen::MatrixXcd lo = f(mid - dx);
        Eigen::MatrixXcd hi = f(mid + dx);
        kronrod += gk15_weights[i] * (lo + hi);
        if (i % 2 == 1) gauss += g7_weights[i / 2] * (lo + hi);
    }
    kronrod *= half;
    gauss *= half;
    return Panel{a, b, kronrod, (kronrod - gauss).norm()};
}

} // namespace detail

struct QuadratureOptions {
    double rel_tol = 1e-10;
    double abs_tol = 0.0;
    std::size_t max_panels = 20000;
    std::vector<double> seeds; // forced initial panel boundaries
};

template <typename F>
QuadratureResult integrate_adaptive(const F& f, double a, double b,
                                    const QuadratureOptions& opts = {}) {
    std::vector<double> cuts{a};
    for (double s : opts.seeds)
        if (s > a && s < b) cuts.push_back(s);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const auto cmp = [](const detail::Panel& x, const detail::Panel& y) { return x.err < y.err; };
    std::priority_queue<detail::Panel, std::vector<detail::Panel>, decltype(cmp)> heap(cmp);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        heap.push(detail::evaluate_panel(f, cuts[i], cuts[i + 1]));

    QuadratureResult res;
    Eigen::MatrixXcd total;
    double err = 0.0;
    {
        auto copy = heap;
        bool first = true;
        while (!copy.empty()) {
            if (first) {
                total = copy.top().value;
                first = false;
            } else {
                total += copy.top().value;
            }
            err += copy.top().err;
            copy.pop();
        }
    }

    while (true) {
        const double tol = std::max(opts.abs_tol, opts.rel_tol * total.norm());
        if (err <= tol || heap.size() >= opts.max_panels) {
            res.value = std::move(total);
            res.error_estimate = std::max(err, 0.0);
            res.converged = err <= tol;
            res.panels = heap.size();
            return res;
        }
        detail::Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        detail::Panel left = detail::evaluate_panel(f, worst.a, mid);
        detail::Panel right = detail::evaluate_panel(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        err += left.err + right.err - worst.err;
        heap.push(std::move(left));
        heap.push(std::move(right));
    }
}

// Scalar convenience wrapper.
template <typename F>
QuadratureResult integrate_adaptive_scalar(const F& f, double a, double b,
                                           const QuadratureOptions& opts = {}) {
    const auto wrapped = [&f](double x) {
        Eigen::MatrixXcd m(1, 1);
        m(0, 0) = std::complex<double>(f(x));
        return m;
    };
    return integrate_adaptive(wrapped, a, b, opts);
}

} // namespace ktrates

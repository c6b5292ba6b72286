// Copyright the ktrates authors
// SPDX-License-Identifier: MIT

#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include "ktrates/errors.hpp"
#include "ktrates/polynomial.hpp"
#include "ktrates/rational.hpp"

namespace ktrates {

// Compactly supported piecewise polynomial with exact rational breakpoints
// and coefficients. Value is 0 outside the support hull. Canonical form:
// strictly increasing breakpoints, adjacent pieces distinct as polynomials,
// no identically-zero piece at either end. The zero function has no
// breakpoints at all, so structural equality decides functional equality.
class PiecewisePolynomial {
public:
    PiecewisePolynomial() = default;

    PiecewisePolynomial(std::vector<Rational> breakpoints, std::vector<Polynomial> pieces)
        : breaks_(std::move(breakpoints)), pieces_(std::move(pieces)) {
        if (breaks_.size() != pieces_.size() + (pieces_.empty() ? 0 : 1))
            throw invalid_parameter_error("piece count must be breakpoint count minus one");
        for (std::size_t i = 1; i < breaks_.size(); ++i)
            if (!(breaks_[i - 1] < breaks_[i]))
                throw invalid_parameter_error("breakpoints must be strictly increasing");
        canonicalize();
    }

    bool is_zero() const { return pieces_.empty(); }
    std::size_t piece_count() const { return pieces_.size(); }
    const std::vector<Rational>& breakpoints() const { return breaks_; }
    const Polynomial& piece(std::size_t i) const { return pieces_[i]; }

    // Hull [lo, hi]; only meaningful when not zero.
    Rational hull_lo() const { return breaks_.front(); }
    Rational hull_hi() const { return breaks_.back(); }

    int degree_max() const {
        int d = -1;
        for (const auto& p : pieces_) d = std::max(d, p.degree());
        return d;
    }

    bool operator==(const PiecewisePolynomial& o) const {
        return breaks_ == o.breaks_ && pieces_ == o.pieces_;
    }

private:
    std::vector<Rational> breaks_;
    std::vector<Polynomial> pieces_;

    void canonicalize() {
        // Merge adjacent structurally equal pieces.
        if (pieces_.empty()) {
            breaks_.clear();
            return;
        }
        std::vector<Rational> nb{breaks_.front()};
        std::vector<Polynomial> np;
        for (std::size_t i = 0; i < pieces_.size(); ++i) {
            if (!np.empty() && np.back() == pieces_[i]) {
                nb.back() = breaks_[i + 1];
            } else {
                np.push_back(pieces_[i]);
                nb.push_back(breaks_[i + 1]);
            }
        }
        // Trim zero pieces at the ends.
        std::size_t lo = 0, hi = np.size();
        while (lo < hi && np[lo].is_zero()) ++lo;
        while (hi > lo && np[hi - 1].is_zero()) --hi;
        if (lo == hi) {
            breaks_.clear();
            pieces_.clear();
            return;
        }
        pieces_.assign(np.begin() + static_cast<std::ptrdiff_t>(lo),
                       np.begin() + static_cast<std::ptrdiff_t>(hi));
        breaks_.assign(nb.begin() + static_cast<std::ptrdiff_t>(lo),
                       nb.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
    }
};

inline PiecewisePolynomial make_indicator(const Rational& a, const Rational& b) {
    if (!(a < b)) throw invalid_interval_error("indicator requires a < b");
    return PiecewisePolynomial({a, b}, {Polynomial::constant(Rational(1))});
}

inline PiecewisePolynomial make_box_kernel(const Rational& a) {
    if (!(a > 0)) throw invalid_parameter_error("box kernel requires a > 0");
    return PiecewisePolynomial({-a, a}, {Polynomial::constant(Rational(1) / (2 * a))});
}

// Index of the piece whose half-open cell [b_i, b_{i+1}) contains theta;
// the last breakpoint maps to the last piece. Requires hull membership.
inline std::size_t locate_piece(const PiecewisePolynomial& f, const Rational& theta) {
    const auto& b = f.breakpoints();
    auto it = std::upper_bound(b.begin(), b.end(), theta);
    std::size_t idx = static_cast<std::size_t>(it - b.begin());
    if (idx == 0) throw invalid_parameter_error("point left of hull");
    if (idx == b.size()) {
        if (theta == b.back()) return f.piece_count() - 1;
        throw invalid_parameter_error("point right of hull");
    }
    return idx - 1;
}

// Right-limit value at breakpoints, except the last breakpoint where the
// left limit is used; 0 outside the hull.
inline Rational evaluate(const PiecewisePolynomial& f, const Rational& theta) {
    if (f.is_zero() || theta < f.hull_lo() || theta > f.hull_hi()) return Rational(0);
    return f.piece(locate_piece(f, theta))(theta);
}

inline long double evaluate_ld(const PiecewisePolynomial& f, long double theta) {
    if (f.is_zero()) return 0.0L;
    const auto& b = f.breakpoints();
    if (theta < to_long_double(b.front()) || theta > to_long_double(b.back())) return 0.0L;
    std::size_t lo = 0, hi = b.size() - 1;
    while (hi - lo > 1) {
        std::size_t mid = (lo + hi) / 2;
        if (to_long_double(b[mid]) <= theta) lo = mid;
        else hi = mid;
    }
    return f.piece(lo).eval_ld(theta);
}

inline Rational integral(const PiecewisePolynomial& f) {
    Rational total(0);
    for (std::size_t i = 0; i < f.piece_count(); ++i) {
        Polynomial P = antiderivative(f.piece(i));
        total += P(f.breakpoints()[i + 1]) - P(f.breakpoints()[i]);
    }
    return total;
}

inline PiecewisePolynomial differentiate(const PiecewisePolynomial& f) {
    if (f.is_zero()) return PiecewisePolynomial();
    std::vector<Polynomial> dp;
    dp.reserve(f.piece_count());
    for (std::size_t i = 0; i < f.piece_count(); ++i) dp.push_back(derivative(f.piece(i)));
    return PiecewisePolynomial(f.breakpoints(), std::move(dp));
}

// Cumulative antiderivative vanishing left of the hull, restricted to the
// hull. To the right of the hull the true antiderivative is the constant
// integral(f), which this type cannot carry; evaluate() at the last
// breakpoint still returns the full mass via the left-limit convention.
inline PiecewisePolynomial antiderivative(const PiecewisePolynomial& f) {
    if (f.is_zero()) return PiecewisePolynomial();
    std::vector<Polynomial> ap;
    ap.reserve(f.piece_count());
    Rational mass(0);
    for (std::size_t i = 0; i < f.piece_count(); ++i) {
        Polynomial P = antiderivative(f.piece(i));
        Polynomial shifted = P + Polynomial::constant(mass - P(f.breakpoints()[i]));
        mass += P(f.breakpoints()[i + 1]) - P(f.breakpoints()[i]);
        ap.push_back(std::move(shifted));
    }
    return PiecewisePolynomial(f.breakpoints(), std::move(ap));
}

// f * H_[-a,a], computed exactly as (Phi(theta+a) - Phi(theta-a)) / (2a)
// with Phi the cumulative antiderivative extended by 0 to the left of the
// hull and by the total mass to the right.
inline PiecewisePolynomial convolve_box(const PiecewisePolynomial& f, const Rational& a) {
    if (!(a > 0)) throw invalid_parameter_error("box convolution requires a > 0");
    if (f.is_zero()) return PiecewisePolynomial();

    const auto& b = f.breakpoints();
    std::vector<Polynomial> A; // cumulative antiderivative per piece
    A.reserve(f.piece_count());
    Rational mass(0);
    for (std::size_t i = 0; i < f.piece_count(); ++i) {
        Polynomial P = antiderivative(f.piece(i));
        A.push_back(P + Polynomial::constant(mass - P(b[i])));
        mass += P(b[i + 1]) - P(b[i]);
    }
    const Polynomial zero_poly;
    const Polynomial mass_poly = Polynomial::constant(mass);
    // Phi(theta + shift) as a polynomial valid when theta + shift stays in
    // one region; region picked from a sample point.
    const auto cumulative_at = [&](const Rational& point, const Rational& shift) -> Polynomial {
        if (point < b.front()) return zero_poly;
        if (point > b.back()) return mass_poly;
        return compose_affine(A[locate_piece(f, point)], shift, Rational(1));
    };

    std::vector<Rational> nb;
    nb.reserve(2 * b.size());
    for (const auto& x : b) nb.push_back(x - a);
    for (const auto& x : b) nb.push_back(x + a);
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());

    const Rational inv = Rational(1) / (2 * a);
    std::vector<Polynomial> np;
    np.reserve(nb.size() - 1);
    for (std::size_t i = 0; i + 1 < nb.size(); ++i) {
        const Rational mid = (nb[i] + nb[i + 1]) / 2;
        Polynomial right = cumulative_at(mid + a, a);
        Polynomial left = cumulative_at(mid - a, -a);
        np.push_back((right - left) * inv);
    }
    return PiecewisePolynomial(std::move(nb), std::move(np));
}

// g(theta) = f(theta / s); support hull scales by s. Mass scales by s.
inline PiecewisePolynomial scale_argument(const PiecewisePolynomial& f, const Rational& s) {
    if (!(s > 0)) throw invalid_parameter_error("argument scale requires s > 0");
    if (f.is_zero()) return PiecewisePolynomial();
    std::vector<Rational> nb;
    nb.reserve(f.breakpoints().size());
    for (const auto& x : f.breakpoints()) nb.push_back(x * s);
    std::vector<Polynomial> np;
    np.reserve(f.piece_count());
    for (std::size_t i = 0; i < f.piece_count(); ++i) np.push_back(stretch_argument(f.piece(i), s));
    return PiecewisePolynomial(std::move(nb), std::move(np));
}

// g(theta) = f(theta - c).
inline PiecewisePolynomial translate(const PiecewisePolynomial& f, const Rational& c) {
    if (f.is_zero()) return PiecewisePolynomial();
    std::vector<Rational> nb;
    nb.reserve(f.breakpoints().size());
    for (const auto& x : f.breakpoints()) nb.push_back(x + c);
    std::vector<Polynomial> np;
    np.reserve(f.piece_count());
    for (std::size_t i = 0; i < f.piece_count(); ++i)
        np.push_back(compose_affine(f.piece(i), -c, Rational(1)));
    return PiecewisePolynomial(std::move(nb), std::move(np));
}

namespace detail {

inline Polynomial piece_or_zero(const PiecewisePolynomial& f, const Rational& point) {
    if (f.is_zero() || point <= f.hull_lo() || point >= f.hull_hi()) return Polynomial();
    return f.piece(locate_piece(f, point));
}

template <typename Combine>
PiecewisePolynomial combine(const PiecewisePolynomial& f, const PiecewisePolynomial& g, Combine&& op) {
    std::vector<Rational> nb;
    if (!f.is_zero()) nb.insert(nb.end(), f.breakpoints().begin(), f.breakpoints().end());
    if (!g.is_zero()) nb.insert(nb.end(), g.breakpoints().begin(), g.breakpoints().end());
    if (nb.empty()) return PiecewisePolynomial();
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    std::vector<Polynomial> np;
    np.reserve(nb.size() - 1);
    for (std::size_t i = 0; i + 1 < nb.size(); ++i) {
        const Rational mid = (nb[i] + nb[i + 1]) / 2;
        np.push_back(op(piece_or_zero(f, mid), piece_or_zero(g, mid)));
    }
    return PiecewisePolynomial(std::move(nb), std::move(np));
}

} // namespace detail

inline PiecewisePolynomial operator+(const PiecewisePolynomial& f, const PiecewisePolynomial& g) {
    return detail::combine(f, g, [](const Polynomial& p, const Polynomial& q) { return p + q; });
}

inline PiecewisePolynomial operator-(const PiecewisePolynomial& f, const PiecewisePolynomial& g) {
    return detail::combine(f, g, [](const Polynomial& p, const Polynomial& q) { return p - q; });
}

inline PiecewisePolynomial operator*(const PiecewisePolynomial& f, const Rational& s) {
    if (f.is_zero() || s == 0) return PiecewisePolynomial();
    std::vector<Polynomial> np;
    np.reserve(f.piece_count());
    for (std::size_t i = 0; i < f.piece_count(); ++i) np.push_back(f.piece(i) * s);
    return PiecewisePolynomial(f.breakpoints(), std::move(np));
}

// f restricted to [lo, hi], extended by zero.
inline PiecewisePolynomial clip(const PiecewisePolynomial& f, const Rational& lo, const Rational& hi) {
    if (!(lo < hi)) throw invalid_interval_error("clip requires lo < hi");
    if (f.is_zero() || hi <= f.hull_lo() || lo >= f.hull_hi()) return PiecewisePolynomial();
    std::vector<Rational> nb{std::max(lo, f.hull_lo())};
    for (const auto& x : f.breakpoints())
        if (x > nb.front() && x < std::min(hi, f.hull_hi())) nb.push_back(x);
    nb.push_back(std::min(hi, f.hull_hi()));
    std::vector<Polynomial> np;
    np.reserve(nb.size() - 1);
    for (std::size_t i = 0; i + 1 < nb.size(); ++i)
        np.push_back(detail::piece_or_zero(f, (nb[i] + nb[i + 1]) / 2));
    return PiecewisePolynomial(std::move(nb), std::move(np));
}

inline bool is_even(const PiecewisePolynomial& f) {
    if (f.is_zero()) return true;
    std::vector<Rational> nb;
    std::vector<Polynomial> np;
    for (std::size_t i = f.breakpoints().size(); i-- > 0;) nb.push_back(-f.breakpoints()[i]);
    for (std::size_t i = f.piece_count(); i-- > 0;) np.push_back(reflect(f.piece(i)));
    return PiecewisePolynomial(std::move(nb), std::move(np)) == f;
}

// Exact check that f equals the constant v throughout [a, b].
inline bool equals_constant_on(const PiecewisePolynomial& f, const Rational& v,
                               const Rational& a, const Rational& b) {
    if (a > b) throw invalid_interval_error("equals_constant_on requires a <= b");
    if (evaluate(f, a) != v || evaluate(f, b) != v) return false;
    if (a == b) return true;
    const Polynomial cv = Polynomial::constant(v);
    if (f.is_zero()) return cv.is_zero();
    // Any zero-extension region of positive width inside [a, b] forces v = 0.
    if ((a < f.hull_lo() || b > f.hull_hi()) && v != 0) return false;
    for (std::size_t i = 0; i < f.piece_count(); ++i) {
        const Rational u = std::max(a, f.breakpoints()[i]);
        const Rational w = std::min(b, f.breakpoints()[i + 1]);
        if (u < w && !(f.piece(i) == cv)) return false;
    }
    return true;
}

// Largest m with f, f', ..., f^(m) continuous across every breakpoint,
// including the jump to the zero extension at the hull ends; -1 if f has a
// jump. The zero function reports INT_MAX.
inline int smoothness_class(const PiecewisePolynomial& f) {
    if (f.is_zero()) return std::numeric_limits<int>::max();
    int result = std::numeric_limits<int>::max();
    for (std::size_t i = 0; i < f.breakpoints().size(); ++i) {
        Polynomial left = (i == 0) ? Polynomial() : f.piece(i - 1);
        Polynomial right = (i == f.breakpoints().size() - 1) ? Polynomial() : f.piece(i);
        const Rational& x = f.breakpoints()[i];
        // Adjacent canonical pieces are distinct polynomials, so some jet
        // order at or below max degree must differ.
        const int max_order = std::max(left.degree(), right.degree());
        int match = -1;
        for (int j = 0; j <= max_order + 1; ++j) {
            if (left(x) != right(x)) break;
            match = j;
            left = derivative(left);
            right = derivative(right);
        }
        result = std::min(result, match);
    }
    return result;
}

// Certified bracket L <= sup <= U for sup |f| over an interval. Both ends
// are attained by exact rational arithmetic: U from coefficient-sum bounds
// on rescaled pieces, L from evaluation at witness points.
struct SupBracket {
    Rational lower;
    Rational upper;
    double lower_d() const { return to_double(lower); }
    double upper_d() const { return to_double(upper); }
};

namespace detail {

// Upper bound of |p| over [u, v] via coefficient signs of p(u + (v-u) t) on
// t in [0, 1]; exact for constants.
inline Rational interval_abs_bound(const Polynomial& p, const Rational& u, const Rational& v) {
    if (p.is_zero()) return Rational(0);
    Polynomial q = compose_affine(p, u, v - u);
    Rational lo = q.c.empty() ? Rational(0) : q.c[0];
    Rational hi = lo;
    for (std::size_t i = 1; i < q.c.size(); ++i) {
        if (q.c[i] > 0) hi += q.c[i];
        else lo += q.c[i];
    }
    if (lo < 0) lo = -lo;
    if (hi < 0) hi = -hi;
    return std::max(lo, hi);
}

inline Rational witness_abs(const Polynomial& p, const Rational& u, const Rational& v) {
    Rational w = abs(p(u));
    Rational m = abs(p((u + v) / 2));
    if (m > w) w = m;
    Rational e = abs(p(v));
    if (e > w) w = e;
    return w;
}

} // namespace detail

inline SupBracket sup_norm(const PiecewisePolynomial& f, const Rational& lo, const Rational& hi,
                           double rel_tol = 1e-6, std::size_t max_steps = 500000) {
    if (!(lo < hi)) throw invalid_interval_error("sup_norm requires lo < hi");
    struct Item {
        Rational ub;
        Rational u, v;
        Polynomial p;
    };
    const auto cmp = [](const Item& x, const Item& y) { return x.ub < y.ub; };
    std::priority_queue<Item, std::vector<Item>, decltype(cmp)> heap(cmp);
    Rational best_witness(0);

    const auto push_interval = [&](const Rational& u, const Rational& v, const Polynomial& p) {
        if (p.is_zero()) return;
        Rational ub = detail::interval_abs_bound(p, u, v);
        best_witness = std::max(best_witness, detail::witness_abs(p, u, v));
        if (ub > best_witness) heap.push(Item{std::move(ub), u, v, p});
    };

    for (std::size_t i = 0; i < f.piece_count(); ++i) {
        const Rational u = std::max(lo, f.breakpoints()[i]);
        const Rational v = std::min(hi, f.breakpoints()[i + 1]);
        if (u < v) push_interval(u, v, f.piece(i));
    }

    const Rational tol = rational_from_double(rel_tol);
    for (std::size_t step = 0; step < max_steps && !heap.empty(); ++step) {
        Item top = heap.top();
        if (top.ub <= best_witness + best_witness * tol) break;
        heap.pop();
        const Rational mid = (top.u + top.v) / 2;
        push_interval(top.u, mid, top.p);
        push_interval(mid, top.v, top.p);
    }
    Rational upper = heap.empty() ? best_witness : std::max(best_witness, heap.top().ub);
    return SupBracket{std::move(best_witness), std::move(upper)};
}

} // namespace ktrates

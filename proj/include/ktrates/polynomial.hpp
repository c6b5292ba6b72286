// Copyright the ktrates authors
// SPDX-License-Identifier: MIT

#pragma once

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

#include "ktrates/rational.hpp"

namespace ktrates {

// Dense polynomial with exact rational coefficients, ascending powers.
// Invariant: no trailing zero coefficient; the zero polynomial has an
// empty coefficient vector.
struct Polynomial {
    std::vector<Rational> c;

    Polynomial() = default;
    explicit Polynomial(std::vector<Rational> coeffs) : c(std::move(coeffs)) { trim(); }
    static Polynomial constant(Rational v) {
        Polynomial p;
        if (v != 0) p.c.push_back(std::move(v));
        return p;
    }

    void trim() {
        while (!c.empty() && c.back() == 0) c.pop_back();
    }
    bool is_zero() const { return c.empty(); }
    // Degree of the zero polynomial is reported as -1.
    int degree() const { return static_cast<int>(c.size()) - 1; }

    Rational operator()(const Rational& x) const {
        Rational acc(0);
        for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
        return acc;
    }
    long double eval_ld(long double x) const {
        long double acc = 0.0L;
        for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + to_long_double(c[i]);
        return acc;
    }

    bool operator==(const Polynomial& o) const { return c == o.c; }
};

inline Polynomial operator+(const Polynomial& p, const Polynomial& q) {
    std::vector<Rational> r(std::max(p.c.size(), q.c.size()), Rational(0));
    for (std::size_t i = 0; i < p.c.size(); ++i) r[i] += p.c[i];
    for (std::size_t i = 0; i < q.c.size(); ++i) r[i] += q.c[i];
    return Polynomial(std::move(r));
}

inline Polynomial operator-(const Polynomial& p, const Polynomial& q) {
    std::vector<Rational> r(std::max(p.c.size(), q.c.size()), Rational(0));
    for (std::size_t i = 0; i < p.c.size(); ++i) r[i] += p.c[i];
    for (std::size_t i = 0; i < q.c.size(); ++i) r[i] -= q.c[i];
    return Polynomial(std::move(r));
}

inline Polynomial operator*(const Polynomial& p, const Rational& s) {
    if (s == 0 || p.is_zero()) return Polynomial();
    std::vector<Rational> r = p.c;
    for (auto& v : r) v *= s;
    return Polynomial(std::move(r));
}

inline Polynomial operator*(const Polynomial& p, const Polynomial& q) {
    if (p.is_zero() || q.is_zero()) return Polynomial();
    std::vector<Rational> r(p.c.size() + q.c.size() - 1, Rational(0));
    for (std::size_t i = 0; i < p.c.size(); ++i)
        for (std::size_t j = 0; j < q.c.size(); ++j) r[i + j] += p.c[i] * q.c[j];
    return Polynomial(std::move(r));
}

inline Polynomial derivative(const Polynomial& p) {
    if (p.c.size() <= 1) return Polynomial();
    std::vector<Rational> r(p.c.size() - 1);
    for (std::size_t i = 1; i < p.c.size(); ++i) r[i - 1] = p.c[i] * Rational(static_cast<long>(i));
    return Polynomial(std::move(r));
}

// Antiderivative with constant term 0.
inline Polynomial antiderivative(const Polynomial& p) {
    if (p.is_zero()) return Polynomial();
    std::vector<Rational> r(p.c.size() + 1, Rational(0));
    for (std::size_t i = 0; i < p.c.size(); ++i) r[i + 1] = p.c[i] / Rational(static_cast<long>(i + 1));
    return Polynomial(std::move(r));
}

// p(alpha + beta*t) as a polynomial in t (Horner with a linear argument).
inline Polynomial compose_affine(const Polynomial& p, const Rational& alpha, const Rational& beta) {
    Polynomial lin(std::vector<Rational>{alpha, beta});
    Polynomial acc;
    for (std::size_t i = p.c.size(); i-- > 0;) acc = acc * lin + Polynomial::constant(p.c[i]);
    return acc;
}

// p(t/s) as a polynomial in t; only rescales coefficients.
inline Polynomial stretch_argument(const Polynomial& p, const Rational& s) {
    std::vector<Rational> r = p.c;
    Rational pw(1);
    for (std::size_t i = 1; i < r.size(); ++i) {
        pw /= s;
        r[i] *= pw;
    }
    return Polynomial(std::move(r));
}

// p(-t).
inline Polynomial reflect(const Polynomial& p) {
    std::vector<Rational> r = p.c;
    for (std::size_t i = 1; i < r.size(); i += 2) r[i] = -r[i];
    return Polynomial(std::move(r));
}

} // namespace ktrates

// Copyright the ktrates authors
// SPDX-License-Identifier: MIT

#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "ktrates/errors.hpp"

namespace ktrates {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Exact conversion to long double via an explicit 128-bit quotient; the
// backend's convert_to is not trusted across boost versions for huge
// numerator/denominator pairs.
inline long double to_long_double(const Rational& r) {
    if (r == 0) return 0.0L;
    Integer num = boost::multiprecision::numerator(r);
    Integer den = boost::multiprecision::denominator(r);
    const bool neg = num < 0;
    if (neg) num = -num;
    const long e = static_cast<long>(boost::multiprecision::msb(num)) -
                   static_cast<long>(boost::multiprecision::msb(den));
    const long s = 128 - e;
    Integer q;
    if (s >= 0) {
        q = (num << s) / den;
    } else {
        q = num / (den << (-s));
    }
    long double v = q.template convert_to<long double>();
    v = std::ldexp(v, static_cast<int>(-s));
    return neg ? -v : v;
}

inline double to_double(const Rational& r) {
    return static_cast<double>(to_long_double(r));
}

// Every finite double is a dyadic rational; the embedding is exact.
inline Rational rational_from_double(double x) {
    if (!std::isfinite(x)) throw invalid_parameter_error("non-finite value has no rational embedding");
    if (x == 0.0) return Rational(0);
    int e = 0;
    const double m = std::frexp(x, &e); // x = m * 2^e, |m| in [1/2, 1)
    const auto mant = static_cast<std::int64_t>(std::ldexp(m, 53));
    Rational r(mant);
    const int shift = e - 53;
    if (shift >= 0) {
        r *= Rational(Integer(1) << shift);
    } else {
        r /= Rational(Integer(1) << (-shift));
    }
    return r;
}

// Parses "p/q", plain integers, and decimal strings like "-0.125".
inline Rational parse_rational(const std::string& text) {
    const auto bad = [&]() -> Rational {
        throw invalid_parameter_error("cannot parse rational: '" + text + "'");
    };
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (s.empty()) return bad();
    const auto slash = s.find('/');
    try {
        if (slash != std::string::npos) {
            if (slash == 0 || slash + 1 >= s.size()) return bad();
            Integer num(s.substr(0, slash));
            Integer den(s.substr(slash + 1));
            if (den == 0) return bad();
            return Rational(num, den);
        }
        const auto dot = s.find('.');
        if (dot == std::string::npos) return Rational(Integer(s));
        std::string digits = s.substr(0, dot) + s.substr(dot + 1);
        const std::size_t frac_len = s.size() - dot - 1;
        bool neg = false;
        if (!digits.empty() && (digits[0] == '-' || digits[0] == '+')) {
            neg = digits[0] == '-';
            digits.erase(digits.begin());
        }
        // cpp_int treats a leading 0 as an octal prefix.
        while (digits.size() > 1 && digits[0] == '0') digits.erase(digits.begin());
        if (digits.empty()) return bad();
        Integer num(digits);
        if (neg) num = -num;
        Integer den = 1;
        for (std::size_t i = 0; i < frac_len; ++i) den *= 10;
        return Rational(num, den);
    } catch (const std::exception&) {
        return bad();
    }
}

// Canonical "p/q" form, denominator always present; lossless round-trip.
inline std::string to_fraction_string(const Rational& r) {
    return boost::multiprecision::numerator(r).str() + "/" +
           boost::multiprecision::denominator(r).str();
}

// Human-facing form: elides the denominator when it is 1.
inline std::string to_display_string(const Rational& r) {
    if (boost::multiprecision::denominator(r) == 1)
        return boost::multiprecision::numerator(r).str();
    return to_fraction_string(r);
}

// 50-digit rational brackets: pi_lower() < pi < pi_upper(). Tight enough to
// decide the sign of a + b*pi for any inputs this library meets; the
// undecided case would require |a/b + pi| < 1e-49.
inline const Rational& pi_lower() {
    static const Rational v = [] {
        Integer num("314159265358979323846264338327950288419716939937510");
        Integer den = boost::multiprecision::pow(Integer(10), 50);
        return Rational(num, den);
    }();
    return v;
}

inline const Rational& pi_upper() {
    static const Rational v = [] {
        Integer num("314159265358979323846264338327950288419716939937511");
        Integer den = boost::multiprecision::pow(Integer(10), 50);
        return Rational(num, den);
    }();
    return v;
}

// A number of the form a + b*pi with a, b rational. Closed under addition,
// subtraction and rational scaling; ordering is decidable because equality
// across the two components would need pi to be rational.
struct PiAffine {
    Rational a; // rational part
    Rational b; // coefficient of pi

    PiAffine() = default;
    explicit PiAffine(Rational a_, Rational b_ = Rational(0)) : a(std::move(a_)), b(std::move(b_)) {}
    static PiAffine pi(Rational coeff = Rational(1)) { return PiAffine(Rational(0), std::move(coeff)); }

    PiAffine operator+(const PiAffine& o) const { return PiAffine(a + o.a, b + o.b); }
    PiAffine operator-(const PiAffine& o) const { return PiAffine(a - o.a, b - o.b); }
    PiAffine operator-() const { return PiAffine(-a, -b); }
    PiAffine operator*(const Rational& s) const { return PiAffine(a * s, b * s); }
    PiAffine operator/(const Rational& s) const { return PiAffine(a / s, b / s); }
};

// Sign of a + b*pi: -1, 0, +1. Exact.
inline int sign(const PiAffine& x) {
    if (x.b == 0) return x.a == 0 ? 0 : (x.a < 0 ? -1 : 1);
    const Rational lo = x.a + x.b * (x.b > 0 ? pi_lower() : pi_upper());
    const Rational hi = x.a + x.b * (x.b > 0 ? pi_upper() : pi_lower());
    if (lo > 0) return 1;
    if (hi < 0) return -1;
    throw error("pi bracket too coarse to decide sign"); // |a + b*pi| < 1e-49 * |b|
}

inline bool operator<(const PiAffine& x, const PiAffine& y) { return sign(x - y) < 0; }
inline bool operator>(const PiAffine& x, const PiAffine& y) { return sign(x - y) > 0; }
inline bool operator<=(const PiAffine& x, const PiAffine& y) { return sign(x - y) <= 0; }
inline bool operator>=(const PiAffine& x, const PiAffine& y) { return sign(x - y) >= 0; }
inline bool operator==(const PiAffine& x, const PiAffine& y) { return x.a == y.a && x.b == y.b; }

inline PiAffine abs(const PiAffine& x) { return sign(x) < 0 ? -x : x; }

inline long double to_long_double(const PiAffine& x) {
    constexpr long double pi_ld = 3.14159265358979323846264338327950288L;
    return to_long_double(x.a) + to_long_double(x.b) * pi_ld;
}

inline double to_double(const PiAffine& x) { return static_cast<double>(to_long_double(x)); }

// Display form like "3/2", "pi", "-1/2*pi", "1/4 + 2*pi".
inline std::string to_display_string(const PiAffine& x) {
    if (x.b == 0) return to_display_string(x.a);
    std::string pi_part;
    if (x.b == 1) pi_part = "pi";
    else if (x.b == -1) pi_part = "-pi";
    else pi_part = to_display_string(x.b) + "*pi";
    if (x.a == 0) return pi_part;
    if (x.b < 0) return to_display_string(x.a) + " - " + (x.b == -1 ? std::string("pi") : to_display_string(-x.b) + "*pi");
    return to_display_string(x.a) + " + " + pi_part;
}

} // namespace ktrates

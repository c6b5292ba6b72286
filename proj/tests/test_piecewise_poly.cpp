// Copyright the ktrates authors
// SPDX-License-Identifier: MIT

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ktrates/piecewise_poly.hpp"

using namespace ktrates;

namespace {

Rational rat(long p, long q = 1) { return Rational(p, q); }

// Cumulative integral of f up to x, with the constant tail the hull-restricted
// antiderivative cannot carry. Used as an independent oracle for convolve_box.
Rational cumulative(const PiecewisePolynomial& f, const Rational& x) {
    if (f.is_zero() || x <= f.hull_lo()) return Rational(0);
    if (x >= f.hull_hi()) return integral(f);
    return evaluate(antiderivative(f), x);
}

// Random compactly supported function built from an indicator and up to five
// box convolutions; the generator the invariants are quantified over.
PiecewisePolynomial random_function(std::mt19937& rng, bool force_even, int max_convs = 5) {
    std::uniform_int_distribution<long> num(1, 8);
    std::uniform_int_distribution<long> den(1, 8);
    std::uniform_int_distribution<int> coin(0, 1);
    Rational a = rat(num(rng), den(rng));
    Rational b = rat(num(rng), den(rng));
    PiecewisePolynomial f = force_even ? make_indicator(-a, a)
                                       : make_indicator(std::min(a, b) - 1, std::max(a, b) + rat(1, 3));
    std::uniform_int_distribution<int> nc(0, max_convs);
    const int convs = nc(rng);
    for (int i = 0; i < convs; ++i) f = convolve_box(f, rat(num(rng), den(rng)));
    return f;
}

} // namespace

TEST_CASE("indicator and box kernel basics") {
    auto chi = make_indicator(rat(-3, 2), rat(3, 2));
    CHECK(evaluate(chi, rat(0)) == 1);
    CHECK(evaluate(chi, rat(3, 2)) == 1);
    CHECK(evaluate(chi, rat(2)) == 0);
    CHECK(integral(chi) == 3);

    auto unit = make_indicator(rat(0), rat(1));
    CHECK(evaluate(unit, rat(1, 2)) == 1);
    CHECK(evaluate(unit, rat(2)) == 0);

    auto box = make_box_kernel(rat(1, 4));
    CHECK(evaluate(box, rat(0)) == 2);
    CHECK(evaluate(box, rat(-1, 4)) == 2);
    CHECK(integral(box) == 1);
    CHECK(evaluate(make_box_kernel(rat(1, 8)), rat(0)) == 4);
    CHECK(integral(make_box_kernel(rat(7, 3))) == 1);

    CHECK_THROWS_AS(make_indicator(rat(1), rat(1)), invalid_interval_error);
    CHECK_THROWS_AS(make_indicator(rat(2), rat(1)), invalid_interval_error);
    CHECK_THROWS_AS(make_box_kernel(rat(0)), invalid_parameter_error);
    CHECK_THROWS_AS(make_box_kernel(rat(-1, 2)), invalid_parameter_error);
}

TEST_CASE("breakpoint value conventions") {
    PiecewisePolynomial f({rat(0), rat(1), rat(2)},
                          {Polynomial::constant(rat(1)), Polynomial::constant(rat(2))});
    CHECK(evaluate(f, rat(0)) == 1);  // right limit at the first breakpoint
    CHECK(evaluate(f, rat(1)) == 2);  // right limit at inner breakpoints
    CHECK(evaluate(f, rat(2)) == 2);  // left limit at the last breakpoint
    CHECK(evaluate(f, rat(3)) == 0);
    CHECK(evaluate(f, rat(-1)) == 0);
}

TEST_CASE("box convolution of an indicator gives the triangle") {
    auto tri = convolve_box(make_indicator(rat(-1), rat(1)), rat(1));
    CHECK(evaluate(tri, rat(0)) == 1);
    CHECK(evaluate(tri, rat(1)) == rat(1, 2));
    CHECK(evaluate(tri, rat(-1)) == rat(1, 2));
    CHECK(evaluate(tri, rat(5, 2)) == 0);
    CHECK(tri.hull_lo() == -2);
    CHECK(tri.hull_hi() == 2);
    CHECK(integral(tri) == 2);
    // Wide triangle is 1 - |x|/2, so the midpoint value is 3/4.
    CHECK(evaluate(tri, rat(1, 2)) == rat(3, 4));

    // The unit tent 1 - |x| hits 1/2 at 1/2 and differentiates to a +-1 step.
    auto tent = convolve_box(make_indicator(rat(-1, 2), rat(1, 2)), rat(1, 2));
    CHECK(evaluate(tent, rat(1, 2)) == rat(1, 2));
    CHECK(evaluate(tent, rat(0)) == 1);
    auto step = differentiate(tent);
    PiecewisePolynomial expected({rat(-1), rat(0), rat(1)},
                                 {Polynomial::constant(rat(1)), Polynomial::constant(rat(-1))});
    CHECK(step == expected);

    CHECK_THROWS_AS(convolve_box(tri, rat(0)), invalid_parameter_error);
}

TEST_CASE("convolution value against the cumulative-integral oracle") {
    auto chi = make_indicator(rat(-3, 2), rat(3, 2));
    auto w = convolve_box(chi, rat(1, 4));
    const Rational x = rat(3, 2);
    const Rational oracle =
        (cumulative(chi, x + rat(1, 4)) - cumulative(chi, x - rat(1, 4))) / rat(1, 2);
    CHECK(oracle == rat(1, 2));
    CHECK(evaluate(w, x) == oracle);

    std::mt19937 rng(2024);
    for (int rep = 0; rep < 20; ++rep) {
        auto f = random_function(rng, false, 3);
        const Rational a = rat(1 + rep % 5, 3);
        auto g = convolve_box(f, a);
        std::uniform_int_distribution<long> pt(-12, 12);
        const Rational x0 = rat(pt(rng), 4);
        const Rational expect = (cumulative(f, x0 + a) - cumulative(f, x0 - a)) / (2 * a);
        CHECK(evaluate(g, x0) == expect);
    }
}

TEST_CASE("derivative, antiderivative, integral plumbing") {
    auto box = make_box_kernel(rat(1));
    CHECK(evaluate(antiderivative(box), rat(1)) == 1);
    CHECK(evaluate(antiderivative(box), rat(0)) == rat(1, 2));
    CHECK(integral(make_indicator(rat(-3, 2), rat(3, 2))) == 3);

    std::mt19937 rng(7);
    for (int rep = 0; rep < 15; ++rep) {
        auto f = random_function(rng, false);
        CHECK(differentiate(antiderivative(f)) == f);
    }
}

TEST_CASE("integral preservation, support arithmetic, smoothing, evenness") {
    std::mt19937 rng(42);
    for (int rep = 0; rep < 25; ++rep) {
        const bool even = rep % 2 == 0;
        auto f = random_function(rng, even);
        std::uniform_int_distribution<long> num(1, 8), den(1, 8);
        const Rational a = rat(num(rng), den(rng));
        auto g = convolve_box(f, a);

        CHECK(integral(g) == integral(f));
        CHECK(g.hull_lo() == f.hull_lo() - a);
        CHECK(g.hull_hi() == f.hull_hi() + a);
        const int sf = smoothness_class(f);
        CHECK(smoothness_class(g) >= sf + 1);
        CHECK(g.degree_max() <= f.degree_max() + 1);
        if (even) {
            CHECK(is_even(f));
            CHECK(is_even(g));
        }
    }
}

TEST_CASE("sup_norm brackets") {
    auto tri = convolve_box(make_indicator(rat(-1), rat(1)), rat(1));
    auto b = sup_norm(tri, rat(-2), rat(2));
    CHECK(b.lower <= 1);
    CHECK(b.upper >= 1);
    CHECK(b.upper - b.lower <= rat(1, 100000));

    // Piecewise-constant case collapses to an exact value.
    auto box = make_box_kernel(rat(1, 4));
    auto eb = sup_norm(box, rat(-1), rat(1));
    CHECK(eb.lower == 2);
    CHECK(eb.upper == 2);

    CHECK_THROWS_AS(sup_norm(tri, rat(1), rat(1)), invalid_interval_error);
    CHECK_THROWS_AS(sup_norm(tri, rat(2), rat(-2)), invalid_interval_error);
}

TEST_CASE("sup_norm certification against dense sampling") {
    std::mt19937 rng(99);
    for (int rep = 0; rep < 6; ++rep) {
        auto f = random_function(rng, false);
        const Rational lo = f.hull_lo() - 1, hi = f.hull_hi() + 1;
        auto b = sup_norm(f, lo, hi);
        Rational sample_max(0);
        const Rational width = hi - lo;
        for (int i = 0; i <= 10000; ++i) {
            const Rational x = lo + width * rat(i, 10000);
            Rational v = evaluate(f, x);
            if (v < 0) v = -v;
            sample_max = std::max(sample_max, v);
        }
        CHECK(b.lower <= sample_max);
        CHECK(sample_max <= b.upper);
        // The bracket is tight, so sampling cannot be far below it.
        CHECK(to_double(sample_max) >= 0.99 * b.lower_d());
    }
}

TEST_CASE("smoothness classification") {
    CHECK(smoothness_class(make_indicator(rat(0), rat(1))) == -1);
    auto tri = convolve_box(make_indicator(rat(-1), rat(1)), rat(1));
    CHECK(smoothness_class(tri) == 0);
    CHECK(smoothness_class(convolve_box(tri, rat(1, 3))) == 1);
    CHECK(smoothness_class(PiecewisePolynomial()) == std::numeric_limits<int>::max());
}

TEST_CASE("argument scaling and translation") {
    auto tri = convolve_box(make_indicator(rat(-1), rat(1)), rat(1));
    const Rational s = rat(2, 5);
    auto g = scale_argument(tri, s);
    CHECK(g.hull_lo() == -2 * s);
    CHECK(g.hull_hi() == 2 * s);
    CHECK(evaluate(g, s) == evaluate(tri, rat(1)));
    CHECK(evaluate(g, rat(1, 5)) == evaluate(tri, rat(1, 2)));
    CHECK(integral(g) == s * integral(tri));
    CHECK_THROWS_AS(scale_argument(tri, rat(0)), invalid_parameter_error);

    auto t = translate(tri, rat(3, 7));
    CHECK(evaluate(t, rat(3, 7)) == 1);
    CHECK(t.hull_lo() == rat(3, 7) - 2);
    CHECK(integral(t) == integral(tri));
}

TEST_CASE("linear combinations and clipping") {
    auto tri = convolve_box(make_indicator(rat(-1), rat(1)), rat(1));
    auto box = make_box_kernel(rat(1, 2));
    auto sum = tri + box;
    CHECK(evaluate(sum, rat(0)) == 2);
    CHECK(evaluate(sum, rat(3, 2)) == evaluate(tri, rat(3, 2)));
    CHECK((tri - tri).is_zero());
    CHECK((tri * rat(3)).piece_count() == tri.piece_count());
    CHECK(evaluate(tri * rat(3), rat(1)) == rat(3, 2));
    CHECK((tri * rat(0)).is_zero());

    auto c = clip(tri, rat(0), rat(5));
    CHECK(evaluate(c, rat(1)) == rat(1, 2));
    CHECK(evaluate(c, rat(-1)) == 0);
    CHECK(c.hull_lo() == 0);
    CHECK(c.hull_hi() == 2);
    CHECK(clip(tri, rat(3), rat(4)).is_zero());
    CHECK_THROWS_AS(clip(tri, rat(1), rat(1)), invalid_interval_error);
}

TEST_CASE("exact constancy checks") {
    auto chi = make_indicator(rat(-3, 2), rat(3, 2));
    CHECK(equals_constant_on(chi, rat(1), rat(-1), rat(1)));
    CHECK(equals_constant_on(chi, rat(0), rat(2), rat(3)));
    CHECK(!equals_constant_on(chi, rat(1), rat(1), rat(2)));
    auto tri = convolve_box(make_indicator(rat(-1), rat(1)), rat(1));
    CHECK(!equals_constant_on(tri, rat(1), rat(-1), rat(1)));
}

TEST_CASE("rational utilities") {
    CHECK(parse_rational("3/4") == rat(3, 4));
    CHECK(parse_rational("-7/2") == rat(-7, 2));
    CHECK(parse_rational("5") == rat(5));
    CHECK(parse_rational("0.125") == rat(1, 8));
    CHECK(parse_rational("-2.5") == rat(-5, 2));
    CHECK_THROWS_AS(parse_rational("1/0"), invalid_parameter_error);
    CHECK_THROWS_AS(parse_rational("abc"), invalid_parameter_error);

    CHECK(to_fraction_string(rat(-3, 2)) == "-3/2");
    CHECK(to_fraction_string(rat(4)) == "4/1");
    CHECK(to_display_string(rat(4)) == "4");
    CHECK(rational_from_double(0.2) == parse_rational("3602879701896397/18014398509481984"));
    CHECK(rational_from_double(0.5) == rat(1, 2));
    CHECK(to_double(rat(1, 3)) == Catch::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(to_double(rational_from_double(0.1)) == 0.1);

    CHECK(sign(PiAffine(rat(-3), rat(1))) > 0);    // pi - 3 > 0
    CHECK(sign(PiAffine(rat(22, 7), rat(-1))) > 0); // 22/7 > pi
    CHECK(sign(PiAffine(rat(0), rat(0))) == 0);
    PiAffine pi_half = PiAffine::pi(rat(1, 2));
    CHECK(PiAffine(rat(3, 2)) < pi_half);
    CHECK(to_long_double(pi_half) == Catch::Approx(1.5707963267948966L));
}

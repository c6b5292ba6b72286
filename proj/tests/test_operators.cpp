// Copyright the ktrates authors
// SPDX-License-Identifier: MIT

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "ktrates/mollifier.hpp"
#include "ktrates/operators.hpp"

using namespace ktrates;

namespace {

const Complex I1(0.0, 1.0);

std::vector<long long> geometric_grid(long long lo, long long hi, int per_decade = 16) {
    std::vector<long long> g;
    const double step = std::pow(10.0, 1.0 / per_decade);
    for (double x = static_cast<double>(lo); x <= static_cast<double>(hi) * (1 + 1e-12);
         x *= step) {
        const long long n = static_cast<long long>(std::llround(x));
        if (g.empty() || g.back() != n) g.push_back(n);
    }
    return g;
}

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace

TEST_CASE("operator model construction and validation") {
    auto id = OperatorModel::diagonal(Eigen::VectorXcd::Ones(3));
    CHECK(id.is_diagonal());
    CHECK(id.dimension() == 3);

    Eigen::VectorXcd bad(2);
    bad << Complex(0.5, 0.0), Complex(1.0 + 1e-9, 0.0);
    CHECK_THROWS_AS(OperatorModel::diagonal(bad), invalid_model_error);

    Eigen::MatrixXcd nil(2, 2);
    nil << 0, 1, 0, 0;
    CHECK_NOTHROW(OperatorModel::dense(nil));

    Eigen::MatrixXcd grow = 1.5 * Eigen::MatrixXcd::Identity(2, 2);
    CHECK_THROWS_AS(OperatorModel::dense(grow), invalid_model_error);

    Eigen::MatrixXcd rect(2, 3);
    rect.setZero();
    CHECK_THROWS_AS(OperatorModel::dense(rect), invalid_model_error);
}

TEST_CASE("power norms") {
    auto id = OperatorModel::diagonal(Eigen::VectorXcd::Ones(3));
    CHECK(power_norm(id, 0) == 1.0);
    CHECK(power_norm(id, 7) == 1.0);
    CHECK(power_norm(id, 100000) == 1.0);

    Eigen::VectorXcd two(2);
    two << Complex(0.5, 0.0), Complex(0.9, 0.0);
    auto d = OperatorModel::diagonal(two);
    CHECK(power_norm(d, 2) == Catch::Approx(0.81).epsilon(1e-14));

    Eigen::MatrixXcd nil(2, 2);
    nil << 0, 1, 0, 0;
    auto N = OperatorModel::dense(nil);
    CHECK(power_norm(N, 0) == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(power_norm(N, 1) == Catch::Approx(1.0).epsilon(1e-10));
    CHECK(power_norm(N, 2) == 0.0);

    CHECK_THROWS_AS(power_norm(id, -1), invalid_parameter_error);
}

TEST_CASE("kt sequence against brute force") {
    auto id = OperatorModel::diagonal(Eigen::VectorXcd::Ones(2));
    auto s0 = kt_sequence(id, {0, 1, 5});
    for (double v : s0.values) CHECK(v == 0.0);

    auto z = OperatorModel::diagonal(Eigen::VectorXcd::Zero(1));
    auto sz = kt_sequence(z, {0, 1, 2});
    CHECK(sz.values[0] == 1.0);
    CHECK(sz.values[1] == 0.0);
    CHECK(sz.values[2] == 0.0);

    // Brute-force oracle over every eigenvalue of ritt_diag(2000) at n=1000.
    auto T = ritt_diag(2000);
    auto s = kt_sequence(T, {1000});
    long double best = 0.0L;
    for (long long k = 1; k <= 2000; ++k) {
        const long double lam = 1.0L - 1.0L / static_cast<long double>(k);
        const long double v = std::pow(lam, 1000.0L) / static_cast<long double>(k);
        if (v > best) best = v;
    }
    CHECK(s.values[0] == Catch::Approx(static_cast<double>(best)).epsilon(1e-12));
    CHECK(s.label == "kt");
    CHECK(s.product_set.size() == 1);

    CHECK_THROWS_AS(kt_sequence(T, {}), invalid_parameter_error);
}

TEST_CASE("e_kt sequence") {
    // E = {1} reduces to kt_sequence.
    auto T = ritt_diag(150);
    auto grid = geometric_grid(1, 1000, 8);
    auto a = kt_sequence(T, grid);
    auto b = e_kt_sequence(T, {Complex(1.0, 0.0)}, grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(a.values[i] == Catch::Approx(b.values[i]).margin(1e-15));

    // Two-point set at n=0 with a single eigenvalue 0.99i.
    Eigen::VectorXcd one(1);
    one << Complex(0.0, 0.99);
    auto s = e_kt_sequence(OperatorModel::diagonal(one),
                           {Complex(1.0, 0.0), Complex(-1.0, 0.0)}, {0});
    CHECK(s.values[0] == Catch::Approx(1.9801).epsilon(1e-12));

    // Brute force over eigenvalues approaching both 1 and -1.
    auto E2 = std::vector<Complex>{Complex(1.0, 0.0), Complex(-1.0, 0.0)};
    auto T2 = e_ritt_diag(E2, 400);
    auto s2 = e_kt_sequence(T2, E2, {250});
    double best = 0.0;
    for (Eigen::Index i = 0; i < T2.eigenvalues().size(); ++i) {
        const Complex lam = T2.eigenvalues()(i);
        const double v = std::pow(std::abs(lam), 250.0) * std::abs(1.0 - lam) *
                         std::abs(-1.0 - lam);
        best = std::max(best, v);
    }
    CHECK(s2.values[0] == Catch::Approx(best).epsilon(1e-12));

    CHECK_THROWS_AS(e_kt_sequence(T, {}, {1}), invalid_parameter_error);
    CHECK_THROWS_AS(e_kt_sequence(T, {Complex(0.5, 0.0)}, {1}), invalid_parameter_error);
}

TEST_CASE("resolvent norms and profile") {
    auto z = OperatorModel::diagonal(Eigen::VectorXcd::Zero(1));
    CHECK(resolvent_norm(z, Complex(2.0, 0.0)) == Catch::Approx(0.5).epsilon(1e-15));

    auto T = ritt_diag(2000);
    const Complex lam = std::polar(1.0, 0.3);
    double brute = 0.0;
    for (long long k = 1; k <= 2000; ++k)
        brute = std::max(brute, 1.0 / std::abs(lam - Complex(1.0 - 1.0 / k, 0.0)));
    CHECK(resolvent_norm(T, lam) == Catch::Approx(brute).epsilon(1e-13));

    CHECK_THROWS_AS(resolvent_norm(T, Complex(0.5, 0.0)), spectrum_hit_error);

    Eigen::MatrixXcd m1(1, 1);
    m1 << Complex(1.0, 0.0);
    CHECK_THROWS_AS(resolvent_norm(OperatorModel::dense(m1), Complex(1.0, 0.0)),
                    spectrum_hit_error);

    // Conjugation symmetry of the profile for a real eigenvalue set.
    auto prof = resolvent_profile(T, {0.4, -0.4, 1.3, -1.3});
    CHECK(prof[0].second == Catch::Approx(prof[1].second).epsilon(1e-14));
    CHECK(prof[2].second == Catch::Approx(prof[3].second).epsilon(1e-14));

    // alpha = 2 witness: log-log slope of the profile near 0+ is close to -2.
    auto A = kt_alpha_diag(2.0, 2000);
    std::vector<double> ts, rs;
    for (double t = 0.02; t <= 0.2 * (1 + 1e-9); t *= 1.15) {
        ts.push_back(t);
        rs.push_back(resolvent_norm(A, std::polar(1.0, t)));
    }
    const double slope = loglog_slope(ts, rs);
    CHECK(slope >= -2.2);
    CHECK(slope <= -1.8);
}

TEST_CASE("gallery construction") {
    auto r10 = ritt_diag(10);
    REQUIRE(r10.dimension() == 10);
    for (long long k = 1; k <= 10; ++k)
        CHECK(r10.eigenvalues()(k - 1) == Complex(1.0 - 1.0 / static_cast<double>(k), 0.0));

    // alpha=2 rejects k <= 3 where (pi/k)^2 > 1.
    auto a = kt_alpha_diag(2.0, 10);
    REQUIRE(a.dimension() == 7);
    const double t4 = std::numbers::pi / 4.0;
    CHECK(std::abs(a.eigenvalues()(0) - std::polar(1.0 - t4 * t4, t4)) < 1e-15);
    for (Eigen::Index i = 0; i < a.dimension(); ++i)
        CHECK(std::abs(a.eigenvalues()(i)) < 1.0);
    CHECK_THROWS_AS(kt_alpha_diag(0.5, 2), invalid_parameter_error);

    auto e = e_ritt_diag({Complex(1.0, 0.0), Complex(-1.0, 0.0)}, 5);
    REQUIRE(e.dimension() == 10);
    CHECK(e.eigenvalues()(0) == Complex(0.0, 0.0));
    CHECK(e.eigenvalues()(6) == Complex(-0.5, 0.0));
    CHECK_THROWS_AS(e_ritt_diag({Complex(0.5, 0.0)}, 5), invalid_parameter_error);

    CHECK_THROWS_AS(gallery("nope", {}), invalid_parameter_error);
    GalleryParams gp;
    gp.K = 12;
    CHECK(gallery("ritt_diag", gp).dimension() == 12);
    CHECK_FALSE(gallery("dense_embed", gp).is_diagonal());
    CHECK_THROWS_AS(dense_embed(gallery("dense_embed", gp)), invalid_parameter_error);
}

TEST_CASE("diagonal and dense embeddings agree") {
    auto diag = ritt_diag(30);
    auto dense = dense_embed(diag);
    REQUIRE_FALSE(dense.is_diagonal());

    for (long long n : {0LL, 1LL, 5LL, 64LL, 1000LL})
        CHECK(power_norm(dense, n) == Catch::Approx(power_norm(diag, n)).margin(1e-8));

    auto grid = geometric_grid(1, 300, 6);
    auto sd = kt_sequence(diag, grid);
    auto sm = kt_sequence(dense, grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(sm.values[i] == Catch::Approx(sd.values[i]).margin(1e-8));

    const std::vector<Complex> E = {Complex(1.0, 0.0), Complex(-1.0, 0.0)};
    auto ed = e_kt_sequence(diag, E, {0, 3, 50});
    auto em = e_kt_sequence(dense, E, {0, 3, 50});
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(em.values[i] == Catch::Approx(ed.values[i]).margin(1e-8));

    for (double t : {0.2, 1.0, 3.0})
        CHECK(resolvent_norm(dense, std::polar(1.0, t)) ==
              Catch::Approx(resolvent_norm(diag, std::polar(1.0, t))).margin(1e-8));

    auto samples = make_ritt_sample_grid(6, 12);
    CHECK(check_ritt(dense, samples) == Catch::Approx(check_ritt(diag, samples)).margin(1e-8));
    CHECK(check_power_bounded(dense, 200) ==
          Catch::Approx(check_power_bounded(diag, 200)).margin(1e-8));

    CHECK(rotated_partial_sums(make_kt_source(dense), 0.7, 120) ==
          Catch::Approx(rotated_partial_sums(make_kt_source(diag), 0.7, 120)).margin(1e-8));
}

TEST_CASE("telescoping and submultiplicativity") {
    // Diagonal: partial sums of lambda^k (1-lambda) telescope to 1 - lambda^{n+1}.
    auto diag = ritt_diag(50);
    auto src = make_kt_source(diag);
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(src.rows, src.cols);
    for (long long n = 0; n <= 80; ++n) {
        sum += src.at(n);
        for (Eigen::Index i = 0; i < diag.dimension(); ++i) {
            const Complex lam = diag.eigenvalues()(i);
            const Complex expect = 1.0 - detail::cpow_int(lam, n + 1);
            CHECK(std::abs(sum(i, 0) - expect) < 1e-12);
        }
    }

    auto dense = dense_embed(ritt_diag(8));
    auto dsrc = make_e_kt_source(dense, {Complex(1.0, 0.0)});
    Eigen::MatrixXcd msum = Eigen::MatrixXcd::Zero(dsrc.rows, dsrc.cols);
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(8, 8);
    for (long long n = 0; n <= 37; ++n) msum += dsrc.at(n);
    const Eigen::MatrixXcd expect = id - matrix_power(dense.matrix(), 38);
    CHECK((msum - expect).norm() < 1e-10);

    Eigen::MatrixXcd tri(2, 2);
    tri << Complex(0.9, 0.0), Complex(0.5, 0.0), Complex(0.0, 0.0), Complex(0.8, 0.0);
    auto Ttri = OperatorModel::dense(tri);
    for (auto [m, n] : std::vector<std::pair<long long, long long>>{{1, 1}, {3, 4}, {7, 9}})
        CHECK(power_norm(Ttri, m + n) <=
              power_norm(Ttri, m) * power_norm(Ttri, n) * (1.0 + 1e-9));
}

TEST_CASE("rotated partial sums") {
    SequenceSource zero;
    zero.rows = 2;
    zero.cols = 1;
    zero.diagonal_entries = true;
    zero.at = [](long long) { return Eigen::MatrixXcd::Zero(2, 1); };
    CHECK(rotated_partial_sums(zero, 1.3, 50) == 0.0);

    // theta = 0 telescopes: running max of max_k |1 - lambda_k^{n+1}|.
    auto diag = ritt_diag(50);
    auto src = make_kt_source(diag);
    const double got = rotated_partial_sums(src, 0.0, 200);
    double expect = 0.0;
    for (long long n = 0; n <= 200; ++n)
        for (Eigen::Index i = 0; i < diag.dimension(); ++i)
            expect = std::max(expect,
                              std::abs(1.0 - detail::cpow_int(diag.eigenvalues()(i), n + 1)));
    CHECK(got == Catch::Approx(expect).epsilon(1e-10));
    CHECK(got <= 1.0 + check_power_bounded(diag, 200) + 1e-12);

    // E = {1,-1} with theta_p = pi against direct summation.
    const std::vector<Complex> E = {Complex(1.0, 0.0), Complex(-1.0, 0.0)};
    auto T = e_ritt_diag(E, 40);
    const double got2 = rotated_partial_sums(make_e_kt_source(T, E), std::numbers::pi, 500);
    double expect2 = 0.0;
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(T.dimension());
    for (long long n = 0; n <= 500; ++n) {
        const Complex w = std::polar(1.0, -std::numbers::pi * static_cast<double>(n));
        for (Eigen::Index i = 0; i < T.dimension(); ++i) {
            const Complex lam = T.eigenvalues()(i);
            acc(i) += w * detail::cpow_int(lam, n) * (1.0 - lam) * (-1.0 - lam);
        }
        expect2 = std::max(expect2, acc.cwiseAbs().maxCoeff());
    }
    CHECK(got2 == Catch::Approx(expect2).epsilon(1e-10));
}

TEST_CASE("ritt and e-ritt checks") {
    auto id = OperatorModel::diagonal(Eigen::VectorXcd::Ones(3));
    auto samples = make_ritt_sample_grid();
    CHECK(check_ritt(id, samples) == Catch::Approx(1.0).epsilon(1e-12));

    auto T = ritt_diag(500);
    const double c = check_ritt(T, samples);
    CHECK(c >= 1.0);
    CHECK(c < 4.0);

    const std::vector<Complex> E = {Complex(1.0, 0.0), Complex(-1.0, 0.0)};
    auto TE = e_ritt_diag(E, 300);
    const double ce = check_e_ritt(TE, E, samples);
    CHECK(std::isfinite(ce));
    CHECK(ce < 8.0);
    CHECK(check_e_ritt(T, {Complex(1.0, 0.0)}, samples) == Catch::Approx(c).margin(1e-15));

    CHECK(check_power_bounded(T, 100000) == Catch::Approx(1.0).margin(1e-12));
    CHECK_THROWS_AS(check_ritt(T, {Complex(0.9, 0.0)}), invalid_parameter_error);
}

TEST_CASE("kt boundary function") {
    // Scalar case T = 0: F = e^{-i theta} with the matching derivatives.
    auto z = OperatorModel::diagonal(Eigen::VectorXcd::Zero(1));
    auto F0 = kt_boundary_function(z);
    for (double t : {0.3, 1.0, -2.2}) {
        const Complex e = std::polar(1.0, -t);
        CHECK(std::abs(F0.value(t)(0, 0) - e) < 1e-15);
        CHECK(std::abs(F0.deriv1(t)(0, 0) - (-I1 * e)) < 1e-15);
        CHECK(std::abs(F0.deriv2(t)(0, 0) - (-e)) < 1e-14);
    }

    // Spectrum touching the circle away from 1 is rejected.
    Eigen::VectorXcd offpoint(1);
    offpoint << std::polar(1.0, 0.7);
    CHECK_THROWS_AS(kt_boundary_function(OperatorModel::diagonal(offpoint)),
                    invalid_model_error);
    CHECK_NOTHROW(kt_boundary_function(OperatorModel::diagonal(Eigen::VectorXcd::Ones(1))));

    // Entrywise evaluation matches the dense matrix evaluator.
    auto diag = kt_alpha_diag(2.0, 30);
    auto dd = OperatorModel::dense(Eigen::MatrixXcd(diag.eigenvalues().asDiagonal()));
    auto Fd = kt_boundary_function(diag);
    auto Fm = kt_boundary_function(dd);
    for (double t : {0.5, 1.0, 2.4}) {
        const Eigen::MatrixXcd vd = Fd.value(t);
        const Eigen::MatrixXcd vm = Fm.value(t);
        for (Eigen::Index i = 0; i < diag.dimension(); ++i)
            CHECK(std::abs(vd(i, 0) - vm(i, i)) < 1e-12);
    }

    // Derivatives against central finite differences at theta = 1. The
    // second derivative is differenced from deriv1 (itself verified here);
    // second differences of values at this step are roundoff-limited.
    const double h = 1e-5;
    auto Fdense = kt_boundary_function(dense_embed(ritt_diag(12)));
    for (const auto* F : {&Fd, &Fdense}) {
        const Eigen::MatrixXcd d1 = F->deriv1(1.0);
        const Eigen::MatrixXcd fd1 = (F->value(1.0 + h) - F->value(1.0 - h)) / (2.0 * h);
        CHECK((d1 - fd1).norm() < 1e-6 * d1.norm());
        const Eigen::MatrixXcd d2 = F->deriv2(1.0);
        const Eigen::MatrixXcd fd2 = (F->deriv1(1.0 + h) - F->deriv1(1.0 - h)) / (2.0 * h);
        CHECK((d2 - fd2).norm() < 1e-6 * d2.norm());
    }
}

TEST_CASE("resolvent identity through the boundary function") {
    auto dense = dense_embed(ritt_diag(9));
    auto F = kt_boundary_function(dense);
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(9, 9);
    const double t1 = 0.9, t2 = 2.1;
    const Complex l1 = std::polar(1.0, t1), l2 = std::polar(1.0, t2);
    const Eigen::MatrixXcd R1 = (F.value(t1) - id) / (1.0 - l1);
    const Eigen::MatrixXcd R2 = (F.value(t2) - id) / (1.0 - l2);
    CHECK(((l1 * id - dense.matrix()) * R1 - id).norm() < 1e-10);
    CHECK((R1 - R2 - (l2 - l1) * R1 * R2).norm() < 1e-10);
}

TEST_CASE("boundary integral of the zero-operator function recovers y") {
    auto m = build_mollifier(2, 2);
    auto F = kt_boundary_function(OperatorModel::diagonal(Eigen::VectorXcd::Zero(1)));
    const Rational eps(1, 2);
    auto y = y_coefficients(m, eps, 8);
    for (long long n : {0LL, 3LL, 8LL}) {
        auto r = boundary_integral(F, m, eps, n);
        REQUIRE(r.converged);
        CHECK(std::abs(r.value(0, 0) - Complex(y.value(n), 0.0)) < 1e-9);
    }
}

TEST_CASE("decay onset for ritt_diag stays bounded") {
    auto T = ritt_diag(200000);
    auto grid = geometric_grid(100, 100000, 16);
    auto s = kt_sequence(T, grid);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double scaled = static_cast<double>(grid[i]) * s.values[i];
        lo = std::min(lo, scaled);
        hi = std::max(hi, scaled);
    }
    CHECK(hi / lo < 20.0);
}

TEST_CASE("thread cap does not change results") {
    auto T = gallery("kt_alpha_diag", []{ GalleryParams p; p.alpha = 2.0; p.K = 300; return p; }());
    auto grid = geometric_grid(1, 3000, 8);
    set_max_threads(1);
    auto base = kt_sequence(T, grid);
    auto base_e = e_kt_sequence(T, {Complex(1.0, 0.0), Complex(-1.0, 0.0)}, grid);
    auto base_r = resolvent_profile(T, {0.3, 0.7, 1.9});
    set_max_threads(4);
    auto par = kt_sequence(T, grid);
    auto par_e = e_kt_sequence(T, {Complex(1.0, 0.0), Complex(-1.0, 0.0)}, grid);
    auto par_r = resolvent_profile(T, {0.3, 0.7, 1.9});
    set_max_threads(1);
    // Slot writes only: every cap must produce bitwise identical output.
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(base.values[i] == par.values[i]);
        CHECK(base_e.values[i] == par_e.values[i]);
    }
    for (std::size_t i = 0; i < base_r.size(); ++i)
        CHECK(base_r[i].second == par_r[i].second);
}

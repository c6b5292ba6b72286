// Copyright the ktrates authors
// SPDX-License-Identifier: MIT

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "ktrates/errors.hpp"
#include "ktrates/oscillatory.hpp"
#include "ktrates/parallel.hpp"

namespace ktrates {

using Complex = std::complex<double>;

namespace detail {

// Integer power by binary exponentiation; unlike std::pow it maps 0^0 to 1
// and never routes through log(0).
inline Complex cpow_int(Complex base, long long n) {
    Complex acc(1.0, 0.0);
    while (n > 0) {
        if (n & 1) acc *= base;
        n >>= 1;
        if (n > 0) base *= base;
    }
    return acc;
}

inline Eigen::VectorXcd seeded_unit_vector(Eigen::Index d, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXcd v(d);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = Complex(g(rng), g(rng));
    const double n = v.norm();
    return n > 0 ? Eigen::VectorXcd(v / n) : Eigen::VectorXcd::Unit(d, 0);
}

} // namespace detail

// Largest singular value by power iteration on A*A with a fixed seed;
// deterministic and accurate to rel_tol.
inline double spectral_norm(const Eigen::MatrixXcd& A, double rel_tol = 1e-10,
                            int max_iter = 10000) {
    if (A.rows() == 0 || A.cols() == 0) return 0.0;
    if (A.rows() == 1 && A.cols() == 1) return std::abs(A(0, 0));
    if (A.cols() == 1) return A.norm();
    if (A.rows() == 1) return A.norm();
    Eigen::VectorXcd v = detail::seeded_unit_vector(A.cols(), 987654321u);
    double sigma = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        Eigen::VectorXcd w = A.adjoint() * (A * v);
        const double wn = w.norm();
        if (wn == 0.0) return 0.0;
        const double next = std::sqrt(wn); // ||A* A v|| -> sigma^2 at the fixed point
        v = w / wn;
        if (it > 0 && std::abs(next - sigma) <= rel_tol * next) return next;
        sigma = next;
    }
    return sigma;
}

// Norm of a model-shaped value: diagonal models carry entrywise columns
// (operator norm = max modulus), dense models carry full matrices.
inline double model_norm(const Eigen::MatrixXcd& v, bool diagonal_entries) {
    if (v.size() == 0) return 0.0;
    if (diagonal_entries) return v.cwiseAbs().maxCoeff();
    return spectral_norm(v);
}

inline Eigen::MatrixXcd matrix_power(Eigen::MatrixXcd base, long long n) {
    const Eigen::Index d = base.rows();
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Identity(d, d);
    while (n > 0) {
        if (n & 1) acc = acc * base;
        n >>= 1;
        if (n > 0) base = base * base;
    }
    return acc;
}

// Finite-dimensional stand-in for a power-bounded operator: either an
// explicit eigenvalue list (normal case) or a dense matrix.
class OperatorModel {
public:
    static OperatorModel diagonal(Eigen::VectorXcd eigenvalues, std::string description = "diagonal") {
        for (Eigen::Index i = 0; i < eigenvalues.size(); ++i)
            if (std::abs(eigenvalues(i)) > 1.0 + 1e-12)
                throw invalid_model_error("diagonal eigenvalue outside the closed unit disc");
        OperatorModel m;
        m.eig_ = std::move(eigenvalues);
        m.desc_ = std::move(description);
        return m;
    }

    static OperatorModel dense(Eigen::MatrixXcd matrix, std::string description = "dense") {
        if (matrix.rows() != matrix.cols())
            throw invalid_model_error("dense model requires a square matrix");
        if (matrix.rows() == 0) throw invalid_model_error("dense model requires dimension >= 1");
        // Spectral radius estimate: geometric mean of late power-iteration
        // growth; underestimates the radius, so power-bounded inputs pass.
        Eigen::VectorXcd v = detail::seeded_unit_vector(matrix.rows(), 424242u);
        double log_growth = 0.0;
        int counted = 0;
        for (int it = 0; it < 256; ++it) {
            Eigen::VectorXcd w = matrix * v;
            const double n = w.norm();
            if (n == 0.0) {
                counted = 0;
                break;
            }
            if (it >= 64) {
                log_growth += std::log(n);
                ++counted;
            }
            v = w / n;
        }
        const double rho_est = counted > 0 ? std::exp(log_growth / counted) : 0.0;
        if (rho_est > 1.0 + 1e-10)
            throw invalid_model_error("dense model spectral radius estimate exceeds 1");
        OperatorModel m;
        m.mat_ = std::move(matrix);
        m.desc_ = std::move(description);
        return m;
    }

    bool is_diagonal() const { return mat_.size() == 0; }
    Eigen::Index dimension() const { return is_diagonal() ? eig_.size() : mat_.rows(); }
    const Eigen::VectorXcd& eigenvalues() const { return eig_; }
    const Eigen::MatrixXcd& matrix() const { return mat_; }
    const std::string& description() const { return desc_; }

private:
    Eigen::VectorXcd eig_;
    Eigen::MatrixXcd mat_;
    std::string desc_;
};

inline double power_norm(const OperatorModel& T, long long n) {
    if (n < 0) throw invalid_parameter_error("power_norm requires n >= 0");
    if (T.is_diagonal()) {
        double best = 0.0;
        for (Eigen::Index i = 0; i < T.eigenvalues().size(); ++i)
            best = std::max(best, std::pow(std::abs(T.eigenvalues()(i)), static_cast<double>(n)));
        return best;
    }
    return spectral_norm(matrix_power(T.matrix(), n));
}

// Norm sequence data on an n-grid.
struct DecaySequence {
    std::string label;
    std::string operator_desc;
    std::vector<long long> grid;
    std::vector<double> values;
    std::vector<Complex> product_set; // E for e_kt sequences; {1} for kt
};

inline DecaySequence kt_sequence(const OperatorModel& T, const std::vector<long long>& n_grid) {
    if (n_grid.empty()) throw invalid_parameter_error("kt_sequence requires a nonempty grid");
    DecaySequence s;
    s.label = "kt";
    s.operator_desc = T.description();
    s.grid = n_grid;
    s.product_set = {Complex(1.0, 0.0)};
    s.values.assign(n_grid.size(), 0.0);
    if (T.is_diagonal()) {
        const auto& eig = T.eigenvalues();
        parallel_for(n_grid.size(), [&](std::size_t gi) {
            const double n = static_cast<double>(n_grid[gi]);
            double best = 0.0;
            for (Eigen::Index i = 0; i < eig.size(); ++i) {
                const double r = std::pow(std::abs(eig(i)), n) * std::abs(1.0 - eig(i));
                best = std::max(best, r);
            }
            s.values[gi] = best;
        });
    } else {
        const Eigen::Index d = T.dimension();
        const Eigen::MatrixXcd factor = Eigen::MatrixXcd::Identity(d, d) - T.matrix();
        parallel_for(n_grid.size(), [&](std::size_t gi) {
            s.values[gi] = spectral_norm(matrix_power(T.matrix(), n_grid[gi]) * factor);
        });
    }
    return s;
}

inline DecaySequence e_kt_sequence(const OperatorModel& T, const std::vector<Complex>& E,
                                   const std::vector<long long>& n_grid) {
    if (E.empty()) throw invalid_parameter_error("e_kt_sequence requires a nonempty product set");
    for (const auto& xi : E)
        if (std::abs(std::abs(xi) - 1.0) > 1e-12)
            throw invalid_parameter_error("product set points must be unimodular");
    if (n_grid.empty()) throw invalid_parameter_error("e_kt_sequence requires a nonempty grid");
    DecaySequence s;
    s.label = "e_kt";
    s.operator_desc = T.description();
    s.grid = n_grid;
    s.product_set = E;
    s.values.assign(n_grid.size(), 0.0);
    if (T.is_diagonal()) {
        const auto& eig = T.eigenvalues();
        parallel_for(n_grid.size(), [&](std::size_t gi) {
            const double n = static_cast<double>(n_grid[gi]);
            double best = 0.0;
            for (Eigen::Index i = 0; i < eig.size(); ++i) {
                double prod = std::pow(std::abs(eig(i)), n);
                for (const auto& xi : E) prod *= std::abs(xi - eig(i));
                best = std::max(best, prod);
            }
            s.values[gi] = best;
        });
    } else {
        const Eigen::Index d = T.dimension();
        Eigen::MatrixXcd factor = Eigen::MatrixXcd::Identity(d, d);
        for (const auto& xi : E)
            factor = factor * (xi * Eigen::MatrixXcd::Identity(d, d) - T.matrix());
        parallel_for(n_grid.size(), [&](std::size_t gi) {
            s.values[gi] = spectral_norm(matrix_power(T.matrix(), n_grid[gi]) * factor);
        });
    }
    return s;
}

inline double resolvent_norm(const OperatorModel& T, const Complex& lambda) {
    if (T.is_diagonal()) {
        double best = 0.0;
        for (Eigen::Index i = 0; i < T.eigenvalues().size(); ++i) {
            const double dist = std::abs(lambda - T.eigenvalues()(i));
            if (dist == 0.0) throw spectrum_hit_error("resolvent requested at an eigenvalue");
            best = std::max(best, 1.0 / dist);
        }
        return best;
    }
    const Eigen::Index d = T.dimension();
    const Eigen::MatrixXcd A = lambda * Eigen::MatrixXcd::Identity(d, d) - T.matrix();
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(A);
    if (!lu.isInvertible()) throw spectrum_hit_error("resolvent requested inside the spectrum");
    return spectral_norm(lu.inverse());
}

inline std::vector<std::pair<double, double>> resolvent_profile(const OperatorModel& T,
                                                                const std::vector<double>& theta_grid) {
    std::vector<std::pair<double, double>> out(theta_grid.size());
    parallel_for(theta_grid.size(), [&](std::size_t i) {
        out[i] = {theta_grid[i], resolvent_norm(T, std::polar(1.0, theta_grid[i]))};
    });
    return out;
}

// A sequence of model-shaped values n -> x_n (n >= 0). Diagonal sources carry
// entrywise columns; at() must be cheap for sequentially increasing n.
struct SequenceSource {
    Eigen::Index rows = 0;
    Eigen::Index cols = 1;
    bool diagonal_entries = true;
    std::function<Eigen::MatrixXcd(long long)> at;
};

// x_n = T^n (I - T) as a SequenceSource (entrywise for diagonal models).
inline SequenceSource make_kt_source(const OperatorModel& T) {
    SequenceSource src;
    if (T.is_diagonal()) {
        src.rows = T.dimension();
        src.cols = 1;
        src.diagonal_entries = true;
        struct State {
            Eigen::VectorXcd eig, factor, pow;
            long long at = 0;
        };
        auto st = std::make_shared<State>();
        st->eig = T.eigenvalues();
        st->factor = Eigen::VectorXcd::Ones(T.dimension()) - st->eig;
        st->pow = Eigen::VectorXcd::Ones(T.dimension());
        const auto recompute = [](State& s, long long n) {
            for (Eigen::Index i = 0; i < s.eig.size(); ++i)
                s.pow(i) = detail::cpow_int(s.eig(i), n);
            s.at = n;
        };
        src.at = [st, recompute](long long n) -> Eigen::MatrixXcd {
            if (n < 0) throw invalid_parameter_error("sequence index must be >= 0");
            if (n == st->at + 1) {
                st->pow = st->pow.cwiseProduct(st->eig);
                st->at = n;
            } else if (n != st->at) {
                recompute(*st, n);
            }
            return st->pow.cwiseProduct(st->factor);
        };
    } else {
        src.rows = T.dimension();
        src.cols = T.dimension();
        src.diagonal_entries = false;
        struct State {
            Eigen::MatrixXcd mat, factor, pow;
            long long at = 0;
        };
        auto st = std::make_shared<State>();
        st->mat = T.matrix();
        st->factor = Eigen::MatrixXcd::Identity(T.dimension(), T.dimension()) - T.matrix();
        st->pow = Eigen::MatrixXcd::Identity(T.dimension(), T.dimension());
        src.at = [st](long long n) -> Eigen::MatrixXcd {
            if (n < 0) throw invalid_parameter_error("sequence index must be >= 0");
            if (n == st->at + 1) {
                st->pow = st->pow * st->mat;
                st->at = n;
            } else if (n != st->at) {
                st->pow = matrix_power(st->mat, n);
                st->at = n;
            }
            return st->pow * st->factor;
        };
    }
    return src;
}

// x_n = T^n prod_{xi in E} (xi - T).
inline SequenceSource make_e_kt_source(const OperatorModel& T, const std::vector<Complex>& E) {
    SequenceSource src = make_kt_source(T);
    if (T.is_diagonal()) {
        const Eigen::VectorXcd eig = T.eigenvalues();
        Eigen::VectorXcd factor = Eigen::VectorXcd::Ones(T.dimension());
        for (const auto& xi : E)
            factor = factor.cwiseProduct(Eigen::VectorXcd::Constant(T.dimension(), xi) - eig);
        // Rebuild with the E-product factor.
        struct State {
            Eigen::VectorXcd eig, factor, pow;
            long long at = 0;
        };
        auto st = std::make_shared<State>();
        st->eig = eig;
        st->factor = factor;
        st->pow = Eigen::VectorXcd::Ones(T.dimension());
        src.at = [st](long long n) -> Eigen::MatrixXcd {
            if (n < 0) throw invalid_parameter_error("sequence index must be >= 0");
            if (n == st->at + 1) {
                st->pow = st->pow.cwiseProduct(st->eig);
                st->at = n;
            } else if (n != st->at) {
                for (Eigen::Index i = 0; i < st->eig.size(); ++i)
                    st->pow(i) = detail::cpow_int(st->eig(i), n);
                st->at = n;
            }
            return st->pow.cwiseProduct(st->factor);
        };
    } else {
        const Eigen::Index d = T.dimension();
        Eigen::MatrixXcd factor = Eigen::MatrixXcd::Identity(d, d);
        for (const auto& xi : E)
            factor = factor * (xi * Eigen::MatrixXcd::Identity(d, d) - T.matrix());
        const Eigen::MatrixXcd mat = T.matrix();
        struct State {
            Eigen::MatrixXcd mat, factor, pow;
            long long at = 0;
        };
        auto st = std::make_shared<State>();
        st->mat = mat;
        st->factor = factor;
        st->pow = Eigen::MatrixXcd::Identity(d, d);
        src.at = [st](long long n) -> Eigen::MatrixXcd {
            if (n < 0) throw invalid_parameter_error("sequence index must be >= 0");
            if (n == st->at + 1) {
                st->pow = st->pow * st->mat;
                st->at = n;
            } else if (n != st->at) {
                st->pow = matrix_power(st->mat, n);
                st->at = n;
            }
            return st->pow * st->factor;
        };
    }
    return src;
}

// sup over n <= n_max of || sum_{k <= n} e^{-i k theta_p} x_k ||.
inline double rotated_partial_sums(const SequenceSource& x, double theta_p, long long n_max) {
    if (n_max < 0) throw invalid_parameter_error("rotated_partial_sums requires n_max >= 0");
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(x.rows, x.cols);
    double best = 0.0;
    for (long long n = 0; n <= n_max; ++n) {
        const Complex w = std::polar(1.0, -theta_p * static_cast<double>(n));
        sum += w * x.at(n);
        best = std::max(best, model_norm(sum, x.diagonal_entries));
    }
    return best;
}

// Sampled sup of ||T^n||: exact closed form per grid point for diagonal
// models, binary exponentiation for dense ones. The grid is {0..16} plus a
// geometric sweep to n_max.
inline double check_power_bounded(const OperatorModel& T, long long n_max) {
    std::vector<long long> grid;
    for (long long n = 0; n <= std::min<long long>(16, n_max); ++n) grid.push_back(n);
    for (double g = 16.0; g <= static_cast<double>(n_max); g *= 1.25)
        grid.push_back(static_cast<long long>(g));
    if (grid.empty() || grid.back() != n_max) grid.push_back(n_max);
    double best = 0.0;
    for (long long n : grid) best = std::max(best, power_norm(T, n));
    return best;
}

// Geometric sample grid in the open exterior ring 1 < |lambda| <= 2.
inline std::vector<Complex> make_ritt_sample_grid(int n_radial = 12, int n_angular = 24) {
    if (n_radial < 1 || n_angular < 1)
        throw invalid_parameter_error("sample grid needs positive counts");
    std::vector<Complex> out;
    for (int i = 0; i < n_radial; ++i) {
        // radii 1 + 10^{-6} ... 2, geometric in |lambda| - 1
        const double r = 1.0 + std::pow(10.0, -6.0 + 6.0 * i / std::max(1, n_radial - 1));
        for (int j = 0; j < n_angular; ++j) {
            const double t = -std::numbers::pi + 2.0 * std::numbers::pi * j / n_angular;
            out.push_back(std::polar(r, t));
        }
    }
    return out;
}

inline double check_ritt(const OperatorModel& T, const std::vector<Complex>& samples) {
    if (samples.empty()) throw invalid_parameter_error("check_ritt requires samples");
    double best = 0.0;
    for (const auto& lam : samples) {
        if (!(std::abs(lam) > 1.0))
            throw invalid_parameter_error("Ritt samples must lie outside the closed unit disc");
        best = std::max(best, resolvent_norm(T, lam) * std::abs(lam - 1.0));
    }
    return best;
}

inline double check_e_ritt(const OperatorModel& T, const std::vector<Complex>& E,
                           const std::vector<Complex>& samples) {
    if (E.empty()) throw invalid_parameter_error("check_e_ritt requires a nonempty E");
    if (samples.empty()) throw invalid_parameter_error("check_e_ritt requires samples");
    double best = 0.0;
    for (const auto& lam : samples) {
        if (!(std::abs(lam) > 1.0))
            throw invalid_parameter_error("Ritt samples must lie outside the closed unit disc");
        double dist = std::numeric_limits<double>::infinity();
        for (const auto& xi : E) dist = std::min(dist, std::abs(lam - xi));
        best = std::max(best, resolvent_norm(T, lam) * dist);
    }
    return best;
}

// --- gallery -------------------------------------------------------------

inline OperatorModel ritt_diag(long long K) {
    if (K < 1) throw invalid_parameter_error("ritt_diag requires K >= 1");
    Eigen::VectorXcd eig(K);
    for (long long k = 1; k <= K; ++k)
        eig(k - 1) = Complex(1.0 - 1.0 / static_cast<double>(k), 0.0);
    return OperatorModel::diagonal(std::move(eig), "ritt_diag(" + std::to_string(K) + ")");
}

// lambda_k = (1 - theta_k^alpha) e^{i theta_k}, theta_k = pi/k; indices with
// theta_k^alpha > 1 would leave the unit disc and are rejected.
inline OperatorModel kt_alpha_diag(double alpha, long long K) {
    if (!(alpha > 0)) throw invalid_parameter_error("kt_alpha_diag requires alpha > 0");
    if (K < 1) throw invalid_parameter_error("kt_alpha_diag requires K >= 1");
    std::vector<Complex> eig;
    for (long long k = 1; k <= K; ++k) {
        const double theta = std::numbers::pi / static_cast<double>(k);
        const double delta = std::pow(theta, alpha);
        if (delta > 1.0) continue;
        eig.push_back(std::polar(1.0 - delta, theta));
    }
    if (eig.empty()) throw invalid_parameter_error("kt_alpha_diag: no admissible eigenvalues");
    Eigen::VectorXcd v(static_cast<Eigen::Index>(eig.size()));
    for (std::size_t i = 0; i < eig.size(); ++i) v(static_cast<Eigen::Index>(i)) = eig[i];
    char buf[64];
    std::snprintf(buf, sizeof(buf), "kt_alpha_diag(%g,%lld)", alpha, K);
    return OperatorModel::diagonal(std::move(v), buf);
}

inline OperatorModel e_ritt_diag(const std::vector<Complex>& E, long long K) {
    if (E.empty()) throw invalid_parameter_error("e_ritt_diag requires a nonempty E");
    if (K < 1) throw invalid_parameter_error("e_ritt_diag requires K >= 1");
    for (const auto& xi : E)
        if (std::abs(std::abs(xi) - 1.0) > 1e-12)
            throw invalid_parameter_error("e_ritt_diag points must be unimodular");
    Eigen::VectorXcd eig(static_cast<Eigen::Index>(E.size()) * K);
    Eigen::Index idx = 0;
    for (const auto& xi : E)
        for (long long k = 1; k <= K; ++k)
            eig(idx++) = xi * (1.0 - 1.0 / static_cast<double>(k));
    return OperatorModel::diagonal(std::move(eig),
                                   "e_ritt_diag(N=" + std::to_string(E.size()) + "," +
                                       std::to_string(K) + ")");
}

// Unitary conjugation of a diagonal model by the DFT matrix
// U_{jk} = e^{-2 pi i jk / d} / sqrt(d); spectrum is preserved.
inline OperatorModel dense_embed(const OperatorModel& inner) {
    if (!inner.is_diagonal())
        throw invalid_parameter_error("dense_embed expects a diagonal model");
    const Eigen::Index d = inner.dimension();
    Eigen::MatrixXcd U(d, d);
    const double s = 1.0 / std::sqrt(static_cast<double>(d));
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index k = 0; k < d; ++k)
            U(j, k) = s * std::polar(1.0, -2.0 * std::numbers::pi *
                                              static_cast<double>(j) * static_cast<double>(k) /
                                              static_cast<double>(d));
    const Eigen::MatrixXcd T = U * inner.eigenvalues().asDiagonal() * U.adjoint();
    return OperatorModel::dense(T, "dense_embed(" + inner.description() + ")");
}

struct GalleryParams {
    long long K = 100;
    double alpha = 1.0;
    std::vector<Complex> E = {Complex(1.0, 0.0)};
    std::string inner = "ritt_diag"; // wrapped family for dense_embed
};

inline OperatorModel gallery(const std::string& name, const GalleryParams& p = {}) {
    if (name == "ritt_diag") return ritt_diag(p.K);
    if (name == "kt_alpha_diag") return kt_alpha_diag(p.alpha, p.K);
    if (name == "e_ritt_diag") return e_ritt_diag(p.E, p.K);
    if (name == "dense_embed") {
        if (p.inner == "dense_embed")
            throw invalid_parameter_error("dense_embed cannot wrap itself");
        return dense_embed(gallery(p.inner, p));
    }
    throw invalid_parameter_error("unknown gallery name: " + name);
}

// --- boundary function ----------------------------------------------------

// F(theta) = I + (1 - e^{i theta}) R(e^{i theta}, T) with derivatives from
// dR/dlambda = -R^2. Diagonal models evaluate entrywise.
inline BoundaryFunction kt_boundary_function(const OperatorModel& T) {
    if (T.is_diagonal()) {
        for (Eigen::Index i = 0; i < T.eigenvalues().size(); ++i) {
            const Complex lam = T.eigenvalues()(i);
            if (std::abs(lam) >= 1.0 - 1e-12 && std::abs(lam - 1.0) > 1e-12)
                throw invalid_model_error("peripheral spectrum off the point 1");
        }
    }
    // Dense models: the spectral condition is asserted, not validated; the
    // radius estimate at construction is the only guard.
    BoundaryFunction F;
    const bool diag = T.is_diagonal();
    F.diagonal_entries = diag;
    F.rows = T.dimension();
    F.cols = diag ? 1 : T.dimension();

    if (diag) {
        const Eigen::VectorXcd eig = T.eigenvalues();
        const auto resolvent = [eig](double theta) {
            const Complex lam = std::polar(1.0, theta);
            Eigen::VectorXcd r(eig.size());
            for (Eigen::Index i = 0; i < eig.size(); ++i) r(i) = 1.0 / (lam - eig(i));
            return r;
        };
        F.value = [eig, resolvent](double theta) -> Eigen::MatrixXcd {
            const Complex lam = std::polar(1.0, theta);
            const Eigen::VectorXcd r = resolvent(theta);
            return Eigen::VectorXcd::Ones(eig.size()) + (1.0 - lam) * r;
        };
        F.deriv1 = [resolvent](double theta) -> Eigen::MatrixXcd {
            const Complex lam = std::polar(1.0, theta);
            const Eigen::VectorXcd r = resolvent(theta);
            const Complex i1(0.0, 1.0);
            return (-i1 * lam) * (r + (1.0 - lam) * r.cwiseProduct(r)).eval();
        };
        F.deriv2 = [resolvent](double theta) -> Eigen::MatrixXcd {
            const Complex lam = std::polar(1.0, theta);
            const Eigen::VectorXcd r = resolvent(theta);
            const Eigen::VectorXcd r2 = r.cwiseProduct(r);
            const Eigen::VectorXcd r3 = r2.cwiseProduct(r);
            return (lam * r + (lam * (1.0 - 3.0 * lam)) * r2 -
                    (2.0 * lam * lam * (1.0 - lam)) * r3)
                .eval();
        };
    } else {
        const Eigen::MatrixXcd mat = T.matrix();
        const Eigen::Index d = T.dimension();
        const auto resolvent = [mat, d](double theta) -> Eigen::MatrixXcd {
            const Complex lam = std::polar(1.0, theta);
            const Eigen::MatrixXcd A = lam * Eigen::MatrixXcd::Identity(d, d) - mat;
            return A.partialPivLu().solve(Eigen::MatrixXcd::Identity(d, d));
        };
        F.value = [resolvent, d](double theta) -> Eigen::MatrixXcd {
            const Complex lam = std::polar(1.0, theta);
            return Eigen::MatrixXcd::Identity(d, d) + (1.0 - lam) * resolvent(theta);
        };
        F.deriv1 = [resolvent](double theta) -> Eigen::MatrixXcd {
            const Complex lam = std::polar(1.0, theta);
            const Eigen::MatrixXcd r = resolvent(theta);
            const Complex i1(0.0, 1.0);
            return (-i1 * lam) * (r + (1.0 - lam) * r * r);
        };
        F.deriv2 = [resolvent](double theta) -> Eigen::MatrixXcd {
            const Complex lam = std::polar(1.0, theta);
            const Eigen::MatrixXcd r = resolvent(theta);
            const Eigen::MatrixXcd r2 = r * r;
            return lam * r + (lam * (1.0 - 3.0 * lam)) * r2 -
                   (2.0 * lam * lam * (1.0 - lam)) * (r2 * r);
        };
    }
    return F;
}

} // namespace ktrates

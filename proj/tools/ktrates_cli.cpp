// Copyright the ktrates authors
// SPDX-License-Identifier: MIT
//
// ktrates: experiment runner and artifact emitter. Exit codes: 0 all checks
// pass, 1 a verification check failed (reports still written), 2 invalid
// input or config.

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ktrates/io.hpp"
#include "ktrates/parallel.hpp"

namespace {

using namespace ktrates;

// Operator selection shared by the experiment subcommands: a gallery name
// with parameters, or a JSON specification document.
struct OperatorArgs {
    std::string gallery_name;
    std::string operator_file;
    long long size = 100;
    double alpha = 1.0;
    std::vector<std::string> xi;
    std::string inner = "ritt_diag";

    void attach(CLI::App* cmd, const char* default_gallery) {
        gallery_name = default_gallery;
        auto* g = cmd->add_option("--gallery", gallery_name,
                                  "Gallery model: ritt_diag, kt_alpha_diag, e_ritt_diag, "
                                  "dense_embed")
                      ->capture_default_str();
        cmd->add_option("--operator", operator_file, "Operator specification JSON file")
            ->excludes(g);
        cmd->add_option("--size", size, "Gallery dimension parameter K")->capture_default_str();
        cmd->add_option("--alpha", alpha, "kt_alpha_diag spectral approach exponent")
            ->capture_default_str();
        cmd->add_option("--xi", xi,
                        "Unit-circle point angle (repeatable): pi, -pi/2, 1/4*pi, 0");
        cmd->add_option("--inner", inner, "Family wrapped by dense_embed")
            ->capture_default_str();
    }

    std::vector<Complex> points() const {
        std::vector<Complex> E;
        for (const auto& s : xi) E.push_back(std::polar(1.0, parse_pi_angle(s)));
        if (E.empty()) E.push_back(Complex(1.0, 0.0));
        return E;
    }

    OperatorModel build() const {
        if (!operator_file.empty())
            return operator_from_json(Json::parse(read_text_file(operator_file)));
        GalleryParams p;
        p.K = size;
        p.alpha = alpha;
        p.E = points();
        p.inner = inner;
        return gallery(gallery_name, p);
    }

    Json echo() const {
        Json j;
        if (!operator_file.empty()) {
            j["operator"] = operator_file;
        } else {
            j["gallery"] = gallery_name;
            j["size"] = size;
            j["alpha"] = alpha;
            j["inner"] = inner;
        }
        if (!xi.empty()) j["xi"] = xi;
        return j;
    }
};

// Rate-function selection for kt: explicit parameters, a JSON file, or
// nothing (fitted from the resolvent profile, labeled as such).
struct RateArgs {
    std::string rate_file;
    double C = 0.0;
    double alpha = 0.0;
    double M = 0.0;

    void attach(CLI::App* cmd) {
        auto* f = cmd->add_option("--rate", rate_file, "Rate specification JSON file");
        auto* c = cmd->add_option("--rate-C", C, "Power-law rate constant");
        auto* a = cmd->add_option("--rate-alpha", alpha, "Power-law rate exponent");
        auto* m = cmd->add_option("--rate-M", M, "Constant rate level");
        f->excludes(c)->excludes(a)->excludes(m);
        m->excludes(c)->excludes(a);
        a->needs(c);
    }

    std::optional<RateFunction> build() const {
        if (!rate_file.empty()) return rate_from_json(Json::parse(read_text_file(rate_file)));
        if (M > 0.0) return RateFunction::constant(M);
        if (C > 0.0) return RateFunction::power_law(C, alpha);
        return std::nullopt;
    }

    Json echo() const {
        Json j;
        if (!rate_file.empty())
            j["rate"] = rate_file;
        else if (M > 0.0)
            j["rate-M"] = M;
        else if (C > 0.0) {
            j["rate-C"] = C;
            j["rate-alpha"] = alpha;
        } else
            j["rate"] = "fitted";
        return j;
    }
};

struct GridArgs {
    long long lo = 1;
    long long hi = 10000;

    void attach(CLI::App* cmd) {
        cmd->add_option("--n-lo", lo, "Smallest n in the decay grid")->capture_default_str();
        cmd->add_option("--n-hi", hi, "Largest n in the decay grid")->capture_default_str();
    }
    std::vector<long long> build() const { return default_n_grid(hi, lo); }
};

void emit(const std::string& path, const std::string& content) {
    if (!path.empty()) write_text_file(path, content);
}

void emit_report(const std::string& path, Json j, const Json& config) {
    j["config"] = config;
    emit(path, j.dump(2) + "\n");
}

int finish(const char* what, bool passed, const std::string& detail) {
    std::printf("%s: %s%s%s\n", what, passed ? "PASS" : "FAIL", detail.empty() ? "" : " ",
                detail.c_str());
    return passed ? 0 : 1;
}

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), pattern, v);
    return buf;
}

// --- mollifier --------------------------------------------------------------

struct MollifierCmd {
    int ell = 1;
    int k0 = 1;
    std::string out, report;

    void attach(CLI::App* cmd) {
        cmd->add_option("--ell", ell, "Number of small smoothing boxes")
            ->required()
            ->check(CLI::Range(1, 1000));
        cmd->add_option("--k0", k0, "Base smoothness parameter")
            ->capture_default_str()
            ->check(CLI::Range(1, 16));
        cmd->add_option("--out", out, "Mollifier document output path");
        cmd->add_option("--report", report, "Property report output path");
    }

    int run() const {
        const Mollifier m = build_mollifier(ell, k0);
        const PropertyReport rep = verify_properties(m);
        const int sc = smoothness_class(m.phi);
        const bool smooth_ok = sc >= ell + k0;

        emit(out, mollifier_to_json(m).dump(2) + "\n");
        Json j = property_report_to_json(rep);
        j["smoothness_class"] = sc;
        j["smoothness_required"] = ell + k0;
        j["piece_count"] = m.phi.piece_count();
        j["passed"] = rep.passed() && smooth_ok;
        Json cfg;
        cfg["command"] = "mollifier";
        cfg["ell"] = ell;
        cfg["k0"] = k0;
        emit_report(report, j, cfg);

        return finish("mollifier", rep.passed() && smooth_ok,
                      "ell=" + std::to_string(ell) + " k0=" + std::to_string(k0) +
                          " smoothness_class=" + std::to_string(sc) +
                          " pieces=" + std::to_string(m.phi.piece_count()));
    }
};

// --- coeffs -----------------------------------------------------------------

struct CoeffsCmd {
    int ell = 1;
    int k0 = 1;
    std::string eps = "1/5";
    long long nmax = 2000;
    bool want_y = false;
    std::string out, report;

    void attach(CLI::App* cmd) {
        cmd->add_option("--ell", ell, "Mollifier box count")->required()->check(CLI::Range(1, 1000));
        cmd->add_option("--k0", k0, "Base smoothness parameter")->capture_default_str();
        cmd->add_option("--eps", eps, "Cutoff scale as a rational in (0, pi/2]")
            ->capture_default_str();
        cmd->add_option("--nmax", nmax, "Largest stored index")->capture_default_str();
        cmd->add_flag("--y", want_y, "Emit y = delta_0 - z instead of z");
        cmd->add_option("--out", out, "Coefficient CSV output path");
        cmd->add_option("--report", report, "Report output path");
    }

    int run() const {
        const Rational e = parse_rational(eps);
        const Mollifier m = build_mollifier(ell, k0);
        const CoefficientSequence seq =
            want_y ? y_coefficients(m, e, nmax) : z_coefficients(m, e, nmax);
        const DifferenceReport diff = difference_bounds(m, seq);

        // z_0 = 3 eps / (2 pi) in closed form; the full sum of z is exactly 1
        // (and of y exactly 0), so the truncated sum sits within tail_bound.
        const double z0_exact = 3.0 * seq.eps_d() / (2.0 * std::numbers::pi);
        const double z0 = want_y ? 1.0 - seq.value(0) : seq.value(0);
        const bool z0_ok = std::abs(z0 - z0_exact) <= 1e-12;
        double sum = seq.value(0);
        for (long long n = 1; n <= seq.n_max; ++n) sum += 2.0 * seq.value(n);
        const double target = want_y ? 0.0 : 1.0;
        const bool sum_ok = std::abs(sum - target) <= seq.tail_bound + 1e-12;
        const bool diff_ok = std::isfinite(diff.sup_nsq_d) && std::isfinite(diff.sup_d_over_eps_sq);
        const bool passed = z0_ok && sum_ok && diff_ok;

        emit(out, coefficient_csv(seq));
        Json j;
        j["eps"] = seq.eps_d();
        j["ell"] = seq.ell;
        j["k0"] = seq.k0;
        j["n_max"] = seq.n_max;
        j["kind"] = want_y ? "y" : "z";
        j["tail_bound"] = seq.tail_bound;
        j["tail_order"] = seq.tail_order;
        j["l1_norm"] = seq.l1_norm();
        j["z0"] = seq.z_at(0);
        j["z0_closed_form"] = z0_exact;
        j["partial_sum"] = sum;
        j["sup_nsq_diff"] = diff.sup_nsq_d;
        j["sup_diff_over_eps_sq"] = diff.sup_d_over_eps_sq;
        j["checks"] = {{"z0_closed_form", z0_ok}, {"partial_sum_within_tail", sum_ok},
                       {"difference_bounds_finite", diff_ok}};
        j["passed"] = passed;
        Json cfg;
        cfg["command"] = "coeffs";
        cfg["ell"] = ell;
        cfg["k0"] = k0;
        cfg["eps"] = eps;
        cfg["nmax"] = nmax;
        cfg["y"] = want_y;
        emit_report(report, j, cfg);

        return finish("coeffs", passed,
                      "z0=" + format_double(seq.z_at(0)) + " l1=" + format_double(seq.l1_norm()) +
                          " tail_bound=" + format_double(seq.tail_bound));
    }
};

// --- kt / ritt / e-ritt -----------------------------------------------------

struct ExperimentCmd {
    OperatorArgs op;
    RateArgs rate;
    GridArgs grid;
    double c = 0.9;
    bool no_shape = false;
    std::vector<long long> shape_ns;
    std::string out, report;

    void attach(CLI::App* cmd, const char* default_gallery, bool with_rate, bool with_shape) {
        op.attach(cmd, default_gallery);
        grid.attach(cmd);
        if (with_rate) {
            rate.attach(cmd);
            cmd->add_option("--c", c, "Envelope constant in (0,1)")->capture_default_str();
        }
        if (with_shape) {
            cmd->add_flag("--no-shape", no_shape, "Skip the smoothed shape probe");
            cmd->add_option("--shape-n", shape_ns, "Shape probe indices (repeatable)");
        }
        cmd->add_option("--out", out, "Decay CSV output path");
        cmd->add_option("--report", report, "Report output path");
    }

    Json echo(const char* name, bool with_rate) const {
        Json cfg = op.echo();
        cfg["command"] = name;
        cfg["n-lo"] = grid.lo;
        cfg["n-hi"] = grid.hi;
        if (with_rate) {
            cfg.update(rate.echo());
            cfg["c"] = c;
        }
        return cfg;
    }

    int run_kt() const {
        const OperatorModel T = op.build();
        const auto ns = grid.build();
        std::optional<RateFunction> m = rate.build();
        bool fitted = false;
        if (!m) {
            // Fit here rather than inside kt_experiment so the envelope
            // column of the CSV can use the same function.
            m = fit_power_law(resolvent_profile(T, detail::default_theta_grid()));
            fitted = true;
        }
        ExperimentOptions eo;
        eo.c = c;
        DecayReport rep = kt_experiment(T, m, ns, eo);
        rep.rate_fitted = fitted;

        emit(out, decay_csv(rep.sequence, &*m, c));
        Json j = decay_report_to_json(rep);
        emit_report(report, j, echo("kt", true));
        return finish("kt", rep.passed(),
                      "operator=" + rep.operator_desc + " rate=" + rep.rate_desc +
                          (fitted ? " (fitted)" : "") +
                          " exponent=" + fmt("%.3f", rep.fitted_exponent) +
                          " envelope_C=" + fmt("%.4g", rep.envelope_C));
    }

    int run_ritt() const {
        const OperatorModel T = op.build();
        const auto ns = grid.build();
        ExperimentOptions eo;
        if (no_shape)
            eo.shape_ns.clear();
        else if (!shape_ns.empty())
            eo.shape_ns = shape_ns;
        DecayReport rep = ritt_experiment(T, ns, eo);

        emit(out, decay_csv(rep.sequence));
        emit_report(report, decay_report_to_json(rep), echo("ritt", false));
        return finish("ritt", rep.passed(),
                      "operator=" + rep.operator_desc +
                          " C_ritt=" + fmt("%.4g", rep.ritt_constant) +
                          " exponent=" + fmt("%.3f", rep.fitted_exponent) +
                          " sup_n_norm=" + fmt("%.4g", rep.sup_n_norm));
    }

    int run_e_ritt() const {
        const OperatorModel T = op.build();
        const auto ns = grid.build();
        DecayReport rep = e_ritt_experiment(T, op.points(), ns);

        emit(out, decay_csv(rep.sequence));
        emit_report(report, decay_report_to_json(rep), echo("e-ritt", false));
        return finish("e-ritt", rep.passed(),
                      "operator=" + rep.operator_desc + " |E|=" + std::to_string(op.points().size()) +
                          " exponent=" + fmt("%.3f", rep.fitted_exponent));
    }
};

// --- crosscheck ---------------------------------------------------------------

struct CrosscheckCmd {
    OperatorArgs op;
    std::string eps = "1/5";
    int ell = 3;
    int k0 = 1;
    std::vector<long long> ns = {0, 5, 50};
    double tail_abs = 1e-10;
    double tol = 1e-6;
    std::string report;

    void attach(CLI::App* cmd) {
        op.attach(cmd, "ritt_diag");
        cmd->add_option("--eps", eps, "Cutoff scale as a rational")->capture_default_str();
        cmd->add_option("--ell", ell, "Mollifier box count")->capture_default_str();
        cmd->add_option("--k0", k0, "Base smoothness parameter")->capture_default_str();
        cmd->add_option("--n", ns, "Indices to check (repeatable)");
        cmd->add_option("--tail-abs", tail_abs, "Absolute truncation budget")
            ->capture_default_str();
        cmd->add_option("--tol", tol, "Relative discrepancy tolerance")->capture_default_str();
        cmd->add_option("--report", report, "Report output path");
    }

    int run() const {
        const OperatorModel T = op.build();
        const Mollifier m = build_mollifier(ell, k0);
        const CrosscheckReport rep = identity_crosscheck(T, m, parse_rational(eps), ns, tail_abs);
        const bool passed = rep.max_discrepancy <= tol;

        Json j = crosscheck_report_to_json(rep);
        j["tolerance"] = tol;
        j["passed"] = passed;
        Json cfg = op.echo();
        cfg["command"] = "crosscheck";
        cfg["eps"] = eps;
        cfg["ell"] = ell;
        cfg["k0"] = k0;
        cfg["n"] = ns;
        cfg["tail-abs"] = tail_abs;
        cfg["tol"] = tol;
        emit_report(report, j, cfg);

        return finish("crosscheck", passed,
                      "max_discrepancy=" + format_double(rep.max_discrepancy) +
                          " tol=" + format_double(tol) + " n_trunc=" + std::to_string(rep.n_trunc));
    }
};

// --- smooth -------------------------------------------------------------------

struct SmoothCmd {
    OperatorArgs op;
    std::string eps = "1/5";
    int ell = 2;
    int k0 = 1;
    std::vector<long long> ns;
    long long n_hi = 1000;
    double tail_fraction = 0.01;
    double tail_abs = 0.0;
    long long trunc_max = 200000;
    double defect_limit = 0.0;
    std::string out, report;

    void attach(CLI::App* cmd) {
        op.attach(cmd, "ritt_diag");
        cmd->add_option("--eps", eps, "Cutoff scale as a rational")->capture_default_str();
        cmd->add_option("--ell", ell, "Mollifier box count")->capture_default_str();
        cmd->add_option("--k0", k0, "Base smoothness parameter")->capture_default_str();
        cmd->add_option("--n", ns, "Explicit grid indices (repeatable)");
        cmd->add_option("--n-hi", n_hi, "Largest n of the default grid")->capture_default_str();
        cmd->add_option("--tail-fraction", tail_fraction,
                        "Truncation budget as a fraction of eps")
            ->capture_default_str();
        cmd->add_option("--tail-abs", tail_abs, "Absolute truncation budget (0 = unused)")
            ->capture_default_str();
        cmd->add_option("--trunc-max", trunc_max, "Truncation radius cap")->capture_default_str();
        cmd->add_option("--defect-limit", defect_limit,
                        "Fail when defect/eps exceeds this (0 = report only)");
        cmd->add_option("--out", out, "CSV output path (n, norm, smoothed)");
        cmd->add_option("--report", report, "Report output path");
    }

    int run() const {
        const OperatorModel T = op.build();
        const Mollifier m = build_mollifier(ell, k0);
        const auto grid = ns.empty() ? default_n_grid(n_hi) : ns;
        SmoothingOptions so;
        so.tail_fraction = tail_fraction;
        so.tail_absolute = tail_abs;
        so.n_trunc_max = trunc_max;
        const SequenceSource source = make_kt_source(T);
        const SmoothingResult sm = smooth_sequence(source, m, parse_rational(eps), grid, so);
        const DefectReport defect = approximation_defect(source, sm);
        const bool passed = defect_limit <= 0.0 || defect.ratio_to_eps <= defect_limit;

        emit(out, decay_csv(kt_sequence(T, grid), nullptr, 0.9, &sm));
        Json j = smoothing_result_to_json(sm, &defect);
        j["passed"] = passed;
        Json cfg = op.echo();
        cfg["command"] = "smooth";
        cfg["eps"] = eps;
        cfg["ell"] = ell;
        cfg["k0"] = k0;
        if (!ns.empty())
            cfg["n"] = ns;
        else
            cfg["n-hi"] = n_hi;
        cfg["tail-fraction"] = tail_fraction;
        cfg["tail-abs"] = tail_abs;
        cfg["trunc-max"] = trunc_max;
        if (defect_limit > 0.0) cfg["defect-limit"] = defect_limit;
        emit_report(report, j, cfg);

        return finish("smooth", passed,
                      "defect/eps=" + fmt("%.4g", defect.ratio_to_eps) +
                          " n_trunc=" + std::to_string(sm.n_trunc) +
                          " trunc_err=" + fmt("%.4g", sm.truncation_error_bound));
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decay-rate experiments for power-bounded operators"};
    app.set_config("--config", "", "INI config file; command-line flags override its values");
    int threads = 1;
    app.add_option("--threads", threads, "Cap internal parallelism")->capture_default_str();
    app.fallthrough(); // global flags may appear after the subcommand
    app.require_subcommand(1);

    MollifierCmd mollifier_cmd;
    mollifier_cmd.attach(app.add_subcommand("mollifier", "Build and verify a mollifier"));
    CoeffsCmd coeffs_cmd;
    coeffs_cmd.attach(app.add_subcommand("coeffs", "Coefficient sequences and tail bounds"));
    ExperimentCmd kt_cmd;
    kt_cmd.attach(app.add_subcommand("kt", "Quantified decay against a resolvent envelope"),
                  "kt_alpha_diag", true, false);
    ExperimentCmd ritt_cmd;
    ritt_cmd.attach(app.add_subcommand("ritt", "O(1/n) decay for Ritt-type models"), "ritt_diag",
                    false, true);
    ExperimentCmd e_ritt_cmd;
    e_ritt_cmd.attach(app.add_subcommand("e-ritt", "Multi-point product decay"), "e_ritt_diag",
                      false, false);
    CrosscheckCmd crosscheck_cmd;
    crosscheck_cmd.attach(
        app.add_subcommand("crosscheck", "Smoothed sequence vs boundary integral"));
    SmoothCmd smooth_cmd;
    smooth_cmd.attach(app.add_subcommand("smooth", "Free-form smoothing with defect report"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2; // help/version exit 0; any parse problem is config error
    }

    ktrates::set_max_threads(threads);

    try {
        if (app.got_subcommand("mollifier")) return mollifier_cmd.run();
        if (app.got_subcommand("coeffs")) return coeffs_cmd.run();
        if (app.got_subcommand("kt")) return kt_cmd.run_kt();
        if (app.got_subcommand("ritt")) return ritt_cmd.run_ritt();
        if (app.got_subcommand("e-ritt")) return e_ritt_cmd.run_e_ritt();
        if (app.got_subcommand("crosscheck")) return crosscheck_cmd.run();
        if (app.got_subcommand("smooth")) return smooth_cmd.run();
    } catch (const ktrates::invalid_parameter_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const ktrates::invalid_interval_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const ktrates::invalid_model_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const ktrates::io_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const ktrates::error& e) {
        // Resource or numerical failure during an otherwise valid run.
        std::fprintf(stderr, "run failed: %s\n", e.what());
        return 1;
    }
    return 2;
}

// Copyright the ktrates authors
// SPDX-License-Identifier: MIT

#pragma once

#include <cctype>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ktrates/errors.hpp"
#include "ktrates/experiments.hpp"
#include "ktrates/mollifier.hpp"
#include "ktrates/operators.hpp"
#include "ktrates/oscillatory.hpp"
#include "ktrates/piecewise_poly.hpp"
#include "ktrates/rates.hpp"
#include "ktrates/smoothing.hpp"

namespace ktrates {

using Json = nlohmann::json;

// Fixed 17-significant-digit formatting: lossless double round-trip and
// byte-identical files across runs.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary); // binary keeps newlines UNIX
    if (!out) throw io_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw io_error("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open for reading: " + path);
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return s;
}

// Angles in radians from "pi", "-pi", "pi/3", "1/2*pi", "pi*1/2", or a plain
// rational ("0", "-3/2"). Used for unit-circle points and rotation angles.
inline double parse_pi_angle(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    double sign = 1.0;
    if (!s.empty() && (s[0] == '+' || s[0] == '-')) {
        if (s[0] == '-') sign = -1.0;
        s.erase(s.begin());
    }
    const auto pos = s.find("pi");
    if (pos == std::string::npos) return sign * to_double(parse_rational(s));
    if (s == "pi") return sign * std::numbers::pi;
    if (pos == 0 && s[2] == '/')
        return sign * std::numbers::pi / to_double(parse_rational(s.substr(3)));
    if (pos == 0 && s[2] == '*')
        return sign * std::numbers::pi * to_double(parse_rational(s.substr(3)));
    if (pos + 2 == s.size() && pos >= 2 && s[pos - 1] == '*')
        return sign * std::numbers::pi * to_double(parse_rational(s.substr(0, pos - 1)));
    throw invalid_parameter_error("cannot parse angle: '" + text + "'");
}

// ---------------------------------------------------------------------------
// Piecewise polynomials: rationals as "p/q" strings so the round-trip is
// exact regardless of magnitude.

inline Json piecewise_to_json(const PiecewisePolynomial& f) {
    Json j;
    j["breakpoints"] = Json::array();
    j["pieces"] = Json::array();
    for (const auto& b : f.breakpoints()) j["breakpoints"].push_back(to_fraction_string(b));
    for (std::size_t i = 0; i < f.piece_count(); ++i) {
        Json coeffs = Json::array();
        for (const auto& c : f.piece(i).c) coeffs.push_back(to_fraction_string(c));
        j["pieces"].push_back(std::move(coeffs));
    }
    return j;
}

inline PiecewisePolynomial piecewise_from_json(const Json& j) {
    if (!j.contains("breakpoints") || !j.contains("pieces"))
        throw io_error("piecewise document needs breakpoints and pieces");
    std::vector<Rational> breaks;
    std::vector<Polynomial> pieces;
    for (const auto& b : j.at("breakpoints")) breaks.push_back(parse_rational(b.get<std::string>()));
    for (const auto& p : j.at("pieces")) {
        std::vector<Rational> coeffs;
        for (const auto& c : p) coeffs.push_back(parse_rational(c.get<std::string>()));
        pieces.emplace_back(std::move(coeffs));
    }
    return PiecewisePolynomial(std::move(breaks), std::move(pieces));
}

// ---------------------------------------------------------------------------
// Mollifier export: the function plus the certified derivative-norm brackets.

inline Json mollifier_to_json(const Mollifier& m) {
    Json j;
    j["ell"] = m.ell;
    j["k0"] = m.k0;
    j["phi"] = piecewise_to_json(m.phi);
    Json norms = Json::array();
    for (std::size_t k = 0; k < m.derivative_norms.size(); ++k) {
        Json b;
        b["order"] = k;
        b["lower"] = to_fraction_string(m.derivative_norms[k].lower);
        b["upper"] = to_fraction_string(m.derivative_norms[k].upper);
        norms.push_back(std::move(b));
    }
    j["derivative_norms"] = std::move(norms);
    return j;
}

inline Mollifier mollifier_from_json(const Json& j) {
    Mollifier m;
    m.ell = j.at("ell").get<int>();
    m.k0 = j.at("k0").get<int>();
    m.phi = piecewise_from_json(j.at("phi"));
    for (const auto& b : j.at("derivative_norms"))
        m.derivative_norms.push_back({parse_rational(b.at("lower").get<std::string>()),
                                      parse_rational(b.at("upper").get<std::string>())});
    return m;
}

// Property ids with pass/fail or certified bracket, one entry per property.
inline Json property_report_to_json(const PropertyReport& r) {
    Json props = Json::array();
    auto flag = [&](const char* id, bool ok) {
        Json p;
        p["id"] = id;
        p["passed"] = ok;
        props.push_back(std::move(p));
    };
    flag("plateau_exact", r.plateau_exact);
    flag("support_exact", r.support_exact);
    flag("range_samples_exact", r.range_samples_exact);
    flag("range_interior_certified", r.range_interior_certified);
    Json low;
    low["id"] = "low_order_norm_max";
    low["bracket"] = {to_fraction_string(r.low_order_max.lower),
                      to_fraction_string(r.low_order_max.upper)};
    props.push_back(std::move(low));
    Json growth;
    growth["id"] = "derivative_growth";
    growth["ratios"] = r.growth_ratios;
    growth["ratio_max"] = r.growth_ratio_max;
    props.push_back(std::move(growth));
    Json j;
    j["properties"] = std::move(props);
    j["passed"] = r.passed();
    return j;
}

// ---------------------------------------------------------------------------
// Operator specification: diagonal eigenvalue lists, dense matrices (re/im
// pairs), or a gallery name with parameters.

inline Json complex_to_json(const Complex& z) { return Json::array({z.real(), z.imag()}); }

inline Complex complex_from_json(const Json& j) {
    if (j.is_number()) return Complex(j.get<double>(), 0.0);
    if (!j.is_array() || j.size() != 2) throw io_error("complex values are [re, im] pairs");
    return Complex(j[0].get<double>(), j[1].get<double>());
}

inline Json operator_to_json(const OperatorModel& T) {
    Json j;
    if (T.is_diagonal()) {
        j["kind"] = "diagonal";
        Json eig = Json::array();
        for (Eigen::Index i = 0; i < T.eigenvalues().size(); ++i)
            eig.push_back(complex_to_json(T.eigenvalues()(i)));
        j["eigenvalues"] = std::move(eig);
    } else {
        j["kind"] = "dense";
        Json rows = Json::array();
        for (Eigen::Index r = 0; r < T.dimension(); ++r) {
            Json row = Json::array();
            for (Eigen::Index c = 0; c < T.dimension(); ++c)
                row.push_back(complex_to_json(T.matrix()(r, c)));
            rows.push_back(std::move(row));
        }
        j["matrix"] = std::move(rows);
    }
    j["description"] = T.description();
    return j;
}

inline OperatorModel operator_from_json(const Json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "diagonal") {
        const auto& eig = j.at("eigenvalues");
        Eigen::VectorXcd v(static_cast<Eigen::Index>(eig.size()));
        for (std::size_t i = 0; i < eig.size(); ++i)
            v(static_cast<Eigen::Index>(i)) = complex_from_json(eig[i]);
        return OperatorModel::diagonal(v, j.value("description", std::string("diagonal")));
    }
    if (kind == "dense") {
        const auto& rows = j.at("matrix");
        const auto d = static_cast<Eigen::Index>(rows.size());
        Eigen::MatrixXcd A(d, d);
        for (Eigen::Index r = 0; r < d; ++r) {
            const auto& row = rows[static_cast<std::size_t>(r)];
            if (static_cast<Eigen::Index>(row.size()) != d)
                throw io_error("dense operator matrix must be square");
            for (Eigen::Index c = 0; c < d; ++c)
                A(r, c) = complex_from_json(row[static_cast<std::size_t>(c)]);
        }
        return OperatorModel::dense(A, j.value("description", std::string("dense")));
    }
    if (kind == "gallery") {
        GalleryParams p;
        p.K = j.value("K", p.K);
        p.alpha = j.value("alpha", p.alpha);
        p.inner = j.value("inner", p.inner);
        if (j.contains("E")) {
            p.E.clear();
            for (const auto& xi : j.at("E")) p.E.push_back(complex_from_json(xi));
        }
        return gallery(j.at("name").get<std::string>(), p);
    }
    throw io_error("unknown operator kind: " + kind);
}

// ---------------------------------------------------------------------------
// Rate-function specification: kind tag plus parameters.

inline Json rate_to_json(const RateFunction& m) {
    Json j;
    switch (m.kind()) {
    case RateFunction::Kind::power_law:
        j["kind"] = "power_law";
        j["C"] = m.power_law_constant();
        j["alpha"] = m.power_law_exponent();
        j["domain_hi"] = m.domain_hi();
        break;
    case RateFunction::Kind::constant:
        j["kind"] = "constant";
        j["M"] = m.power_law_constant();
        j["domain_hi"] = m.domain_hi();
        break;
    case RateFunction::Kind::tabulated:
        j["kind"] = "tabulated";
        j["nodes"] = Json::array();
        for (const auto& [e, v] : m.table()) j["nodes"].push_back({e, v});
        break;
    }
    return j;
}

inline RateFunction rate_from_json(const Json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "power_law")
        return RateFunction::power_law(j.at("C").get<double>(), j.at("alpha").get<double>(),
                                       j.value("domain_hi", std::numbers::pi));
    if (kind == "constant")
        return RateFunction::constant(j.at("M").get<double>(),
                                      j.value("domain_hi", std::numbers::pi));
    if (kind == "tabulated") {
        std::vector<std::pair<double, double>> nodes;
        for (const auto& n : j.at("nodes"))
            nodes.emplace_back(n.at(0).get<double>(), n.at(1).get<double>());
        return RateFunction::tabulated(std::move(nodes));
    }
    throw io_error("unknown rate kind: " + kind);
}

// ---------------------------------------------------------------------------
// Experiment reports. Non-finite doubles serialize as JSON null.

inline Json decay_report_to_json(const DecayReport& rep) {
    Json j;
    j["experiment"] = rep.experiment;
    j["operator"] = rep.operator_desc;
    if (!rep.rate_desc.empty()) {
        j["rate"] = rep.rate_desc;
        j["rate_fitted"] = rep.rate_fitted;
        j["c"] = rep.c;
    }
    j["power_bound_constant"] = rep.power_bound_constant;
    j["ritt_constant"] = rep.ritt_constant;
    j["envelope_violations"] = rep.envelope_violations;
    j["fitted_exponent"] = rep.fitted_exponent;
    j["exponent_window"] = {rep.exponent_window_lo, rep.exponent_window_hi};
    j["envelope_C"] = rep.envelope_C;
    j["sup_n_norm"] = rep.sup_n_norm;
    if (!rep.shape_values.empty()) {
        Json sv = Json::array();
        for (const auto& [n, v] : rep.shape_values) sv.push_back({Json(n), Json(v)});
        j["shape_values"] = std::move(sv);
    }
    if (!rep.rotated_bounds.empty()) {
        Json rb = Json::array();
        for (const auto& [t, b] : rep.rotated_bounds) rb.push_back({t, b});
        j["rotated_bounds"] = std::move(rb);
    }
    Json verdicts = Json::array();
    for (const auto& v : rep.verdicts) {
        Json jv;
        jv["name"] = v.name;
        jv["passed"] = v.passed;
        jv["value"] = v.value;
        jv["threshold"] = v.threshold;
        jv["comparison"] = v.comparison;
        verdicts.push_back(std::move(jv));
    }
    j["verdicts"] = std::move(verdicts);
    j["passed"] = rep.passed();
    return j;
}

inline Json crosscheck_report_to_json(const CrosscheckReport& r) {
    Json j;
    j["n_trunc"] = r.n_trunc;
    j["max_discrepancy"] = r.max_discrepancy;
    Json rows = Json::array();
    for (std::size_t i = 0; i < r.ns.size(); ++i) rows.push_back({Json(r.ns[i]), Json(r.discrepancies[i])});
    j["per_n"] = std::move(rows);
    return j;
}

inline Json smoothing_result_to_json(const SmoothingResult& sm, const DefectReport* defect) {
    Json j;
    j["eps"] = to_fraction_string(sm.eps);
    j["ell"] = sm.ell;
    j["k0"] = sm.k0;
    j["n_trunc"] = sm.n_trunc;
    j["tail_bound"] = sm.tail_bound;
    j["sup_x"] = sm.sup_x;
    j["truncation_error_bound"] = sm.truncation_error_bound;
    if (defect) {
        j["defect"] = defect->defect;
        j["defect_over_eps"] = defect->ratio_to_eps;
    }
    return j;
}

// ---------------------------------------------------------------------------
// CSV writers: comma separated, UNIX newlines, one `#` metadata line ahead of
// the column header where the format calls for sequence-level scalars.

inline std::string coefficient_csv(const CoefficientSequence& z) {
    std::string out;
    out += "# eps=" + format_double(z.eps_d()) + ",ell=" + std::to_string(z.ell) +
           ",k0=" + std::to_string(z.k0) + ",tail_bound=" + format_double(z.tail_bound) +
           ",tail_order=" + std::to_string(z.tail_order) + "\n";
    out += "n,z_n,l1_running\n";
    double running = std::abs(z.value(0));
    out += "0," + format_double(z.value(0)) + "," + format_double(running) + "\n";
    for (long long n = 1; n <= z.n_max; ++n) {
        running += 2.0 * std::abs(z.value(n));
        out += std::to_string(n) + "," + format_double(z.value(n)) + "," +
               format_double(running) + "\n";
    }
    return out;
}

// Decay CSV: n, norm; plus envelope and ratio columns when a rate is given;
// plus a smoothed-norm column when a smoothing result shares the grid.
inline std::string decay_csv(const DecaySequence& s, const RateFunction* m = nullptr,
                             double c = 0.9, const SmoothingResult* smoothed = nullptr) {
    const bool with_env = m != nullptr;
    const bool with_sm = smoothed != nullptr;
    if (with_sm && smoothed->grid != s.grid)
        throw invalid_parameter_error("smoothed column requires the same n grid");
    std::string out = "n,norm";
    if (with_env) out += ",envelope,ratio";
    if (with_sm) out += ",smoothed";
    out += "\n";
    for (std::size_t i = 0; i < s.grid.size(); ++i) {
        out += std::to_string(s.grid[i]) + "," + format_double(s.values[i]);
        if (with_env) {
            const double env = m_log_inverse(*m, c * static_cast<double>(s.grid[i])).eps;
            out += "," + format_double(env) + "," + format_double(s.values[i] / env);
        }
        if (with_sm) out += "," + format_double(smoothed->norms[i]);
        out += "\n";
    }
    return out;
}

inline std::string profile_csv(const std::vector<std::pair<double, double>>& profile) {
    std::string out = "theta,resolvent_norm\n";
    for (const auto& [t, r] : profile)
        out += format_double(t) + "," + format_double(r) + "\n";
    return out;
}

} // namespace ktrates

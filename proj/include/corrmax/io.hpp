// Copyright 2026 The corrmax Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "corrmax/scan.hpp"

#include <json.hpp>

#include <fstream>
#include <locale>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

// JSON file formats.
//
// State:  {"dims":[d1,d2],"matrix":[[[re,im],...],...]}
//         {"dims":[d1,d2],"ket":[[re,im],...]}
//         {"named":{"variant":"werner","params":{"d":3,"x":0.7}}}
// POM:    {"dim":d,"kets":[[[re,im],...],...]}
//         {"spin":[ax,ay,az]}  {"trine":true}  {"mirror":alpha}
namespace corrmax::io {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Complex arrays

inline json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline json to_json(const CVector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(to_json(v(i)));
    return a;
}

inline json to_json(const CMatrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json to_json(const RVector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

inline json to_json(const RMatrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        std::vector<double> row(static_cast<std::size_t>(m.cols()));
        for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
        rows.push_back(row);
    }
    return rows;
}

inline cplx complex_from_json(const json& j) {
    if (j.is_number()) return cplx(j.get<double>(), 0.0);
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ValidationError(ErrorKind::schema, "complex entries must be [re, im]");
    return cplx(j[0].get<double>(), j[1].get<double>());
}

inline CVector vector_from_json(const json& j) {
    if (!j.is_array()) throw ValidationError(ErrorKind::schema, "expected an array of complex entries");
    CVector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = complex_from_json(j[i]);
    return v;
}

inline CMatrix matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw ValidationError(ErrorKind::schema, "matrix must be a nonempty array of rows");
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    CMatrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_array() || j[i].size() != cols)
            throw ValidationError(ErrorKind::schema, "matrix rows must have equal length");
        for (std::size_t k = 0; k < cols; ++k)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = complex_from_json(j[i][k]);
    }
    return m;
}

inline Eigen::Vector3d vec3_from_json(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 3)
        throw ValidationError(ErrorKind::schema, std::string(what) + " must be a 3-vector");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

// ---------------------------------------------------------------------------
// Files

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(ErrorKind::io, "cannot read " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError(ErrorKind::schema, path + ": " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError(ErrorKind::io, "cannot write " + path);
    out << text;
    if (!out) throw ValidationError(ErrorKind::io, "write failed on " + path);
}

// ---------------------------------------------------------------------------
// States

inline NamedStateSpec named_spec_from_json(const json& j) {
    if (!j.is_object() || !j.contains("variant"))
        throw ValidationError(ErrorKind::schema, "named state needs a \"variant\"");
    const std::string v = j.at("variant").get<std::string>();
    const json p = j.value("params", json::object());
    if (v == "singlet") return named::Singlet{};
    if (v == "bell" || v == "trine_demo") return named::TrineDemo{};
    if (v == "isotropic") return named::Isotropic{p.at("w").get<double>()};
    if (v == "werner") return named::Werner{p.at("d").get<int>(), p.at("x").get<double>()};
    if (v == "separable_z") {
        named::SeparableZ s;
        s.lambda1 = p.at("lambda1").get<double>();
        s.lambda2 = p.at("lambda2").get<double>();
        s.tau1 = vec3_from_json(p.at("tau1"), "tau1");
        s.tau2 = vec3_from_json(p.at("tau2"), "tau2");
        return s;
    }
    if (v == "product")
        return named::Product{vec3_from_json(p.at("m"), "m"), vec3_from_json(p.at("n"), "n")};
    if (v == "schmidt_mixture") {
        named::SchmidtMixture s;
        s.weights = p.at("weights").get<std::vector<double>>();
        s.probs = p.at("probs").get<std::vector<std::vector<double>>>();
        if (p.contains("phases")) s.phases = p.at("phases").get<std::vector<std::vector<double>>>();
        return s;
    }
    throw ValidationError(ErrorKind::schema, "unknown named state \"" + v + "\"");
}

inline DensityOperator state_from_json(const json& j) {
    try {
        if (!j.is_object()) throw ValidationError(ErrorKind::schema, "state file must hold an object");
        if (j.contains("named")) return named_state(named_spec_from_json(j.at("named")));
        if (!j.contains("dims")) throw ValidationError(ErrorKind::schema, "state needs \"dims\"");
        auto dims = j.at("dims").get<std::vector<int>>();
        if (dims.size() != 2) throw ValidationError(ErrorKind::schema, "dims must be [d1, d2]");
        if (j.contains("matrix")) return DensityOperator::create(matrix_from_json(j.at("matrix")), dims[0], dims[1]);
        if (j.contains("ket")) return PureKet::create(vector_from_json(j.at("ket")), dims[0], dims[1]).density();
        throw ValidationError(ErrorKind::schema, "state needs \"matrix\", \"ket\" or \"named\"");
    } catch (const json::exception& e) {
        throw ValidationError(ErrorKind::schema, e.what());
    }
}

inline json state_to_json(const DensityOperator& rho) {
    return json{{"dims", {rho.d1(), rho.d2()}}, {"matrix", to_json(rho.matrix())}};
}

inline DensityOperator read_state(const std::string& path) { return state_from_json(read_json_file(path)); }

// ---------------------------------------------------------------------------
// POMs

inline MaximalPOM pom_from_json(const json& j) {
    try {
        if (!j.is_object()) throw ValidationError(ErrorKind::schema, "POM file must hold an object");
        if (j.contains("spin")) return spin_pom(vec3_from_json(j.at("spin"), "spin"));
        if (j.contains("trine")) return trine_pom();
        if (j.contains("mirror")) return mirror_pom(j.at("mirror").get<double>());
        if (!j.contains("kets") || !j.contains("dim"))
            throw ValidationError(ErrorKind::schema, "POM needs \"dim\" and \"kets\"");
        const int d = j.at("dim").get<int>();
        std::vector<CVector> kets;
        for (const auto& k : j.at("kets")) kets.push_back(vector_from_json(k));
        for (const auto& k : kets)
            if (k.size() != d) throw ValidationError(ErrorKind::size_mismatch, "ket length differs from dim");
        return MaximalPOM::create(kets, d);
    } catch (const json::exception& e) {
        throw ValidationError(ErrorKind::schema, e.what());
    }
}

inline json pom_to_json(const MaximalPOM& p) {
    json kets = json::array();
    for (int j = 0; j < p.outcomes(); ++j) kets.push_back(to_json(p.ket(j)));
    return json{{"dim", p.dim()}, {"kets", kets}};
}

inline MaximalPOM read_pom(const std::string& path) { return pom_from_json(read_json_file(path)); }

/// Canonical form of a state or POM document.
inline json canonical(const json& j) {
    if (j.is_object() && (j.contains("kets") || j.contains("spin") || j.contains("trine") || j.contains("mirror")))
        return pom_to_json(pom_from_json(j));
    return state_to_json(state_from_json(j));
}

// ---------------------------------------------------------------------------
// Reports

inline json to_json(const BoundReport& r) {
    json c{{"d", r.certificate.d}, {"delta", r.certificate.delta}, {"terms", r.certificate.terms},
           {"singular_values", to_json(r.certificate.singular_values)}};
    if (r.certificate.n) c["n"] = *r.certificate.n;
    if (r.certificate.a) c["a"] = std::vector<double>(r.certificate.a->data(), r.certificate.a->data() + 3);
    if (r.certificate.b) c["b"] = std::vector<double>(r.certificate.b->data(), r.certificate.b->data() + 3);
    return json{{"kind", to_string(r.kind)}, {"value", r.value}, {"certificate", c}};
}

inline json to_json(const MultiplierPair& m) {
    return json{{"V", to_json(m.v)},
                {"W", to_json(m.w)},
                {"hermiticity_V", m.hermiticity_v},
                {"hermiticity_W", m.hermiticity_w},
                {"trace_V", m.trace_v},
                {"trace_W", m.trace_w}};
}

inline json to_json(const OptimizationResult& r) {
    json runs = json::array();
    for (const auto& s : r.runs)
        runs.push_back({{"value", s.value},
                        {"gradient_norm", s.gradient_norm},
                        {"iterations", s.iterations},
                        {"newton_steps", s.newton_steps},
                        {"converged", s.converged}});
    return json{{"n", r.n},
                {"C", r.value},
                {"gradient_norm", r.gradient_norm},
                {"residual", r.residual},
                {"converged", r.converged},
                {"classification", to_string(r.classification)},
                {"hessian_min", r.hessian_min},
                {"hessian_max", r.hessian_max},
                {"vwcon", {r.vwcon_first, r.vwcon_second}},
                {"corollary", r.corollary},
                {"multipliers", to_json(r.multipliers)},
                {"best_start", r.best_start},
                {"runs", runs},
                {"pom_a", pom_to_json(r.pom_a())},
                {"pom_b", pom_to_json(r.pom_b())}};
}

inline json to_json(const DiscriminationReport& r) {
    return json{{"p", r.p},
                {"q", r.q},
                {"upsilon_first", to_json(r.upsilon_first)},
                {"upsilon_second", to_json(r.upsilon_second)},
                {"first_condition_residual", r.first_condition_residual},
                {"min_margin_first", r.min_margin_first},
                {"min_margin_second", r.min_margin_second},
                {"first_side", r.first_side},
                {"second_side", r.second_side}};
}

inline json to_json(const SecondOrderReport& r) {
    return json{{"classification", to_string(r.classification)},
                {"min_eigenvalue", r.min_eigenvalue},
                {"max_eigenvalue", r.max_eigenvalue},
                {"null_directions", r.null_directions},
                {"eigenvalues", to_json(r.eigenvalues)}};
}

inline json to_json(const ScanSummary& s) {
    return json{{"count", s.count},
                {"converged", s.converged},
                {"unconverged", s.unconverged},
                {"max_gap", s.max_gap},
                {"mean_gap", s.mean_gap},
                {"violations", s.violations},
                {"chain_violations", s.chain_violations},
                {"threshold", s.threshold},
                {"vwcon_both", s.vwcon_both},
                {"results", s.results},
                {"seed", s.seed},
                {"config_hash", s.config_hash},
                {"warnings", s.warnings}};
}

// ---------------------------------------------------------------------------
// CSV

inline std::string format_double(double x) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os.precision(17);
    os << x;
    return os.str();
}

inline void write_csv(const std::vector<std::pair<double, double>>& series, std::ostream& os) {
    os << "x,value\n";
    for (const auto& [x, v] : series) os << format_double(x) << ',' << format_double(v) << '\n';
}

inline void emit_csv(const std::vector<std::pair<double, double>>& series, const std::string& path) {
    std::ostringstream os;
    write_csv(series, os);
    write_text_file(path, os.str());
}

} // namespace corrmax::io

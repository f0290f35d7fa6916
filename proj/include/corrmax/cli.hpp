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

#include "corrmax/io.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace corrmax::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitRuntime = 3;

/// Seed from --seed, else CORRMAX_SEED, else 0.
inline std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("CORRMAX_SEED")) {
        try {
            std::size_t used = 0;
            std::uint64_t s = std::stoull(env, &used);
            if (used == std::string(env).size()) return s;
        } catch (const std::exception&) {
        }
        throw ValidationError(ErrorKind::out_of_range, std::string("CORRMAX_SEED is not an integer: ") + env);
    }
    return 0;
}

inline std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ValidationError(ErrorKind::schema, "expected a comma-separated integer list, got \"" + s + "\"");
        }
    }
    return out;
}

namespace detail {

struct Printer {
    std::ostream& out;
    bool json;

    void doc(const nlohmann::json& j) const { out << j.dump(2) << '\n'; }
    void line(const std::string& key, double v) const { out << key << " = " << io::format_double(v) << '\n'; }
    void line(const std::string& key, const std::string& v) const { out << key << " = " << v << '\n'; }
    void line(const std::string& key, bool v) const { out << key << " = " << (v ? "true" : "false") << '\n'; }
};

inline std::vector<BoundReport> bounds_for(const DensityOperator& rho, const std::string& kind, int n) {
    std::vector<BoundReport> out;
    const bool all = kind == "all";
    const bool qubits = rho.d1() == 2 && rho.d2() == 2;
    if (kind == "two-qubit" || (all && qubits)) out.push_back(two_qubit_max(rho));
    if (kind == "theorem" || all) out.push_back(theorem_bound(rho, n));
    if (kind == "cross-norm" || all) out.push_back(cross_norm_bound(rho));
    if (kind == "orthogonal" || all) out.push_back(orthogonal_bound(rho));
    if (kind == "covariance" || (all && qubits))
        out.push_back(BoundReport{BoundKind::covariance, covariance_bound(rho), {}});
    if (out.empty()) throw ValidationError(ErrorKind::out_of_range, "unknown bound kind \"" + kind + "\"");
    return out;
}

/// Trine POMs on the Bell state with their certification.
struct TrineDemoResult {
    double value;
    ExtremalityReport extremality;
    DiscriminationReport discrimination;
    SecondOrderReport second_order;
};

inline TrineDemoResult trine_demo() {
    DensityOperator bell = named_state(named::TrineDemo{});
    MaximalPOM t = trine_pom();
    FramePair f = frames_from_poms(t, t, 3);
    TrineDemoResult r{coincidence_rate(bell, t, t), extremality_residual(bell, t, t), discrimination_check(bell, t, t),
                      second_order_classify(bell, f)};
    return r;
}

inline std::vector<double> grid(double lo, double hi, int points) {
    std::vector<double> out;
    for (int k = 0; k < points; ++k) out.push_back(points == 1 ? lo : lo + (hi - lo) * k / (points - 1));
    return out;
}

struct WernerRow {
    double x;
    double exact;
    double optimized;
    double theorem;
};

inline WernerRow werner_row(int d, double x, std::uint64_t seed) {
    DensityOperator rho = named_state(named::Werner{d, x});
    OptimizerOptions opt;
    opt.seed = seed;
    opt.restarts = 4;
    opt.certify = false;
    opt.initial_frames.push_back(FramePair{CMatrix::Identity(d, d), CMatrix::Identity(d, d)});
    return WernerRow{x, werner_exact(d, x), optimize_coincidence(rho, d, opt).value, theorem_bound(rho, d).value};
}

} // namespace detail

/// Parse argv and run one subcommand. Returns the process exit code.
inline int dispatch(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Maximal coincidence rates of bipartite quantum states", "corrmax"};
    app.require_subcommand(1);
    bool as_json = false;
    app.add_flag("--json", as_json, "machine-readable output")->configurable(false);

    // solve
    auto* solve = app.add_subcommand("solve", "maximise the coincidence rate over orthogonal POM pairs");
    std::string state_path, a_path, b_path, out_a, out_b;
    int n = 0, restarts = 16, max_iters = 5000;
    double tol = 1e-10;
    std::optional<std::uint64_t> seed;
    solve->add_option("--state", state_path, "state file")->required();
    solve->add_option("--n", n, "outcomes per measurement (default d)");
    solve->add_option("--restarts", restarts, "random restarts");
    solve->add_option("--seed", seed, "random seed");
    solve->add_option("--tol", tol, "gradient-norm tolerance");
    solve->add_option("--max-iters", max_iters, "iterations per start");
    solve->add_option("--out-a", out_a, "write the first POM here");
    solve->add_option("--out-b", out_b, "write the second POM here");

    // bound
    auto* bound = app.add_subcommand("bound", "evaluate upper bounds and closed forms");
    std::string kind = "all", sweep, bound_csv;
    int sweep_d = 3, points = 11;
    auto* bound_state = bound->add_option("--state", state_path, "state file");
    auto* bound_sweep = bound->add_option("--sweep", sweep, "isotropic | werner: sweep w or x instead of a state file");
    bound_state->excludes(bound_sweep);
    bound->add_option("--kind", kind, "two-qubit | theorem | cross-norm | orthogonal | covariance | all");
    bound->add_option("--n", n, "outcome count for the theorem bound (default d)");
    bound->add_option("--d", sweep_d, "Werner dimension for --sweep werner");
    bound->add_option("--points", points, "grid points for --sweep");
    bound->add_option("--csv", bound_csv, "write the sweep to this CSV file");

    // check
    auto* check = app.add_subcommand("check", "certify a (state, POM, POM) triple");
    check->add_option("--state", state_path, "state file")->required();
    check->add_option("--a", a_path, "first POM file")->required();
    check->add_option("--b", b_path, "second POM file")->required();

    // scan
    auto* scan = app.add_subcommand("scan", "seeded comparison of C^(n) across n");
    std::string dims_s = "2,2", ns_s, scan_out;
    int count = 1200, rank = 0, threads = 1;
    bool resume = false;
    scan->add_option("--dims", dims_s, "d1,d2");
    scan->add_option("--count", count, "number of states");
    scan->add_option("--ns", ns_s, "outcome counts to compare (default d,d+1)");
    scan->add_option("--seed", seed, "master seed");
    scan->add_option("--out", scan_out, "JSONL record file")->required();
    scan->add_flag("--resume", resume, "skip indices already recorded");
    scan->add_option("--rank", rank, "state rank, 0 for full rank");
    scan->add_option("--restarts", restarts, "random restarts per optimisation");
    scan->add_option("--threads", threads, "worker threads");
    scan->add_option("--max-iters", max_iters, "iterations per start");
    scan->add_option("--tol", tol, "gradient-norm tolerance");

    // summarize is part of scan's workflow
    auto* summary = app.add_subcommand("summarize", "recompute the summary of a scan record file");
    std::string summary_path;
    summary->add_option("file", summary_path, "JSONL record file")->required();

    // demo
    auto* demo = app.add_subcommand("demo", "worked examples: trine, mirror, isotropic, werner");
    std::string demo_name, csv_path;
    demo->add_option("name", demo_name, "trine | mirror | isotropic | werner")->required();
    demo->add_option("--csv", csv_path, "write the series as CSV to this file");
    demo->add_option("--seed", seed, "random seed");

    // convert
    auto* convert = app.add_subcommand("convert", "rewrite a state or POM file in canonical matrix form");
    std::string in_path, out_path;
    convert->add_option("input", in_path, "input file")->required();
    convert->add_option("output", out_path, "output file")->required();

    for (auto* sub : {solve, bound, check, scan, summary, demo, convert})
        sub->add_flag("--json", as_json, "machine-readable output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }

    detail::Printer p{out, as_json};
    try {
        if (solve->parsed()) {
            DensityOperator rho = io::read_state(state_path);
            OptimizerOptions opt;
            opt.restarts = restarts;
            opt.seed = resolve_seed(seed);
            opt.tol = tol;
            opt.max_iters = max_iters;
            OptimizationResult r = optimize_coincidence(rho, n > 0 ? n : rho.dims().max(), opt);
            if (!out_a.empty()) io::write_text_file(out_a, io::pom_to_json(r.pom_a()).dump(2) + "\n");
            if (!out_b.empty()) io::write_text_file(out_b, io::pom_to_json(r.pom_b()).dump(2) + "\n");
            if (p.json) {
                p.doc(io::to_json(r));
            } else {
                p.line("n", double(r.n));
                p.line("C", r.value);
                p.line("gradient_norm", r.gradient_norm);
                p.line("residual", r.residual);
                p.line("converged", r.converged);
                p.line("classification", std::string(to_string(r.classification)));
                p.line("vwcon_first", r.vwcon_first);
                p.line("vwcon_second", r.vwcon_second);
                p.line("corollary", r.corollary);
                p.line("trace_V", r.multipliers.trace_v);
                p.line("trace_W", r.multipliers.trace_w);
            }
        } else if (bound->parsed() && !sweep.empty()) {
            if (points < 2) throw ValidationError(ErrorKind::out_of_range, "--points must be at least 2");
            if (kind == "all") kind = sweep == "isotropic" ? "two-qubit" : "cross-norm";
            std::vector<std::pair<double, double>> series;
            if (sweep == "isotropic") {
                for (double w : detail::grid(0.0, 1.0, points)) {
                    DensityOperator rho = named_state(named::Isotropic{w});
                    series.emplace_back(w, detail::bounds_for(rho, kind, n > 0 ? n : 2).front().value);
                }
            } else if (sweep == "werner") {
                for (double x : detail::grid(-1.0, 1.0, points)) {
                    DensityOperator rho = named_state(named::Werner{sweep_d, x});
                    series.emplace_back(x, detail::bounds_for(rho, kind, n > 0 ? n : sweep_d).front().value);
                }
            } else {
                throw ValidationError(ErrorKind::out_of_range, "unknown sweep \"" + sweep + "\"");
            }
            if (!bound_csv.empty()) io::emit_csv(series, bound_csv);
            if (p.json) {
                nlohmann::json rows = nlohmann::json::array();
                for (const auto& [x, v] : series) rows.push_back({x, v});
                p.doc({{"sweep", sweep}, {"kind", kind}, {"series", rows}});
            } else {
                io::write_csv(series, out);
            }
        } else if (bound->parsed()) {
            if (state_path.empty()) throw ValidationError(ErrorKind::schema, "bound needs --state or --sweep");
            DensityOperator rho = io::read_state(state_path);
            auto reports = detail::bounds_for(rho, kind, n > 0 ? n : rho.dims().max());
            if (p.json) {
                nlohmann::json a = nlohmann::json::array();
                for (const auto& r : reports) a.push_back(io::to_json(r));
                p.doc(a);
            } else {
                for (const auto& r : reports) p.line(to_string(r.kind), r.value);
            }
        } else if (check->parsed()) {
            DensityOperator rho = io::read_state(state_path);
            MaximalPOM a = io::read_pom(a_path), b = io::read_pom(b_path);
            ExtremalityReport ex = extremality_residual(rho, a, b);
            DiscriminationReport dr = discrimination_check(rho, a, b);
            std::optional<SecondOrderReport> so;
            if (ex.residual <= default_tolerances().extremal && a.outcomes() <= 6)
                so = second_order_classify(rho, frames_from_poms(a, b, a.outcomes()));
            if (p.json) {
                nlohmann::json j{{"C", ex.coincidence},
                                 {"residual", ex.residual},
                                 {"multipliers", io::to_json(ex.multipliers)},
                                 {"discrimination", io::to_json(dr)}};
                j["second_order"] = so ? io::to_json(*so) : nlohmann::json(nullptr);
                p.doc(j);
            } else {
                p.line("C", ex.coincidence);
                p.line("residual", ex.residual);
                p.line("trace_V", ex.multipliers.trace_v);
                p.line("trace_W", ex.multipliers.trace_w);
                p.line("vwcon_first", dr.first_side);
                p.line("vwcon_second", dr.second_side);
                p.line("classification", so ? std::string(to_string(so->classification)) : std::string("not extremal"));
                if (so) {
                    p.line("hessian_min", so->min_eigenvalue);
                    p.line("hessian_max", so->max_eigenvalue);
                }
            }
        } else if (scan->parsed()) {
            ScanConfig cfg;
            auto dims = parse_int_list(dims_s);
            if (dims.size() != 2) throw ValidationError(ErrorKind::schema, "--dims must be d1,d2");
            cfg.dims = Dims{dims[0], dims[1]};
            if (!ns_s.empty()) cfg.ns = parse_int_list(ns_s);
            cfg.count = count;
            cfg.rank = rank;
            cfg.seed = resolve_seed(seed);
            cfg.output = scan_out;
            cfg.resume = resume;
            cfg.threads = threads;
            cfg.restarts = restarts;
            cfg.max_iters = max_iters;
            cfg.tol = tol;
            ScanSummary s = run_scan(cfg);
            if (p.json) {
                p.doc(io::to_json(s));
            } else {
                out << "method = multi-start variational optimisation per state\n";
                p.line("count", double(s.count));
                p.line("converged", double(s.converged));
                p.line("unconverged", double(s.unconverged));
                p.line("max_gap", s.max_gap);
                p.line("mean_gap", s.mean_gap);
                p.line("violations", double(s.violations));
                p.line("config_hash", s.config_hash);
            }
        } else if (summary->parsed()) {
            ScanSummary s = summarize(summary_path);
            for (const auto& w : s.warnings) err << "warning: " << w << '\n';
            if (p.json) {
                p.doc(io::to_json(s));
            } else {
                p.line("count", double(s.count));
                p.line("converged", double(s.converged));
                p.line("max_gap", s.max_gap);
                p.line("mean_gap", s.mean_gap);
                p.line("violations", double(s.violations));
            }
        } else if (demo->parsed()) {
            std::vector<std::pair<double, double>> series;
            if (demo_name == "trine") {
                auto r = detail::trine_demo();
                if (p.json) {
                    p.doc({{"C", r.value},
                           {"residual", r.extremality.residual},
                           {"vwcon", {r.discrimination.first_side, r.discrimination.second_side}},
                           {"second_order", io::to_json(r.second_order)},
                           {"multipliers", io::to_json(r.extremality.multipliers)}});
                } else {
                    p.line("C", r.value);
                    p.line("residual", r.extremality.residual);
                    p.line("vwcon_first", r.discrimination.first_side);
                    p.line("vwcon_second", r.discrimination.second_side);
                    p.line("classification", std::string(to_string(r.second_order.classification)));
                    p.line("hessian_min", r.second_order.min_eigenvalue);
                    p.line("hessian_max", r.second_order.max_eigenvalue);
                }
                return kExitOk;
            } else if (demo_name == "mirror") {
                series = mirror_family_curve(detail::grid(0.0, 1.0, 101));
            } else if (demo_name == "isotropic") {
                for (double w : detail::grid(0.0, 1.0, 11))
                    series.emplace_back(w, two_qubit_max(named_state(named::Isotropic{w})).value);
            } else if (demo_name == "werner") {
                std::uint64_t s = resolve_seed(seed);
                nlohmann::json rows = nlohmann::json::array();
                std::ostringstream text;
                text << "x,exact,optimized,theorem\n";
                for (double x : {-1.0, -0.5, 0.0, 1.0 / 3.0, 0.4, 0.7, 1.0}) {
                    auto r = detail::werner_row(3, x, s);
                    rows.push_back({{"x", r.x}, {"exact", r.exact}, {"optimized", r.optimized}, {"theorem", r.theorem}});
                    text << io::format_double(r.x) << ',' << io::format_double(r.exact) << ','
                         << io::format_double(r.optimized) << ',' << io::format_double(r.theorem) << '\n';
                    series.emplace_back(r.x, r.exact);
                }
                if (!csv_path.empty()) io::emit_csv(series, csv_path);
                if (p.json) p.doc({{"d", 3}, {"rows", rows}});
                else out << text.str();
                return kExitOk;
            } else {
                throw ValidationError(ErrorKind::out_of_range, "unknown demo \"" + demo_name + "\"");
            }
            if (!csv_path.empty()) io::emit_csv(series, csv_path);
            if (p.json) {
                nlohmann::json rows = nlohmann::json::array();
                for (const auto& [x, v] : series) rows.push_back({x, v});
                p.doc({{"demo", demo_name}, {"series", rows}});
            } else {
                io::write_csv(series, out);
            }
        } else if (convert->parsed()) {
            nlohmann::json doc = io::canonical(io::read_json_file(in_path));
            io::write_text_file(out_path, doc.dump(2) + "\n");
            if (p.json) p.doc({{"written", out_path}});
        }
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "runtime error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

} // namespace corrmax::cli

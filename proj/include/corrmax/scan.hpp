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

#include "corrmax/optimizer.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

/// Seeded, resumable Monte-Carlo comparison of C^(n) across several n.
///
/// Output is JSONL: a header line {"schema":1,...} followed by one record
/// per state, written in index order and flushed after each record.
namespace corrmax {

inline constexpr int kScanSchema = 1;

struct ScanConfig {
    Dims dims{2, 2};
    int rank = 0; // 0 means full rank
    int count = 1;
    std::vector<int> ns; // empty means {d, d + 1}
    int restarts = 16;
    int max_iters = 5000;
    double tol = 1e-10;
    std::uint64_t seed = 0;
    std::string output;
    bool resume = false;
    int threads = 1;
    double gap_threshold = 1e-5;
    double converged_residual = 1e-7;
    int rerun_factor = 10;

    std::vector<int> resolved_ns() const {
        std::vector<int> out = ns;
        if (out.empty()) out = {dims.max(), dims.max() + 1};
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    int resolved_rank() const { return rank == 0 ? dims.total() : rank; }

    void validate() const {
        if (dims.d1 < 2 || dims.d2 < 2)
            throw ValidationError(ErrorKind::out_of_range, "scan dimensions must be at least 2");
        if (count < 1) throw ValidationError(ErrorKind::out_of_range, "state count must be at least 1");
        if (rank < 0 || rank > dims.total())
            throw ValidationError(ErrorKind::out_of_range, "rank must lie in [0, " + std::to_string(dims.total()) + "]");
        for (int n : resolved_ns())
            if (n < dims.max())
                throw ValidationError(ErrorKind::out_of_range,
                                      "n = " + std::to_string(n) + " is below d = " + std::to_string(dims.max()));
        if (restarts < 0 || max_iters < 1 || !(tol > 0.0))
            throw ValidationError(ErrorKind::out_of_range, "invalid optimizer options");
        if (threads < 1) throw ValidationError(ErrorKind::out_of_range, "threads must be at least 1");
        if (rerun_factor < 1) throw ValidationError(ErrorKind::out_of_range, "rerun factor must be at least 1");
    }

    /// Everything that determines record contents. Count, output path,
    /// resume flag and thread count are left out so a scan can be extended.
    nlohmann::json canonical() const {
        return nlohmann::json{{"dims", {dims.d1, dims.d2}},
                              {"rank", resolved_rank()},
                              {"ns", resolved_ns()},
                              {"restarts", restarts},
                              {"max_iters", max_iters},
                              {"tol", tol},
                              {"seed", seed},
                              {"gap_threshold", gap_threshold},
                              {"converged_residual", converged_residual},
                              {"rerun_factor", rerun_factor}};
    }

    std::string hash() const {
        std::uint64_t h = 14695981039346656037ULL;
        for (unsigned char c : canonical().dump()) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        std::ostringstream os;
        os << std::hex;
        os.width(16);
        os.fill('0');
        os << h;
        return os.str();
    }
};

struct ScanResult {
    int n = 0;
    double value = 0.0;
    double residual = 0.0;
    double gradient_norm = 0.0;
    bool converged = false;
    std::string classification;
    bool vwcon_first = false;
    bool vwcon_second = false;

    bool operator==(const ScanResult&) const = default;
};

struct ScanRecord {
    int index = 0;
    std::uint64_t seed = 0;
    std::vector<ScanResult> results;
    double gap = 0.0;
    bool gap_valid = false; // every per-n result converged
    bool rerun = false;
    double wall_time = 0.0;

    bool same_content(const ScanRecord& o) const {
        return index == o.index && seed == o.seed && results == o.results && gap == o.gap &&
               gap_valid == o.gap_valid && rerun == o.rerun;
    }
};

struct ScanSummary {
    int count = 0;
    int converged = 0;
    int unconverged = 0;
    double max_gap = 0.0;
    double mean_gap = 0.0;
    int violations = 0;       // converged records with gap > threshold
    int chain_violations = 0; // converged records with gap < -1e-7
    int vwcon_both = 0;       // per-n results satisfying both discrimination conditions
    int results = 0;          // per-n results counted in vwcon_both
    double threshold = 1e-5;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::vector<std::string> warnings;

    bool operator==(const ScanSummary&) const = default;
};

// ---------------------------------------------------------------------------
// Record (de)serialisation

inline nlohmann::json to_json(const ScanRecord& r) {
    nlohmann::json results = nlohmann::json::array();
    for (const auto& x : r.results)
        results.push_back({{"n", x.n},
                           {"value", x.value},
                           {"residual", x.residual},
                           {"gradient_norm", x.gradient_norm},
                           {"converged", x.converged},
                           {"classification", x.classification},
                           {"vwcon", {x.vwcon_first, x.vwcon_second}}});
    return nlohmann::json{{"index", r.index}, {"seed", r.seed},   {"results", results},
                          {"gap", r.gap},     {"gap_valid", r.gap_valid}, {"rerun", r.rerun},
                          {"wall_time", r.wall_time}};
}

inline ScanRecord record_from_json(const nlohmann::json& j) {
    ScanRecord r;
    r.index = j.at("index").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& x : j.at("results")) {
        ScanResult s;
        s.n = x.at("n").get<int>();
        s.value = x.at("value").get<double>();
        s.residual = x.at("residual").get<double>();
        s.gradient_norm = x.at("gradient_norm").get<double>();
        s.converged = x.at("converged").get<bool>();
        s.classification = x.at("classification").get<std::string>();
        s.vwcon_first = x.at("vwcon").at(0).get<bool>();
        s.vwcon_second = x.at("vwcon").at(1).get<bool>();
        r.results.push_back(std::move(s));
    }
    r.gap = j.at("gap").get<double>();
    r.gap_valid = j.at("gap_valid").get<bool>();
    r.rerun = j.at("rerun").get<bool>();
    r.wall_time = j.at("wall_time").get<double>();
    return r;
}

inline std::string header_line(const ScanConfig& cfg) {
    return nlohmann::json{{"schema", kScanSchema},
                          {"config_hash", cfg.hash()},
                          {"seed", cfg.seed},
                          {"config", cfg.canonical()}}
        .dump();
}

// ---------------------------------------------------------------------------
// Summaries

/// Pure reduction over records; input order is irrelevant.
inline ScanSummary summarize_records(std::vector<ScanRecord> records, double threshold, std::uint64_t seed,
                                     std::string hash) {
    std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
    ScanSummary s;
    s.threshold = threshold;
    s.seed = seed;
    s.config_hash = std::move(hash);
    s.count = static_cast<int>(records.size());
    double sum = 0.0;
    bool first = true;
    for (const auto& r : records) {
        for (const auto& x : r.results) {
            ++s.results;
            if (x.vwcon_first && x.vwcon_second) ++s.vwcon_both;
        }
        if (!r.gap_valid) {
            ++s.unconverged;
            continue;
        }
        ++s.converged;
        sum += r.gap;
        s.max_gap = first ? r.gap : std::max(s.max_gap, r.gap);
        first = false;
        if (r.gap > threshold) ++s.violations;
        if (r.gap < -1e-7) ++s.chain_violations;
    }
    s.mean_gap = s.converged > 0 ? sum / s.converged : 0.0;
    return s;
}

struct ParsedScanFile {
    bool has_header = false;
    std::string config_hash;
    std::uint64_t seed = 0;
    double threshold = 1e-5;
    std::vector<ScanRecord> records;
    std::vector<std::string> warnings;
};

inline ParsedScanFile parse_scan_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(ErrorKind::io, "cannot read " + path);
    ParsedScanFile out;
    std::set<int> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            nlohmann::json j = nlohmann::json::parse(line);
            if (j.contains("schema")) {
                if (j.at("schema").get<int>() != kScanSchema)
                    throw ValidationError(ErrorKind::schema, "unsupported scan schema");
                out.has_header = true;
                out.config_hash = j.at("config_hash").get<std::string>();
                out.seed = j.at("seed").get<std::uint64_t>();
                if (j.contains("config") && j["config"].contains("gap_threshold"))
                    out.threshold = j["config"]["gap_threshold"].get<double>();
                continue;
            }
            ScanRecord r = record_from_json(j);
            if (!seen.insert(r.index).second) {
                out.warnings.push_back("line " + std::to_string(lineno) + ": duplicate index " +
                                       std::to_string(r.index) + " ignored");
                continue;
            }
            out.records.push_back(std::move(r));
        } catch (const ValidationError&) {
            throw;
        } catch (const std::exception& e) {
            out.warnings.push_back("line " + std::to_string(lineno) + ": corrupt record (" + e.what() + ")");
        }
    }
    return out;
}

/// Recompute the summary of a record file. Corrupt lines become warnings.
inline ScanSummary summarize(const std::string& path) {
    ParsedScanFile f = parse_scan_file(path);
    ScanSummary s = summarize_records(std::move(f.records), f.threshold, f.seed, f.config_hash);
    s.warnings = std::move(f.warnings);
    return s;
}

// ---------------------------------------------------------------------------
// Running a scan

inline DensityOperator scan_state(const ScanConfig& cfg, std::uint64_t state_seed) {
    return random_density(cfg.dims.d1, cfg.dims.d2, cfg.resolved_rank(), state_seed);
}

inline ScanResult scan_result(const OptimizationResult& r, double converged_residual) {
    ScanResult s;
    s.n = r.n;
    s.value = r.value;
    s.residual = r.residual;
    s.gradient_norm = r.gradient_norm;
    s.converged = r.residual <= converged_residual;
    s.classification = to_string(r.classification);
    s.vwcon_first = r.vwcon_first;
    s.vwcon_second = r.vwcon_second;
    return s;
}

inline void fill_gap(ScanRecord& rec) {
    rec.gap_valid = std::all_of(rec.results.begin(), rec.results.end(), [](const auto& x) { return x.converged; });
    double base = rec.results.front().value;
    double top = base;
    for (const auto& x : rec.results) top = std::max(top, x.value);
    rec.gap = top - base;
}

/// Process one state. Deterministic given the config and index.
inline ScanRecord scan_one(const ScanConfig& cfg, int index) {
    auto t0 = std::chrono::steady_clock::now();
    ScanRecord rec;
    rec.index = index;
    rec.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(index));
    DensityOperator rho = scan_state(cfg, rec.seed);
    const std::vector<int> ns = cfg.resolved_ns();

    auto run = [&](int n, int restarts) {
        OptimizerOptions opt;
        opt.restarts = restarts;
        opt.seed = derive_seed(rec.seed, static_cast<std::uint64_t>(n));
        opt.max_iters = cfg.max_iters;
        opt.tol = cfg.tol;
        return optimize_coincidence(rho, n, opt);
    };

    std::vector<OptimizationResult> best;
    for (int n : ns) best.push_back(run(n, cfg.restarts));
    auto collect = [&] {
        rec.results.clear();
        for (const auto& r : best) rec.results.push_back(scan_result(r, cfg.converged_residual));
        fill_gap(rec);
    };
    collect();
    if (rec.gap > cfg.gap_threshold) {
        rec.rerun = true;
        for (std::size_t k = 0; k < ns.size(); ++k) {
            OptimizationResult again = run(ns[k], cfg.restarts * cfg.rerun_factor);
            if (again.value > best[k].value) best[k] = std::move(again);
        }
        collect();
    }
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

/// Run (or resume) a scan, appending records to cfg.output.
inline ScanSummary run_scan(const ScanConfig& cfg) {
    cfg.validate();
    if (cfg.output.empty()) throw ValidationError(ErrorKind::io, "scan needs an output path");

    std::vector<ScanRecord> records;
    bool need_header = true;
    if (cfg.resume) {
        std::ifstream probe(cfg.output);
        if (probe) {
            probe.close();
            // drop a partial trailing line left by an interrupted write
            std::string text;
            {
                std::ifstream in(cfg.output, std::ios::binary);
                std::ostringstream ss;
                ss << in.rdbuf();
                text = ss.str();
            }
            if (!text.empty() && text.back() != '\n') {
                text.erase(text.find_last_of('\n') == std::string::npos ? 0 : text.find_last_of('\n') + 1);
                std::ofstream out(cfg.output, std::ios::binary | std::ios::trunc);
                out << text;
            }
            ParsedScanFile f = parse_scan_file(cfg.output);
            if (f.has_header) {
                if (f.config_hash != cfg.hash())
                    throw ValidationError(ErrorKind::schema, "config hash " + cfg.hash() +
                                                                 " does not match record file hash " + f.config_hash);
                need_header = false;
            } else if (!f.records.empty()) {
                throw ValidationError(ErrorKind::schema, "record file has no header line");
            }
            records = std::move(f.records);
        }
    }

    std::ofstream out(cfg.output, cfg.resume ? std::ios::app : std::ios::trunc);
    if (!out) throw ValidationError(ErrorKind::io, "cannot write " + cfg.output);
    if (need_header) out << header_line(cfg) << '\n' << std::flush;

    std::set<int> done;
    for (const auto& r : records) done.insert(r.index);
    std::vector<int> todo;
    for (int i = 0; i < cfg.count; ++i)
        if (!done.count(i)) todo.push_back(i);

    auto write = [&](const ScanRecord& r) {
        out << to_json(r).dump() << '\n' << std::flush;
        if (!out) throw ValidationError(ErrorKind::io, "write failed on " + cfg.output);
        records.push_back(r);
    };

    const int workers = std::min<int>(cfg.threads, static_cast<int>(todo.size()));
    if (workers <= 1) {
        for (int i : todo) write(scan_one(cfg, i));
    } else {
        // workers claim positions in `todo`; the calling thread writes in order
        std::atomic<std::size_t> next{0};
        std::mutex mu;
        std::condition_variable cv;
        std::map<std::size_t, ScanRecord> ready;
        std::exception_ptr failure;
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    std::size_t k = next.fetch_add(1);
                    if (k >= todo.size()) return;
                    try {
                        ScanRecord r = scan_one(cfg, todo[k]);
                        std::lock_guard lock(mu);
                        ready.emplace(k, std::move(r));
                    } catch (...) {
                        std::lock_guard lock(mu);
                        if (!failure) failure = std::current_exception();
                        next.store(todo.size());
                    }
                    cv.notify_all();
                }
            });
        for (std::size_t k = 0; k < todo.size(); ++k) {
            std::unique_lock lock(mu);
            cv.wait(lock, [&] { return ready.count(k) || failure; });
            if (failure) break;
            ScanRecord r = std::move(ready.at(k));
            ready.erase(k);
            lock.unlock();
            write(r);
        }
        pool.clear();
        if (failure) std::rethrow_exception(failure);
    }
    return summarize_records(std::move(records), cfg.gap_threshold, cfg.seed, cfg.hash());
}

} // namespace corrmax

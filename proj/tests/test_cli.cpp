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

#include "corrmax/cli.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace corrmax;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    args.insert(args.begin(), "corrmax");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out, err;
    int code = cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return std::string(CORRMAX_DATA_DIR) + "/" + name; }

std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

/// Value of "key = value" in plain output.
double field(const std::string& text, const std::string& key) {
    for (const auto& l : lines_of(text))
        if (l.rfind(key + " = ", 0) == 0) return std::stod(l.substr(key.size() + 3));
    ADD_FAILURE() << "missing " << key;
    return 0.0;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("corrmax_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        unsetenv("CORRMAX_SEED");
    }
    void TearDown() override {
        fs::remove_all(dir_);
        unsetenv("CORRMAX_SEED");
    }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }
    fs::path dir_;
};

} // namespace

TEST_F(CliTest, DemoTrine) {
    Outcome r = run({"demo", "trine"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(field(r.out, "C"), 2.0 / 3.0, 1e-12);
    EXPECT_LT(field(r.out, "residual"), 1e-10);
    EXPECT_NE(r.out.find("classification = saddle"), std::string::npos);
    EXPECT_NE(r.out.find("vwcon_first = true"), std::string::npos);
    EXPECT_NE(r.out.find("vwcon_second = true"), std::string::npos);

    Outcome j = run({"demo", "trine", "--json"});
    ASSERT_EQ(j.code, 0);
    auto doc = nlohmann::json::parse(j.out);
    EXPECT_EQ(doc["second_order"]["classification"], "saddle");
    EXPECT_NEAR(doc["C"].get<double>(), 2.0 / 3.0, 1e-12);
}

TEST_F(CliTest, DemoMirrorCsv) {
    Outcome r = run({"demo", "mirror", "--csv", path("mirror.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    auto rows = lines_of(slurp(path("mirror.csv")));
    ASSERT_EQ(rows.size(), 102u);
    EXPECT_EQ(rows[0], "x,value");
    for (std::size_t k = 1; k < rows.size(); ++k) {
        auto comma = rows[k].find(',');
        double a = std::stod(rows[k].substr(0, comma)), c = std::stod(rows[k].substr(comma + 1));
        EXPECT_NEAR(a, (k - 1) / 100.0, 1e-15);
        EXPECT_NEAR(c, 2.0 / 3.0 + 0.75 * (a - 1.0 / 3.0) * (a - 1.0 / 3.0), 1e-12);
    }
    EXPECT_EQ(lines_of(r.out), rows);
}

TEST_F(CliTest, DemoIsotropicMatchesLibrary) {
    Outcome r = run({"demo", "isotropic", "--json"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto doc = nlohmann::json::parse(r.out);
    ASSERT_EQ(doc["series"].size(), 11u);
    for (const auto& row : doc["series"]) {
        double w = row[0].get<double>(), c = row[1].get<double>();
        EXPECT_NEAR(c, 0.5 * (1.0 + std::abs(4 * w - 1) / 3.0), 1e-9);
        EXPECT_EQ(c, two_qubit_max(named_state(named::Isotropic{w})).value);
    }
}

TEST_F(CliTest, DemoWernerTable) {
    Outcome r = run({"demo", "werner", "--json"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto doc = nlohmann::json::parse(r.out);
    for (const auto& row : doc["rows"]) {
        double x = row["x"].get<double>();
        EXPECT_NEAR(row["exact"].get<double>(), werner_exact(3, x), 1e-12);
        if (x >= 0.4) {
            EXPECT_NEAR(row["optimized"].get<double>(), 1.0 / 3 + std::abs(x - 1.0 / 3) / 4, 1e-6);
        }
        EXPECT_GE(row["theorem"].get<double>(), row["optimized"].get<double>() - 1e-9);
    }
}

TEST_F(CliTest, BoundCrossNormOnBell) {
    Outcome r = run({"bound", "--state", data("bell.json"), "--kind", "cross-norm"});
    ASSERT_EQ(r.code, 0) << r.err;
    // trace norm of the realigned maximally entangled pair is d; the singlet is Werner x = -1
    EXPECT_NEAR(field(r.out, "cross-norm"), 2.0, 1e-12);
    EXPECT_NEAR(field(r.out, "cross-norm"), 0.5 + std::abs(-1.0 - 0.5), 1e-12);
    Outcome j = run({"bound", "--state", data("bell_ket.json"), "--kind", "cross-norm", "--json"});
    ASSERT_EQ(j.code, 0) << j.err;
    EXPECT_NEAR(nlohmann::json::parse(j.out)[0]["value"].get<double>(), 2.0, 1e-12);
}

TEST_F(CliTest, BoundAllMatchesLibrary) {
    Outcome r = run({"bound", "--state", data("werner3.json"), "--json"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto doc = nlohmann::json::parse(r.out);
    DensityOperator rho = named_state(named::Werner{3, 0.7});
    for (const auto& rep : doc) {
        if (rep["kind"] == "theorem") {
            EXPECT_EQ(rep["value"].get<double>(), theorem_bound(rho, 3).value);
        }
        if (rep["kind"] == "cross-norm") {
            EXPECT_EQ(rep["value"].get<double>(), cross_norm_bound(rho).value);
        }
    }
}

TEST_F(CliTest, BoundSweep) {
    Outcome r = run({"bound", "--sweep", "werner", "--d", "2", "--points", "5", "--csv", path("w.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    auto rows = lines_of(slurp(path("w.csv")));
    ASSERT_EQ(rows.size(), 6u);
    for (std::size_t k = 1; k < rows.size(); ++k) {
        auto comma = rows[k].find(',');
        double x = std::stod(rows[k].substr(0, comma)), v = std::stod(rows[k].substr(comma + 1));
        EXPECT_NEAR(v, 0.5 + std::abs(x - 0.5), 1e-9);
    }
    EXPECT_EQ(run({"bound", "--sweep", "nope"}).code, 2);
    EXPECT_EQ(run({"bound", "--sweep", "werner", "--state", data("bell.json")}).code, 2);
    EXPECT_EQ(run({"bound"}).code, 2);
}

TEST_F(CliTest, SolveWritesPoms) {
    Outcome r = run({"solve", "--state", data("isotropic.json"), "--restarts", "4", "--out-a", path("a.json"), "--out-b",
                 path("b.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(field(r.out, "C"), 0.5 * (1.0 + 2.2 / 3.0), 1e-8);
    Outcome c = run({"check", "--state", data("isotropic.json"), "--a", path("a.json"), "--b", path("b.json")});
    ASSERT_EQ(c.code, 0) << c.err;
    EXPECT_NEAR(field(c.out, "C"), field(r.out, "C"), 1e-12);
    EXPECT_LT(field(c.out, "residual"), 1e-8);
    EXPECT_NE(c.out.find("classification = local_max"), std::string::npos);
}

TEST_F(CliTest, CheckTrineAndNonExtremal) {
    Outcome t = run({"check", "--state", data("bell.json"), "--a", data("trine.json"), "--b", data("trine.json")});
    ASSERT_EQ(t.code, 0) << t.err;
    EXPECT_NE(t.out.find("classification = saddle"), std::string::npos);
    Outcome n = run({"check", "--state", data("bell.json"), "--a", data("spin_z.json"), "--b", data("spin_x.json")});
    ASSERT_EQ(n.code, 0) << n.err;
    EXPECT_NE(n.out.find("classification = not extremal"), std::string::npos);
    Outcome m = run({"check", "--state", data("werner3.json"), "--a", data("spin_z.json"), "--b", data("spin_z.json")});
    EXPECT_EQ(m.code, 2);
    EXPECT_EQ(lines_of(m.err).size(), 1u);
}

TEST_F(CliTest, ConvertIsByteStable) {
    ASSERT_EQ(run({"convert", data("werner3.json"), path("once.json")}).code, 0);
    ASSERT_EQ(run({"convert", path("once.json"), path("twice.json")}).code, 0);
    EXPECT_EQ(slurp(path("once.json")), slurp(path("twice.json")));
    ASSERT_EQ(run({"convert", data("trine.json"), path("t1.json")}).code, 0);
    ASSERT_EQ(run({"convert", path("t1.json"), path("t2.json")}).code, 0);
    EXPECT_EQ(slurp(path("t1.json")), slurp(path("t2.json")));
    DensityOperator back = io::read_state(path("once.json"));
    EXPECT_LT(max_abs(back.matrix() - named_state(named::Werner{3, 0.7}).matrix()), 1e-15);
}

TEST_F(CliTest, ScanAndSummarize) {
    Outcome s = run({"scan", "--count", "3", "--restarts", "2", "--seed", "5", "--out", path("s.jsonl"), "--json"});
    ASSERT_EQ(s.code, 0) << s.err;
    Outcome m = run({"summarize", path("s.jsonl"), "--json"});
    ASSERT_EQ(m.code, 0) << m.err;
    EXPECT_EQ(nlohmann::json::parse(s.out), nlohmann::json::parse(m.out));
    Outcome plain = run({"scan", "--count", "3", "--restarts", "2", "--seed", "5", "--out", path("p.jsonl")});
    EXPECT_NE(plain.out.find("method = multi-start variational optimisation"), std::string::npos);
    {
        std::ofstream(path("s.jsonl"), std::ios::app) << "garbage\n";
    }
    Outcome w = run({"summarize", path("s.jsonl")});
    EXPECT_EQ(w.code, 0);
    EXPECT_NE(w.err.find("warning: line 5"), std::string::npos);
}

TEST_F(CliTest, SeedFromEnvironment) {
    Outcome a = run({"scan", "--count", "2", "--restarts", "1", "--seed", "9", "--out", path("a.jsonl"), "--json"});
    setenv("CORRMAX_SEED", "9", 1);
    Outcome b = run({"scan", "--count", "2", "--restarts", "1", "--out", path("b.jsonl"), "--json"});
    ASSERT_EQ(a.code, 0);
    ASSERT_EQ(b.code, 0);
    EXPECT_EQ(nlohmann::json::parse(a.out)["config_hash"], nlohmann::json::parse(b.out)["config_hash"]);
    // the flag wins over the environment
    Outcome c = run({"scan", "--count", "2", "--restarts", "1", "--seed", "3", "--out", path("c.jsonl"), "--json"});
    EXPECT_EQ(nlohmann::json::parse(c.out)["seed"], 3);
    setenv("CORRMAX_SEED", "abc", 1);
    EXPECT_EQ(run({"scan", "--count", "1", "--out", path("d.jsonl")}).code, 2);
}

TEST_F(CliTest, ExitCodes) {
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({"demo", "trine", "--bogus"}).code, 2);
    EXPECT_EQ(run({"demo", "unknown"}).code, 2);
    EXPECT_EQ(run({"solve", "--state", path("missing.json")}).code, 2);
    {
        std::ofstream(path("bad.json")) << "{\"dims\": [2, 2], \"matrix\": [[1, 0], [0, 1]]}";
    }
    Outcome bad = run({"solve", "--state", path("bad.json")});
    EXPECT_EQ(bad.code, 2);
    EXPECT_EQ(lines_of(bad.err).size(), 1u);
    {
        std::ofstream(path("notjson.json")) << "{";
    }
    EXPECT_EQ(run({"bound", "--state", path("notjson.json")}).code, 2);
    EXPECT_EQ(run({"demo", "mirror", "--csv", path("no/such/dir/x.csv")}).code, 2);
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Csv, EmptySeriesWritesHeader) {
    std::string p = (fs::temp_directory_path() / "corrmax_empty.csv").string();
    io::emit_csv({}, p);
    EXPECT_EQ(slurp(p), "x,value\n");
    fs::remove(p);
}

TEST(Csv, RowOrderAndPrecision) {
    std::ostringstream os;
    io::write_csv({{0.5, 1.0 / 3.0}, {0.25, 2.0}}, os);
    auto rows = lines_of(os.str());
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[1].substr(0, 4), "0.5,");
    EXPECT_EQ(std::stod(rows[1].substr(4)), 1.0 / 3.0);
    EXPECT_EQ(rows[2], "0.25,2");
}

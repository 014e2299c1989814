// Copyright 2026 The kcbs-rng Authors
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

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "kcbs/pipeline.hpp"

using namespace kcbs;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
  protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("kcbs_cli_" + std::to_string(::getpid()) + "_" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    /// Runs the CLI inside the scratch directory; stdout and stderr land in
    /// out.txt and err.txt.
    int run(const std::string &args) {
        const std::string cmd = "cd '" + dir_.string() + "' && '" + std::string(KCBS_CLI_PATH) + "' " + args +
                                " > out.txt 2> err.txt";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    [[nodiscard]] fs::path at(const std::string &name) const { return dir_ / name; }
    [[nodiscard]] std::string slurp(const std::string &name) const { return io::read_file(at(name)); }
    void put(const std::string &name, const std::string &text) const { io::write_atomic(at(name), text); }

    fs::path dir_;
};

const char *kTableUniform = "i,j,p10,p01,p00\n"
                            "1,2,0.4256,0.4529,0.1215\n"
                            "2,3,0.4888,0.4260,0.0852\n"
                            "3,4,0.4160,0.4611,0.1221\n"
                            "4,5,0.4935,0.4186,0.0879\n"
                            "1,5,0.4159,0.4629,0.1212\n";

const char *kTableBiased = "i,j,p10,p01,p00\n"
                           "1,2,0.4166,0.4611,0.1223\n"
                           "2,3,0.4987,0.4086,0.0927\n"
                           "3,4,0.4346,0.4477,0.1177\n"
                           "4,5,0.4846,0.4235,0.0918\n"
                           "1,5,0.4414,0.4355,0.1230\n";

} // namespace

TEST_F(CliTest, HelpAndUsageErrors) {
    EXPECT_EQ(run("--help"), 0);
    EXPECT_EQ(run(""), kExitConfig);
    EXPECT_EQ(run("bogus"), kExitConfig);
    EXPECT_EQ(run("simulate --k notanumber"), kExitConfig);
}

TEST_F(CliTest, SimulateValidatesConfig) {
    EXPECT_EQ(run("simulate --k 0"), kExitConfig);
    EXPECT_NE(slurp("err.txt").find("k must be at least 1"), std::string::npos);
    EXPECT_EQ(run("simulate --device depolarized --visibility 1.5 --k 10"), kExitConfig);
    EXPECT_EQ(run("simulate --dist custom --k 10"), kExitConfig);
    EXPECT_FALSE(fs::exists(at("trials.csv")));
}

TEST_F(CliTest, SimulateAndCertifyRoundTrip) {
    ASSERT_EQ(run("simulate --device ideal --dist uniform --k 100000 --seed 1 --out ideal.csv"), 0);
    const auto log = io::read_trial_log(at("ideal.csv"));
    const auto mem = run_experiment(IdealQuantum{}, InputDistribution::uniform(), 100000, 1);
    EXPECT_EQ(log.records, mem.records);
    EXPECT_NEAR(violation_from_log(log), kQuantumBound, 0.02);

    ASSERT_EQ(run("certify ideal.csv --out cert.json"), 0);
    const auto j = io::read_json(at("cert.json"));
    EXPECT_NEAR(j["inputs"]["L_hat"].get<double>(), violation_from_log(mem), 1e-12);
    EXPECT_GT(j["entropy_bound_bits"].get<double>(), 3.2e4);
    EXPECT_LT(j["entropy_bound_bits"].get<double>(), 3.4e4);
    EXPECT_EQ(j["config"]["delta"], 0.001);
    EXPECT_TRUE(j.contains("no_disturbance"));
}

TEST_F(CliTest, NchvLogCertifiesNothing) {
    ASSERT_EQ(run("simulate --device nchv --k 100000 --out nchv.csv"), 0);
    EXPECT_LE(violation_from_log(io::read_trial_log(at("nchv.csv"))), 3.02);
    ASSERT_EQ(run("certify nchv.csv --out cert.json"), 0);
    const auto j = io::read_json(at("cert.json"));
    EXPECT_EQ(j["entropy_bound_bits"].get<double>(), 0.0);
    bool noted = false;
    for (const auto &n : j["notes"]) {
        noted = noted || n.get<std::string>().find("no violation") != std::string::npos;
    }
    EXPECT_TRUE(noted);
}

TEST_F(CliTest, MalformedCsvIsParseErrorWithLine) {
    put("bad.csv", "trial,i,j,a_i,a_j\n1,1,2,1,0\n2,1,2,1\n");
    put("bad.json", R"({"format_version":1,"k":2,"seed":1,"distribution":{"kind":"uniform"},"discarded_count":0})");
    EXPECT_EQ(run("certify bad.csv"), kExitParse);
    EXPECT_NE(slurp("err.txt").find("line 3"), std::string::npos);
    put("probs.csv", "i,j,p10,p01,p00\n1,2,0.5,0.5\n");
    EXPECT_EQ(run("certify --from-probs probs.csv"), kExitParse);
    EXPECT_NE(slurp("err.txt").find("line 2"), std::string::npos);
    EXPECT_EQ(run("certify missing.csv"), kExitParse);
}

TEST_F(CliTest, FromProbsReproducesTable) {
    put("uni.csv", kTableUniform);
    put("bia.csv", kTableBiased);
    ASSERT_EQ(run("certify --from-probs uni.csv --out u.json"), 0);
    EXPECT_NEAR(io::read_json(at("u.json"))["inputs"]["L_hat"].get<double>(), 3.9234, 1e-12);
    ASSERT_EQ(run("certify --from-probs bia.csv --dist biased --alpha 6 --k 100000 --out b.json"), 0);
    const auto b = io::read_json(at("b.json"));
    EXPECT_NEAR(b["inputs"]["L_hat"].get<double>(), 3.9048, 1e-12);
    EXPECT_EQ(b["inputs"]["distribution"]["kind"], "biased");
}

TEST_F(CliTest, FlagsOverrideConfigFile) {
    put("cfg.json", R"({"k": 500, "seed": 3, "device": "nchv"})");
    ASSERT_EQ(run("simulate --config cfg.json --k 700 --out t.csv"), 0);
    const auto side = io::read_json(at("t.json"));
    EXPECT_EQ(side["k"], 700);
    EXPECT_EQ(side["seed"], 3);
    EXPECT_EQ(io::read_trial_log(at("t.csv")).records,
              run_experiment(DeterministicNchv{}, InputDistribution::uniform(), 700, 3).records);

    put("unknown.json", R"({"kk": 5})");
    EXPECT_EQ(run("simulate --config unknown.json"), kExitConfig);
    put("broken.json", "{\n\"k\": 5,\n}");
    EXPECT_EQ(run("simulate --config broken.json"), kExitParse);
    put("typed.json", R"({"k": "many"})");
    EXPECT_EQ(run("simulate --config typed.json"), kExitConfig);
}

TEST_F(CliTest, CurveOutputsAndReproducibility) {
    ASSERT_EQ(run("curve --ns-only --grid 11 --out ns.tsv"), 0);
    const auto ns = io::parse_curve_tsv(slurp("ns.tsv"));
    EXPECT_TRUE(ns.f_q.empty());
    EXPECT_EQ(ns.L.size(), 11U);
    EXPECT_NEAR(ns.f_ns.back(), f_ns(kQuantumBound), 1e-9);

    ASSERT_EQ(run("curve --grid 6 --restarts 10 --seed 7 --out a.tsv"), 0);
    ASSERT_EQ(run("curve --grid 6 --restarts 10 --seed 7 --out b.tsv"), 0);
    EXPECT_EQ(slurp("a.tsv"), slurp("b.tsv"));
    const auto q = io::parse_curve_tsv(slurp("a.tsv"));
    ASSERT_EQ(q.f_q.size(), 6U);
    EXPECT_LE(q.f_q.front(), 1e-6);
    EXPECT_EQ(run("curve --grid 1"), kExitConfig);

    ASSERT_EQ(run("simulate --k 100000 --out t.csv"), 0);
    ASSERT_EQ(run("certify t.csv --curve file --curve-file a.tsv --out c.json"), 0);
    EXPECT_EQ(io::read_json(at("c.json"))["inputs"]["curve"], "quantum_reference");
    ASSERT_EQ(run("certify t.csv --curve file --curve-file a.tsv --curve-column f_ns --out d.json"), 0);
    EXPECT_EQ(io::read_json(at("d.json"))["inputs"]["curve"], "ns_lp");
}

TEST_F(CliTest, ExtractTestSmallAndPacked) {
    ASSERT_EQ(run("simulate --k 10 --out tiny.csv"), 0);
    ASSERT_EQ(run("extract-test tiny.csv --out-dir tb"), 0);
    const auto rep = io::read_json(at("tb/test_report.json"));
    EXPECT_EQ(rep["columns"].size(), 3U);
    EXPECT_TRUE(rep["rows"][1]["p_value"]["St"].is_null());
    EXPECT_NE(slurp("out.txt").find("insufficient data"), std::string::npos);

    ASSERT_EQ(run("simulate --k 20000 --out s.csv"), 0);
    ASSERT_EQ(run("extract-test s.csv --out-dir pb --packed"), 0);
    EXPECT_TRUE(slurp("pb/S1_ext.bits").starts_with("bits="));
    const auto bits = io::parse_bits(slurp("pb/St.bits"));
    EXPECT_EQ(bits.size(), 40000U);
    EXPECT_EQ(run("extract-test s.csv --theta 0"), kExitConfig);
}

TEST_F(CliTest, ThetaOnlyChangesVerdicts) {
    ASSERT_EQ(run("simulate --k 100000 --out s.csv"), 0);
    ASSERT_EQ(run("extract-test s.csv --out-dir a"), 0);
    ASSERT_EQ(run("extract-test s.csv --theta 0.01 --out-dir b"), 0);
    const auto a = io::read_json(at("a/test_report.json"));
    const auto b = io::read_json(at("b/test_report.json"));
    EXPECT_EQ(b["theta"], 0.01);
    for (std::size_t r = 0; r < 9; ++r) {
        EXPECT_EQ(a["rows"][r]["p_value"], b["rows"][r]["p_value"]);
        for (const auto &col : {"S1_ext", "S2_ext", "St"}) {
            const auto &p = b["rows"][r]["p_value"][col];
            if (!p.is_null()) {
                EXPECT_EQ(b["rows"][r]["pass"][col].get<bool>(), p.get<double>() >= 0.01);
            }
        }
    }
}

TEST_F(CliTest, PipelineDryRunAndReproducibility) {
    EXPECT_EQ(run("pipeline --dry-run --out-dir p0"), 0);
    EXPECT_FALSE(fs::exists(at("p0")));
    EXPECT_EQ(run("pipeline --dry-run --delta 2"), kExitConfig);
    EXPECT_EQ(run("pipeline --dry-run --thresholds 3.0 3.5 3.4 3.94427191"), kExitConfig);

    ASSERT_EQ(run("pipeline --k 20000 --seed 5 --out-dir p1"), 0);
    ASSERT_EQ(run("pipeline --k 20000 --seed 5 --out-dir p2"), 0);
    for (const auto &f : {"trials.csv", "trials.json", "test_report.json", "S1_ext.bits", "St.bits"}) {
        EXPECT_EQ(slurp(std::string("p1/") + f), slurp(std::string("p2/") + f)) << f;
    }
    auto c1 = io::read_json(at("p1/certification.json"));
    auto c2 = io::read_json(at("p2/certification.json"));
    EXPECT_EQ(c1["entropy_bound_bits"], c2["entropy_bound_bits"]);
    const auto s = io::read_json(at("p1/summary.json"));
    EXPECT_EQ(s["format_version"], 1);
    EXPECT_FALSE(s["net_positive"].get<bool>());
}

TEST(RunGuarded, MapsExceptionsToExitCodes) {
    std::ostringstream err;
    EXPECT_EQ(run_guarded([]() -> int { throw ParseError("x", 4); }, err), kExitParse);
    EXPECT_EQ(run_guarded([]() -> int { throw NumericalFailure("x"); }, err), kExitNumerical);
    EXPECT_EQ(run_guarded([]() -> int { throw LpInfeasible("x", "row"); }, err), kExitNumerical);
    EXPECT_EQ(run_guarded([]() -> int { throw InvalidParameter("x"); }, err), kExitConfig);
    EXPECT_EQ(run_guarded([]() -> int { throw OutOfRange("x"); }, err), kExitConfig);
    EXPECT_EQ(run_guarded([]() -> int { return 0; }, err), kExitOk);
    EXPECT_NE(err.str().find("line 4"), std::string::npos);
}

TEST(RunGuarded, InfeasibleCurveRequestIsNumerical) {
    std::ostringstream err;
    EXPECT_EQ(run_guarded([] { return static_cast<int>(lp_solve_ns(5.5, Context(1, 2), 0).value); }, err),
              kExitNumerical);
}

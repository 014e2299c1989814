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

#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "kcbs/device.hpp"
#include "kcbs/estimation.hpp"

using namespace kcbs;

TEST(Rng, DerivedSeedsDependOnLabels) {
    EXPECT_EQ(derive_seed(1, {stream::settings}), derive_seed(1, {stream::settings}));
    EXPECT_NE(derive_seed(1, {stream::settings}), derive_seed(1, {stream::device}));
    EXPECT_NE(derive_seed(1, {stream::replica, 0}), derive_seed(1, {stream::replica, 1}));
    EXPECT_NE(derive_seed(1, {}), derive_seed(2, {}));
    Rng a(5);
    Rng b(5);
    for (int i = 0; i < 100; ++i) {
        const double u = a.uniform();
        EXPECT_EQ(u, b.uniform());
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
}

TEST(InputDistribution, BiasedWeights) {
    const auto d = InputDistribution::biased(6.0, 100000);
    EXPECT_NEAR(d.weights()[0], 0.924105336155959, 1e-12);
    EXPECT_NEAR(d.min_weight(), 0.018973665961010275, 1e-15);
    for (std::size_t i = 1; i < 5; ++i) {
        EXPECT_EQ(d.weights()[i], d.min_weight());
    }
    EXPECT_NEAR(d.shannon_entropy_bits(), 0.53933528032901021, 1e-12);
    EXPECT_NEAR(d.min_entropy_bits(), 0.11387078514180817, 1e-12);
    EXPECT_THROW((void)InputDistribution::biased(6.0, 576), InvalidParameter);
    EXPECT_NO_THROW((void)InputDistribution::biased(6.0, 577));
    EXPECT_THROW((void)InputDistribution::biased(0.0, 100), InvalidParameter);
}

TEST(InputDistribution, UniformAndCustom) {
    const auto u = InputDistribution::uniform();
    EXPECT_NEAR(u.shannon_entropy_bits(), std::log2(5.0), 1e-15);
    EXPECT_NEAR(u.min_entropy_bits(), std::log2(5.0), 1e-15);
    EXPECT_THROW((void)InputDistribution::custom({0.5, 0.5, 0.1, 0.0, 0.0}), InvalidParameter);
    EXPECT_THROW((void)InputDistribution::custom({1.2, -0.2, 0.0, 0.0, 0.0}), InvalidParameter);
    const auto point = InputDistribution::custom({1.0, 0.0, 0.0, 0.0, 0.0});
    EXPECT_EQ(point.shannon_entropy_bits(), 0.0);
}

TEST(Device, RejectsZeroTrials) {
    EXPECT_THROW((void)run_experiment(IdealQuantum{}, InputDistribution::uniform(), 0, 1), InvalidParameter);
}

TEST(Device, ValidatesModels) {
    EXPECT_THROW((void)run_experiment(Depolarized{1.5}, InputDistribution::uniform(), 10, 1), InvalidParameter);
    EXPECT_THROW((void)run_experiment(LossyQuantum{0.0}, InputDistribution::uniform(), 10, 1), InvalidParameter);
}

TEST(Device, SameSeedSameLog) {
    const auto a = run_experiment(IdealQuantum{}, InputDistribution::uniform(), 5000, 42);
    const auto b = run_experiment(IdealQuantum{}, InputDistribution::uniform(), 5000, 42);
    EXPECT_EQ(a.records, b.records);
    const auto c = run_experiment(IdealQuantum{}, InputDistribution::uniform(), 5000, 43);
    EXPECT_NE(a.records, c.records);
}

TEST(Device, SettingsStreamIndependentOfDevice) {
    const auto q = run_experiment(IdealQuantum{}, InputDistribution::uniform(), 2000, 9);
    const auto n = run_experiment(DeterministicNchv{}, InputDistribution::uniform(), 2000, 9);
    for (std::size_t i = 0; i < q.records.size(); ++i) {
        ASSERT_EQ(q.records[i].context, n.records[i].context);
    }
}

TEST(Device, IdealNeverFiresBothDetectors) {
    const auto log = run_experiment(IdealQuantum{}, InputDistribution::uniform(), 20000, 3);
    for (const auto &r : log.records) {
        ASSERT_FALSE(r.outcome.a_i == 1 && r.outcome.a_j == 1);
    }
    EXPECT_EQ(log.records.front().index, 1U);
    EXPECT_EQ(log.records.back().index, 20000U);
}

TEST(Device, IdealViolationNearQuantumBound) {
    const auto log = run_experiment(IdealQuantum{}, InputDistribution::uniform(), 100000, 1);
    EXPECT_NEAR(violation_from_log(log), kQuantumBound, 0.02);
}

TEST(Device, TrueViolations) {
    EXPECT_NEAR(true_violation(IdealQuantum{}), kQuantumBound, 1e-12);
    EXPECT_NEAR(true_violation(LossyQuantum{0.3}), kQuantumBound, 1e-12);
    EXPECT_NEAR(true_violation(DeterministicNchv{}), 3.0, 0.0);
    EXPECT_NEAR(true_violation(Depolarized{0.5854101966249685}), 3.0, 1e-12);
    EXPECT_THROW((void)true_violation(DeterministicNchv{{1, 0, 0, 1, 0}, rotating_memory()}), InvalidParameter);
}

TEST(Device, LossyCountsDiscards) {
    const auto log = run_experiment(LossyQuantum{0.5}, InputDistribution::uniform(), 20000, 5);
    EXPECT_EQ(log.k(), 20000U);
    // geometric redraws: mean (1 - eta) / eta = 1 per retained trial
    EXPECT_NEAR(static_cast<double>(log.discarded_count) / 20000.0, 1.0, 0.05);
    const auto ideal = run_experiment(LossyQuantum{1.0}, InputDistribution::uniform(), 1000, 5);
    EXPECT_EQ(ideal.discarded_count, 0U);
}

TEST(Device, StrategyValues) {
    EXPECT_EQ(strategy_value({1, 0, 0, 1, 0}), 3);
    EXPECT_EQ(strategy_value({0, 0, 0, 0, 0}), -5);
    EXPECT_EQ(strategy_value({1, 1, 1, 1, 1}), -5);
}

TEST(Device, MemoryPoliciesNeverExceedClassicalBound) {
    const auto dist = InputDistribution::biased(6.0, 100000);
    for (auto policy : {rotating_memory(), adaptive_memory()}) {
        DeterministicNchv model{{1, 0, 0, 1, 0}, policy};
        const auto log = run_experiment(model, dist, 20000, 11);
        // every strategy it can switch to scores exactly 3
        std::uint64_t equal = 0;
        for (const auto &r : log.records) {
            equal += r.outcome.a_i == r.outcome.a_j ? 1 : 0;
        }
        EXPECT_GT(equal, 0U);
    }
}

TEST(Device, AdaptiveMemoryAvoidsBusiestContext) {
    Strategy s{1, 0, 0, 1, 0};
    auto policy = adaptive_memory();
    for (std::size_t busiest = 0; busiest < 5; ++busiest) {
        std::vector<TrialRecord> history;
        for (int n = 0; n < 3; ++n) {
            history.push_back({history.size() + 1, Context::from_index(busiest), {}});
        }
        history.push_back({history.size() + 1, Context::from_index((busiest + 1) % 5), {}});
        auto fresh = adaptive_memory();
        fresh(s, history);
        EXPECT_EQ(strategy_value(s), 3);
        const auto ctx = Context::from_index(busiest);
        EXPECT_NE(s[static_cast<std::size_t>(ctx.first() - 1)], s[static_cast<std::size_t>(ctx.second() - 1)]);
    }
    (void)policy;
}

TEST(Device, NchvEstimateNearThree) {
    const auto log = run_experiment(DeterministicNchv{}, InputDistribution::uniform(), 100000, 1);
    EXPECT_LE(violation_from_log(log), 3.02);
    // per-trial sd is 4, so 4 sigma at k = 1e5 is about 0.05
    EXPECT_GE(violation_from_log(log), 2.95);
}

TEST(Device, DepolarizedEstimateTracksVisibility) {
    const auto log = run_experiment(Depolarized{0.8}, InputDistribution::uniform(), 100000, 2);
    EXPECT_NEAR(violation_from_log(log), 0.8 * kQuantumBound + 0.2 * 5.0 / 3.0, 0.03);
}

TEST(Device, NoDisturbanceAudit) {
    const auto log = run_experiment(IdealQuantum{}, InputDistribution::uniform(), 100000, 4);
    for (const auto &a : no_disturbance_report(log)) {
        ASSERT_TRUE(a.discrepancy.has_value());
        EXPECT_LT(*a.discrepancy, 0.02);
        EXPECT_NEAR(*a.p_first, 1.0 / std::sqrt(5.0), 0.02);
    }
    TrialLog empty;
    for (const auto &a : no_disturbance_report(empty)) {
        EXPECT_FALSE(a.discrepancy.has_value());
    }
}

TEST(Device, SettingFrequenciesFollowDistribution) {
    const auto dist = InputDistribution::biased(6.0, 100000);
    const auto log = run_experiment(IdealQuantum{}, dist, 100000, 8);
    const auto t = counts_table(log);
    for (const auto &ctx : Context::all()) {
        const double p = dist.weight(ctx);
        const double sd = std::sqrt(p * (1 - p) / 1e5);
        EXPECT_NEAR(static_cast<double>(t.total(ctx)) / 1e5, p, 5 * sd);
    }
}

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

#include <gtest/gtest.h>

#include "kcbs/qutrit.hpp"

using namespace kcbs;

TEST(Qutrit, KcbsStateReachesQuantumBound) {
    EXPECT_NEAR(kcbs_value(kcbs_state(), kcbs_vectors()), 4.0 * std::sqrt(5.0) - 5.0, 1e-12);
    EXPECT_NEAR(kQuantumBound, 3.94427190999915878564, 1e-15);
}

TEST(Qutrit, PentagonOrthogonalityAndCommutation) {
    const auto v = kcbs_vectors();
    for (const auto &ctx : Context::all()) {
        const auto &a = v[static_cast<std::size_t>(ctx.first() - 1)];
        const auto &b = v[static_cast<std::size_t>(ctx.second() - 1)];
        EXPECT_LT(std::abs(a.inner(b)), 1e-12) << ctx.label();
        EXPECT_LT(commutation_residual(ctx.first(), ctx.second(), v), 1e-12) << ctx.label();
    }
    EXPECT_NO_THROW(require_pentagon_orthogonality(v));
    // non-neighbours do not commute
    EXPECT_GT(commutation_residual(1, 3, v), 0.1);
}

TEST(Qutrit, OverlapWithStateIsFifthRootScaled) {
    const auto v = kcbs_vectors();
    const auto s = Ket3::basis(0);
    for (const auto &k : v) {
        EXPECT_NEAR(std::norm(k.inner(s)), 1.0 / std::sqrt(5.0), 1e-12);
        EXPECT_NEAR(k.amplitudes().norm(), 1.0, 1e-15);
    }
}

TEST(Qutrit, FirstVectorsMatchReferenceComponents) {
    const auto v = kcbs_vectors();
    EXPECT_NEAR(v[0][0].real(), 0.668740304976422, 1e-12);
    EXPECT_NEAR(v[0][1].real(), -0.743496068920369, 1e-12);
    EXPECT_NEAR(v[0][2].real(), 0.0, 1e-15);
    EXPECT_NEAR(v[1][1].real(), 0.6015009550075457, 1e-12);
    EXPECT_NEAR(v[1][2].real(), -0.4370160244488211, 1e-12);
    EXPECT_NEAR(v[2][1].real(), -0.2297529205473612, 1e-12);
    EXPECT_NEAR(v[2][2].real(), 0.7071067811865475, 1e-12);
}

TEST(Qutrit, IdealJointDistributions) {
    const auto v = kcbs_vectors();
    for (const auto &ctx : Context::all()) {
        const auto d = joint_probs(kcbs_state(), ctx, v);
        EXPECT_NEAR(d.p11, 0.0, 1e-15);
        EXPECT_NEAR(d.p10, 1.0 / std::sqrt(5.0), 1e-12);
        EXPECT_NEAR(d.p01, 1.0 / std::sqrt(5.0), 1e-12);
        EXPECT_NEAR(d.p10 + d.p01 + d.p00 + d.p11, 1.0, 1e-12);
        EXPECT_NEAR(d.at(0, 0), d.p00, 0.0);
    }
}

TEST(Qutrit, MaximallyMixedStateGivesFiveThirds) {
    EXPECT_NEAR(kcbs_value(Density3::maximally_mixed(), kcbs_vectors()), 5.0 / 3.0, 1e-12);
}

TEST(Qutrit, DepolarizedValueIsLinearInVisibility) {
    for (double v : {0.0, 0.3, 0.5854101966249685, 0.9, 1.0}) {
        const double L = kcbs_value(depolarize(kcbs_state(), v), kcbs_vectors());
        EXPECT_NEAR(L, v * kQuantumBound + (1.0 - v) * 5.0 / 3.0, 1e-12);
    }
    EXPECT_NEAR(kcbs_value(depolarize(kcbs_state(), 0.5854101966249685), kcbs_vectors()), 3.0, 1e-12);
    EXPECT_THROW((void)depolarize(kcbs_state(), 1.1), InvalidParameter);
}

TEST(Qutrit, DensityValidation) {
    Mat3c m = Mat3c::Zero();
    m(0, 0) = 0.5;
    m(1, 1) = 0.5;
    EXPECT_NO_THROW((void)Density3::from_matrix(m));
    Mat3c bad_trace = m;
    bad_trace(2, 2) = 0.1;
    EXPECT_THROW((void)Density3::from_matrix(bad_trace), InvalidState);
    Mat3c non_herm = m;
    non_herm(0, 1) = 0.1;
    EXPECT_THROW((void)Density3::from_matrix(non_herm), InvalidState);
    Mat3c negative = Mat3c::Zero();
    negative(0, 0) = 1.2;
    negative(1, 1) = -0.2;
    EXPECT_THROW((void)Density3::from_matrix(negative), InvalidState);
}

TEST(Qutrit, KetRejectsZeroVector) {
    EXPECT_THROW((void)Ket3::normalized(0.0, 0.0, 1e-12), InvalidParameter);
    EXPECT_THROW((void)Ket3::basis(3), InvalidParameter);
}

TEST(Qutrit, ContextsAreTheFiveCycleEdges) {
    const auto all = Context::all();
    ASSERT_EQ(all.size(), 5U);
    EXPECT_EQ(all[0].label(), "(1,2)");
    EXPECT_EQ(all[4].label(), "(1,5)");
    EXPECT_TRUE(Context::is_compatible(4, 5));
    EXPECT_FALSE(Context::is_compatible(1, 3));
    EXPECT_THROW((void)Context(1, 3), InvalidParameter);
    EXPECT_THROW((void)Context::from_index(5), InvalidParameter);
}

TEST(Qutrit, WavePlateTableReproducesMeasurementVectors) {
    const auto v = kcbs_vectors();
    for (const auto &row : kWavePlateTable) {
        const auto [d1, d2] = hwp_projectors(row.hwp5_deg, row.hwp6_deg, row.hwp8_deg);
        EXPECT_GT(std::abs(d1.inner(v[static_cast<std::size_t>(row.detector1 - 1)])), 0.9999);
        EXPECT_GT(std::abs(d2.inner(v[static_cast<std::size_t>(row.detector2 - 1)])), 0.9999);
        EXPECT_LT(std::abs(d1.inner(d2)), 1e-12);
    }
    const auto [d1, d2] = hwp_projectors(0.0, 24.0, -12.95);
    EXPECT_NEAR(d1[0].real(), 0.66913061, 1e-8);
    EXPECT_NEAR(d1[1].real(), -0.74314483, 1e-8);
    EXPECT_NEAR(d2[0].real(), 0.66850171, 1e-8);
    EXPECT_NEAR(d2[1].real(), 0.60192164, 1e-8);
    EXPECT_NEAR(d2[2].real(), -0.43680179, 1e-8);
}

TEST(Qutrit, PropertyRandomStatesStayBelowQuantumBound) {
    // pure states on a grid of angles
    for (int a = 0; a < 24; ++a) {
        for (int b = 0; b < 24; ++b) {
            const double t = a * 0.13;
            const double p = b * 0.27;
            const auto s = Ket3::normalized(std::cos(t), std::sin(t) * std::cos(p), Complex(0.0, std::sin(t) * std::sin(p)));
            const double L = kcbs_value(Density3::pure(s), kcbs_vectors());
            EXPECT_LE(L, kQuantumBound + 1e-12);
            EXPECT_GE(L, -5.0 - 1e-12);
        }
    }
}

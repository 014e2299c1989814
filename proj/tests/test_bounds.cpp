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

#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "kcbs/bounds.hpp"

using namespace kcbs;

TEST(ClassicalBound, BruteForceMaximumIsThree) {
    const auto cb = classical_bound_bruteforce();
    EXPECT_EQ(cb.max_value, 3);
    EXPECT_EQ(*std::max_element(cb.values.begin(), cb.values.end()), 3);
    EXPECT_EQ(cb.values[0], -5);
    EXPECT_EQ(cb.values[31], -5);
    const Strategy target{1, 0, 0, 1, 0};
    EXPECT_NE(std::find(cb.maximizers.begin(), cb.maximizers.end(), target), cb.maximizers.end());
    // two of the five adjacent pairs equal at best means 10 optimal assignments
    EXPECT_EQ(cb.maximizers.size(), 10U);
}

TEST(NsBound, AnalyticValues) {
    EXPECT_EQ(f_ns(3.0), 0.0);
    EXPECT_EQ(f_ns(2.5), 0.0);
    EXPECT_NEAR(f_ns(kQuantumBound), 0.38848382726123460, 1e-12);
    EXPECT_NEAR(f_ns(3.8141609), 0.32832659424594378, 1e-12);
    EXPECT_NO_THROW((void)f_ns(kQuantumBound + 5e-10));
    EXPECT_THROW((void)f_ns(kQuantumBound + 1e-8), OutOfRange);
}

TEST(NsBound, ProblemHasFullRowRank) {
    NsLpProblem p(3.5);
    EXPECT_EQ(p.rank(), 11);
    EXPECT_EQ(p.a.cols(), 20);
}

TEST(NsBound, LpMatchesAnalyticOnGrid) {
    for (double L : violation_grid(50)) {
        EXPECT_NEAR(ns_guessing_probability_lp(L), 1.75 - L / 4.0, 1e-9) << L;
    }
    EXPECT_NEAR(ns_guessing_probability_lp(3.0), 1.0, 1e-12);
    EXPECT_NEAR(ns_guessing_probability_lp(kQuantumBound), 0.7639320225002102, 1e-9);
}

TEST(NsBound, EverySolveCarriesACertificate) {
    for (double L : {3.0, 3.3, 3.7, kQuantumBound}) {
        for (const auto &ctx : Context::all()) {
            for (std::size_t s = 0; s < 4; ++s) {
                const auto sol = lp_solve_ns(L, ctx, s);
                EXPECT_LT(sol.primal_residual, 1e-9);
                EXPECT_LE(sol.max_reduced_cost, 1e-9);
                EXPECT_GE(sol.min_x, -1e-12);
                // weak duality at optimum
                NsLpProblem p(L);
                EXPECT_NEAR(p.b.dot(sol.duals), sol.value, 1e-9);
            }
        }
    }
}

TEST(NsBound, InfeasibleValueNamesAConstraint) {
    try {
        (void)lp_solve_ns(5.5, Context(1, 2), 1);
        FAIL() << "expected infeasibility";
    } catch (const LpInfeasible &e) {
        EXPECT_FALSE(e.constraint().empty());
    }
    // no-signalling alone allows every context to be anticorrelated
    EXPECT_NO_THROW((void)lp_solve_ns(5.0, Context(1, 2), 1));
}

TEST(Realization, GuessingProbabilityTieBreak) {
    const auto g = guessing_prob(Realization3{});
    EXPECT_NEAR(g.probability, 1.0 / std::sqrt(5.0), 1e-12);
    EXPECT_EQ(g.context, Context(1, 2));
    EXPECT_EQ(g.slot, 1U);
    const auto c = guessing_prob(classical_realization());
    EXPECT_NEAR(c.probability, 1.0, 1e-12);
    EXPECT_NEAR(classical_realization().kcbs(), 3.0, 1e-12);
}

TEST(Realization, ParameterRoundTrip) {
    for (const auto &r : {Realization3{}, classical_realization()}) {
        const auto back = realization_from_params(params_from_realization(r));
        ASSERT_TRUE(back.has_value());
        EXPECT_NEAR(back->kcbs(), r.kcbs(), 1e-12);
        EXPECT_NEAR(guessing_prob(*back).probability, guessing_prob(r).probability, 1e-12);
    }
}

TEST(Realization, ParametrizationKeepsOrthogonality) {
    Rng rng(3);
    for (int t = 0; t < 200; ++t) {
        RealizationParams p{};
        for (auto &v : p) {
            v = rng.uniform(-4.0, 4.0);
        }
        const auto r = realization_from_params(p);
        if (!r) {
            continue;
        }
        EXPECT_NO_THROW(require_pentagon_orthogonality(r->vectors, 1e-9));
        EXPECT_LE(r->kcbs(), kQuantumBound + 1e-9);
    }
}

TEST(QuantumSearch, EndpointsAndMidpoint) {
    QuantumSearchOptions o;
    o.restarts = 30;
    const auto top = quantum_search(kQuantumBound, o, 0);
    ASSERT_FALSE(top.flagged);
    EXPECT_NEAR(top.guessing, 0.457, 0.01);
    EXPECT_NEAR(top.achieved, kQuantumBound, 1e-6);
    ASSERT_TRUE(top.realization.has_value());
    EXPECT_NEAR(top.realization->kcbs(), kQuantumBound, 1e-6);

    const auto bottom = quantum_search(3.0, o, 1);
    ASSERT_FALSE(bottom.flagged);
    EXPECT_NEAR(bottom.guessing, 1.0, 1e-6);

    const auto mid = quantum_search(3.5, o, 2);
    ASSERT_FALSE(mid.flagged);
    EXPECT_NEAR(mid.guessing, 0.836526, 1e-4);
    EXPECT_LE(mid.guessing, guessing_ns(3.5) + 1e-9);
    EXPECT_THROW((void)quantum_search(3.5, QuantumSearchOptions{0}, 0), InvalidParameter);
    EXPECT_THROW((void)quantum_search(4.0, o, 0), OutOfRange);
}

TEST(QuantumCurve, InvariantsHoldOnSmallGrid) {
    QuantumSearchOptions o;
    o.restarts = 20;
    const auto grid = violation_grid(8);
    const auto c = quantum_curve(grid, o);
    EXPECT_EQ(c.kind, CurveKind::quantum_reference);
    ASSERT_EQ(c.points.size(), grid.size());
    EXPECT_TRUE(curve_violations(c).empty());
    EXPECT_LE(c.points.front().f, 1e-6);
    for (const auto &p : c.points) {
        EXPECT_GE(p.f, 0.0);
        EXPECT_LE(f_ns(p.L), p.f + 1e-6);
    }
    EXPECT_EQ(c.metadata.search.size(), grid.size());
}

TEST(QuantumCurve, DeterministicAcrossThreadCounts) {
    QuantumSearchOptions a;
    a.restarts = 8;
    a.threads = 1;
    QuantumSearchOptions b = a;
    b.threads = 3;
    const auto grid = violation_grid(5);
    const auto ca = quantum_curve(grid, a);
    const auto cb = quantum_curve(grid, b);
    ASSERT_EQ(ca.points.size(), cb.points.size());
    for (std::size_t i = 0; i < ca.points.size(); ++i) {
        EXPECT_EQ(ca.points[i].f, cb.points[i].f);
    }
}

TEST(Envelope, RaisesDipsAndEnforcesMonotonicity) {
    const std::vector<double> xs{0, 1, 2, 3, 4};
    const std::vector<double> ys{1.0, 0.5, 0.8, 0.4, 0.1};
    const auto e = concave_decreasing_envelope(xs, ys);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        EXPECT_GE(e[i], ys[i]);
    }
    for (std::size_t i = 1; i < xs.size(); ++i) {
        EXPECT_LE(e[i], e[i - 1]);
    }
    EXPECT_NEAR(e[1], 0.9, 1e-12);
}

TEST(CurveEval, AnalyticAndTabulated) {
    const auto ns = EntropyCurve::ns_analytic();
    for (double L : {3.0, 3.2, 3.77, kQuantumBound}) {
        EXPECT_NEAR(curve_eval(ns, L), f_ns(L), 1e-12);
    }
    EXPECT_EQ(curve_eval(ns, 2.0), 0.0);
    EXPECT_THROW((void)curve_eval(ns, 4.0), OutOfRange);

    EntropyCurve t;
    t.kind = CurveKind::quantum_reference;
    t.points = {{3.0, 0.0}, {3.5, 0.25}, {kQuantumBound, 1.16}};
    EXPECT_EQ(curve_eval(t, 3.5), 0.25);
    const double mid = curve_eval(t, 3.75);
    EXPECT_GT(mid, 0.25);
    EXPECT_LT(mid, 1.16);
    EXPECT_TRUE(curve_violations(t).empty());
}

TEST(CurveEval, ViolationsDetected) {
    EntropyCurve bad;
    bad.kind = CurveKind::ns_lp;
    bad.points = {{3.0, 0.1}, {3.5, 0.05}, {3.9, 0.5}};
    const auto v = curve_violations(bad);
    EXPECT_GE(v.size(), 2U);
}

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

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "kcbs/device.hpp"
#include "kcbs/errors.hpp"
#include "kcbs/qutrit.hpp"

namespace kcbs {

/// Outcome slot in the 11, 10, 01, 00 order.
[[nodiscard]] constexpr std::size_t outcome_slot(const OutcomePair &o) noexcept {
    return o.a_i == 1 ? (o.a_j == 1 ? 0U : 1U) : (o.a_j == 1 ? 2U : 3U);
}

/// N(ab | A_i A_j) per context, slots ordered 11, 10, 01, 00.
struct CountsTable {
    std::array<std::array<std::uint64_t, 4>, 5> n{};

    [[nodiscard]] std::uint64_t total(const Context &ctx) const {
        const auto &row = n[ctx.index()];
        return row[0] + row[1] + row[2] + row[3];
    }
    [[nodiscard]] std::uint64_t unequal(const Context &ctx) const { return n[ctx.index()][1] + n[ctx.index()][2]; }
    [[nodiscard]] std::uint64_t equal(const Context &ctx) const { return n[ctx.index()][0] + n[ctx.index()][3]; }
    [[nodiscard]] std::uint64_t grand_total() const {
        std::uint64_t t = 0;
        for (const auto &ctx : Context::all()) {
            t += total(ctx);
        }
        return t;
    }
};

[[nodiscard]] inline CountsTable counts_table(const TrialLog &log) {
    CountsTable t;
    for (const auto &r : log.records) {
        ++t.n[r.context.index()][outcome_slot(r.outcome)];
    }
    return t;
}

namespace detail {

inline void require_positive_weights(const std::array<double, 5> &w) {
    for (std::size_t c = 0; c < w.size(); ++c) {
        if (!(w[c] > 0.0)) {
            throw InvalidDistribution("context " + Context::from_index(c).label() +
                                      " has zero input probability; the estimator is undefined");
        }
    }
}

} // namespace detail

/// Importance-weighted estimator of the KCBS value:
/// (1/k) * sum_ctx [N(!=) - N(=)] / P(ctx), weighted by `weights`.
[[nodiscard]] inline double violation_from_counts(const CountsTable &t, const std::array<double, 5> &weights) {
    detail::require_positive_weights(weights);
    const auto k = t.grand_total();
    if (k == 0) {
        throw InvalidParameter("cannot estimate the violation from an empty log");
    }
    double sum = 0.0;
    for (const auto &ctx : Context::all()) {
        const double diff = static_cast<double>(t.unequal(ctx)) - static_cast<double>(t.equal(ctx));
        sum += diff / weights[ctx.index()];
    }
    return sum / static_cast<double>(k);
}

[[nodiscard]] inline double violation_from_log(const TrialLog &log) {
    return violation_from_counts(counts_table(log), log.distribution.weights());
}

/// One experimental probability row. A missing P(11) is read as 0.
struct ProbRow {
    double p10 = 0.0;
    double p01 = 0.0;
    double p00 = 0.0;
    double p11 = 0.0;

    [[nodiscard]] double sum() const { return p10 + p01 + p00 + p11; }
};

struct ProbTable {
    std::array<ProbRow, 5> rows{};
};

inline constexpr double kProbRowTolerance = 2e-3;
inline constexpr double kProbRowRejection = 1e-2;

/// KCBS value from per-context probabilities. Rows off by more than 0.01
/// from unit sum are rejected.
[[nodiscard]] inline double violation_from_probs(const ProbTable &table) {
    double total = 0.0;
    for (const auto &ctx : Context::all()) {
        const auto &row = table.rows[ctx.index()];
        if (!(std::abs(row.sum() - 1.0) <= kProbRowRejection)) {
            throw InvalidParameter("probability row for context " + ctx.label() + " sums to " +
                                   std::to_string(row.sum()));
        }
        total += (row.p10 + row.p01) - (row.p00 + row.p11);
    }
    return total;
}

/// Row-wise relative frequencies of a log; contexts never seen stay zero.
[[nodiscard]] inline ProbTable empirical_prob_table(const TrialLog &log) {
    const auto t = counts_table(log);
    ProbTable p;
    for (const auto &ctx : Context::all()) {
        const auto n = static_cast<double>(t.total(ctx));
        if (n == 0.0) {
            continue;
        }
        const auto &c = t.n[ctx.index()];
        p.rows[ctx.index()] = {static_cast<double>(c[1]) / n, static_cast<double>(c[2]) / n,
                               static_cast<double>(c[3]) / n, static_cast<double>(c[0]) / n};
    }
    return p;
}

/// Per-trial estimator L_l = tau(a,b) / P(ctx_l), tau = -1 when a == b.
[[nodiscard]] inline double per_trial_estimate(const TrialRecord &r, const InputDistribution &dist) {
    const double w = dist.weight(r.context);
    if (!(w > 0.0)) {
        throw InvalidDistribution("context " + r.context.label() + " has zero input probability");
    }
    const double tau = r.outcome.a_i == r.outcome.a_j ? -1.0 : 1.0;
    return tau / w;
}

struct StreamingEstimate {
    std::vector<double> per_trial;
    std::vector<double> running_mean;
};

[[nodiscard]] inline StreamingEstimate streaming_estimator(const TrialLog &log) {
    detail::require_positive_weights(log.distribution.weights());
    StreamingEstimate s;
    s.per_trial.reserve(log.records.size());
    s.running_mean.reserve(log.records.size());
    double sum = 0.0;
    for (const auto &r : log.records) {
        const double x = per_trial_estimate(r, log.distribution);
        s.per_trial.push_back(x);
        sum += x;
        s.running_mean.push_back(sum / static_cast<double>(s.per_trial.size()));
    }
    return s;
}

/// Standard error of the estimator from the sample variance of the L_l.
[[nodiscard]] inline double stderr_estimate(const TrialLog &log) {
    if (log.k() < 2) {
        throw InvalidParameter("stderr needs at least two trials");
    }
    detail::require_positive_weights(log.distribution.weights());
    // Welford
    double mean = 0.0;
    double m2 = 0.0;
    std::uint64_t n = 0;
    for (const auto &r : log.records) {
        const double x = per_trial_estimate(r, log.distribution);
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    const double var = m2 / static_cast<double>(n - 1);
    return std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
}

} // namespace kcbs

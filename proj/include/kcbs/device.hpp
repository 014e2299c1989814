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
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "kcbs/errors.hpp"
#include "kcbs/qutrit.hpp"
#include "kcbs/rng.hpp"

namespace kcbs {

/// Probability of choosing each context per trial.
class InputDistribution {
  public:
    enum class Kind { uniform, biased, custom };

    static InputDistribution uniform() { return InputDistribution(Kind::uniform, {0.2, 0.2, 0.2, 0.2, 0.2}); }

    /// P(A1A2) = 1 - 4*alpha/sqrt(k), the other four alpha/sqrt(k).
    static InputDistribution biased(double alpha, std::uint64_t k) {
        if (!(alpha > 0.0) || k == 0) {
            throw InvalidParameter("biased distribution needs alpha > 0 and k > 0");
        }
        const double kd = static_cast<double>(k);
        if (!(kd > 16.0 * alpha * alpha)) {
            throw InvalidParameter("biased distribution needs k > (4*alpha)^2");
        }
        const double r = alpha / std::sqrt(kd);
        InputDistribution d(Kind::biased, {1.0 - 4.0 * r, r, r, r, r});
        d.alpha_ = alpha;
        d.k_ = k;
        return d;
    }

    static InputDistribution custom(const std::array<double, 5> &weights) {
        for (double w : weights) {
            if (!(w >= 0.0)) {
                throw InvalidParameter("context weights must be non-negative");
            }
        }
        const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
        if (std::abs(sum - 1.0) > 1e-12) {
            throw InvalidParameter("context weights must sum to 1");
        }
        return InputDistribution(Kind::custom, weights);
    }

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] const std::array<double, 5> &weights() const noexcept { return w_; }
    [[nodiscard]] double weight(const Context &ctx) const { return w_[ctx.index()]; }
    /// r = min_ij P(A_i A_j).
    [[nodiscard]] double min_weight() const { return *std::min_element(w_.begin(), w_.end()); }
    [[nodiscard]] std::optional<double> alpha() const { return alpha_; }
    [[nodiscard]] std::optional<std::uint64_t> design_k() const { return k_; }

    [[nodiscard]] double shannon_entropy_bits() const {
        double h = 0.0;
        for (double w : w_) {
            if (w > 0.0) {
                h -= w * std::log2(w);
            }
        }
        return h;
    }
    [[nodiscard]] double min_entropy_bits() const { return -std::log2(*std::max_element(w_.begin(), w_.end())); }

    [[nodiscard]] std::string describe() const {
        switch (kind_) {
        case Kind::uniform:
            return "uniform";
        case Kind::biased:
            return "biased";
        case Kind::custom:
            return "custom";
        }
        return "custom";
    }

  private:
    InputDistribution(Kind kind, std::array<double, 5> w) : kind_(kind), w_(w) {}

    Kind kind_;
    std::array<double, 5> w_;
    std::optional<double> alpha_;
    std::optional<std::uint64_t> k_;
};

struct OutcomePair {
    std::uint8_t a_i = 0;
    std::uint8_t a_j = 0;

    friend bool operator==(const OutcomePair &, const OutcomePair &) = default;
};

struct TrialRecord {
    std::uint64_t index = 0; ///< 1-based trial number
    Context context{1, 2};
    OutcomePair outcome;

    friend bool operator==(const TrialRecord &, const TrialRecord &) = default;
};

struct TrialLog {
    std::vector<TrialRecord> records;
    InputDistribution distribution = InputDistribution::uniform();
    std::uint64_t seed = 0;
    std::uint64_t discarded_count = 0;

    [[nodiscard]] std::uint64_t k() const noexcept { return records.size(); }
};

/// Deterministic outcome assignment a_1..a_5 (index 0 is A_1).
using Strategy = std::array<std::uint8_t, 5>;

/// Receives the full (inputs, outputs) history so far and may replace the
/// strategy used from the next trial on.
using MemoryPolicy = std::function<void(Strategy &, std::span<const TrialRecord>)>;

struct IdealQuantum {
    Density3 rho = kcbs_state();
    Pentagon vectors = kcbs_vectors();
};

/// KCBS state mixed with white noise: v*|0><0| + (1-v)*I/3.
struct Depolarized {
    double visibility = 1.0;
};

/// Ideal device whose single click is lost with probability 1 - efficiency;
/// no-click trials are discarded and redrawn.
struct LossyQuantum {
    double efficiency = 1.0;
};

struct DeterministicNchv {
    Strategy strategy{1, 0, 0, 1, 0};
    MemoryPolicy memory; ///< empty: memoryless
};

using DeviceModel = std::variant<IdealQuantum, Depolarized, LossyQuantum, DeterministicNchv>;

/// Value of the KCBS expression for a deterministic assignment.
[[nodiscard]] inline int strategy_value(const Strategy &s) {
    int total = 0;
    for (const auto &ctx : Context::all()) {
        const bool differ = s[static_cast<std::size_t>(ctx.first() - 1)] != s[static_cast<std::size_t>(ctx.second() - 1)];
        total += differ ? 1 : -1;
    }
    return total;
}

/// Memory policy that steps through the five rotations of the strategy after
/// every trial. Each rotation of (1,0,0,1,0) also scores 3.
[[nodiscard]] inline MemoryPolicy rotating_memory() {
    return [](Strategy &s, std::span<const TrialRecord>) { std::rotate(s.begin(), s.begin() + 1, s.end()); };
}

/// Memory policy that tracks the most frequent past context and switches to
/// an optimal strategy whose single equal pair avoids it.
[[nodiscard]] inline MemoryPolicy adaptive_memory() {
    struct Tally {
        std::array<std::uint64_t, 5> seen{};
        std::size_t consumed = 0;
    };
    return [tally = Tally{}](Strategy &s, std::span<const TrialRecord> history) mutable {
        if (history.size() < tally.consumed) {
            tally = Tally{};
        }
        for (; tally.consumed < history.size(); ++tally.consumed) {
            ++tally.seen[history[tally.consumed].context.index()];
        }
        const auto &seen = tally.seen;
        const auto busiest = static_cast<std::size_t>(std::max_element(seen.begin(), seen.end()) - seen.begin());
        // left rotation by t of (1,0,0,1,0) has its equal pair at context (1-t) mod 5
        const std::size_t t = (5 - busiest) % 5;
        Strategy base{1, 0, 0, 1, 0};
        std::rotate(base.begin(), base.begin() + static_cast<std::ptrdiff_t>(t), base.end());
        s = base;
    };
}

namespace detail {

template <class> inline constexpr bool kAlwaysFalse = false;

inline std::array<JointDist, 5> quantum_table(const Density3 &rho, const Pentagon &vectors) {
    std::array<JointDist, 5> t{};
    for (const auto &ctx : Context::all()) {
        t[ctx.index()] = joint_probs(rho, ctx, vectors);
    }
    return t;
}

/// Per-context joint distributions of a memoryless quantum model.
inline std::array<JointDist, 5> response_table(const DeviceModel &model) {
    return std::visit(
        [](const auto &m) -> std::array<JointDist, 5> {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, IdealQuantum>) {
                return quantum_table(m.rho, m.vectors);
            } else if constexpr (std::is_same_v<T, Depolarized>) {
                return quantum_table(depolarize(kcbs_state(), m.visibility), kcbs_vectors());
            } else if constexpr (std::is_same_v<T, LossyQuantum>) {
                return quantum_table(kcbs_state(), kcbs_vectors());
            } else if constexpr (std::is_same_v<T, DeterministicNchv>) {
                std::array<JointDist, 5> t{};
                for (const auto &ctx : Context::all()) {
                    const int a = m.strategy[static_cast<std::size_t>(ctx.first() - 1)];
                    const int b = m.strategy[static_cast<std::size_t>(ctx.second() - 1)];
                    JointDist d;
                    (a == 1 ? (b == 1 ? d.p11 : d.p10) : (b == 1 ? d.p01 : d.p00)) = 1.0;
                    t[ctx.index()] = d;
                }
                return t;
            } else {
                static_assert(kAlwaysFalse<T>);
            }
        },
        model);
}

inline OutcomePair draw(const JointDist &d, Rng &rng) {
    const double u = rng.uniform();
    double c = d.p11;
    if (u < c) {
        return {1, 1};
    }
    c += d.p10;
    if (u < c) {
        return {1, 0};
    }
    c += d.p01;
    if (u < c) {
        return {0, 1};
    }
    return {0, 0};
}

inline double efficiency_of(const DeviceModel &model) {
    if (const auto *lossy = std::get_if<LossyQuantum>(&model)) {
        return lossy->efficiency;
    }
    return 1.0;
}

} // namespace detail

inline void validate_model(const DeviceModel &model) {
    std::visit(
        [](const auto &m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, IdealQuantum>) {
                require_pentagon_orthogonality(m.vectors);
            } else if constexpr (std::is_same_v<T, Depolarized>) {
                if (!(m.visibility >= 0.0 && m.visibility <= 1.0)) {
                    throw InvalidParameter("depolarized visibility must lie in [0, 1]");
                }
            } else if constexpr (std::is_same_v<T, LossyQuantum>) {
                if (!(m.efficiency > 0.0 && m.efficiency <= 1.0)) {
                    throw InvalidParameter("lossy efficiency must lie in (0, 1]");
                }
            } else {
                for (auto a : m.strategy) {
                    if (a > 1) {
                        throw InvalidParameter("strategy outcomes must be 0 or 1");
                    }
                }
            }
        },
        model);
}

/// Draws one context i.i.d. from the distribution weights.
[[nodiscard]] inline Context sample_setting(const InputDistribution &dist, Rng &rng) {
    const double u = rng.uniform();
    const auto &w = dist.weights();
    double c = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] <= 0.0) {
            continue;
        }
        last = i;
        c += w[i];
        if (u < c) {
            return Context::from_index(i);
        }
    }
    return Context::from_index(last);
}

struct DeviceResponse {
    OutcomePair outcome;
    std::uint64_t discarded = 0; ///< no-click events redrawn before this outcome
};

/// One trial of the device. Deterministic models may mutate their strategy
/// through their memory policy after answering.
[[nodiscard]] inline DeviceResponse device_respond(DeviceModel &model, const Context &ctx,
                                                   std::span<const TrialRecord> history, Rng &rng) {
    if (auto *nchv = std::get_if<DeterministicNchv>(&model)) {
        DeviceResponse r;
        r.outcome = {nchv->strategy[static_cast<std::size_t>(ctx.first() - 1)],
                     nchv->strategy[static_cast<std::size_t>(ctx.second() - 1)]};
        if (nchv->memory) {
            // the policy sees history including the current trial
            std::vector<TrialRecord> extended(history.begin(), history.end());
            extended.push_back({history.empty() ? 1 : history.back().index + 1, ctx, r.outcome});
            nchv->memory(nchv->strategy, extended);
        }
        return r;
    }
    const auto table = detail::response_table(model);
    const double eta = detail::efficiency_of(model);
    DeviceResponse r;
    for (;;) {
        r.outcome = detail::draw(table[ctx.index()], rng);
        if (eta >= 1.0 || rng.uniform() < eta) {
            return r;
        }
        ++r.discarded;
    }
}

/// Runs k retained trials. Contexts come from the `settings` stream and
/// device randomness from the `device` stream derived from `seed`.
[[nodiscard]] inline TrialLog run_experiment(DeviceModel model, const InputDistribution &dist, std::uint64_t k,
                                             std::uint64_t seed) {
    if (k == 0) {
        throw InvalidParameter("number of trials k must be at least 1");
    }
    validate_model(model);
    Rng settings(derive_seed(seed, {stream::settings}));
    Rng device(derive_seed(seed, {stream::device}));

    TrialLog log;
    log.distribution = dist;
    log.seed = seed;
    log.records.reserve(k);

    auto *nchv = std::get_if<DeterministicNchv>(&model);
    const bool memoryless_nchv = nchv != nullptr && !nchv->memory;
    std::optional<std::array<JointDist, 5>> table;
    if (nchv == nullptr || memoryless_nchv) {
        table = detail::response_table(model);
    }
    const double eta = detail::efficiency_of(model);

    for (std::uint64_t l = 1; l <= k; ++l) {
        const Context ctx = sample_setting(dist, settings);
        OutcomePair out;
        if (table) {
            for (;;) {
                out = detail::draw((*table)[ctx.index()], device);
                if (eta >= 1.0 || device.uniform() < eta) {
                    break;
                }
                ++log.discarded_count;
            }
        } else {
            out = {nchv->strategy[static_cast<std::size_t>(ctx.first() - 1)],
                   nchv->strategy[static_cast<std::size_t>(ctx.second() - 1)]};
        }
        log.records.push_back({l, ctx, out});
        if (nchv != nullptr && nchv->memory) {
            nchv->memory(nchv->strategy, std::span<const TrialRecord>(log.records));
        }
    }
    return log;
}

/// Expected KCBS value of a memoryless model.
[[nodiscard]] inline double true_violation(const DeviceModel &model) {
    if (const auto *nchv = std::get_if<DeterministicNchv>(&model); nchv != nullptr && nchv->memory) {
        throw InvalidParameter("true violation is only defined for memoryless models");
    }
    double total = 0.0;
    for (const auto &d : detail::response_table(model)) {
        total += d.p_unequal() - d.p_equal();
    }
    return total;
}

/// Marginal P(a_i = 1) of one observable in each of its two contexts.
struct MarginalAudit {
    int observable = 0;                 ///< 1..5
    Context first_context{1, 2};        ///< lower-index context containing it
    Context second_context{1, 5};
    std::optional<double> p_first;      ///< empty when never observed
    std::optional<double> p_second;
    std::optional<double> discrepancy;  ///< |p_first - p_second|, empty if undefined
};

[[nodiscard]] inline std::array<MarginalAudit, 5> no_disturbance_report(const TrialLog &log) {
    std::array<std::array<std::uint64_t, 2>, 5> ones{};  // [ctx][slot]
    std::array<std::uint64_t, 5> totals{};
    for (const auto &r : log.records) {
        const auto c = r.context.index();
        ++totals[c];
        ones[c][0] += r.outcome.a_i;
        ones[c][1] += r.outcome.a_j;
    }
    std::array<MarginalAudit, 5> out{};
    for (int obs = 1; obs <= 5; ++obs) {
        MarginalAudit a;
        a.observable = obs;
        std::vector<Context> holding;
        for (const auto &ctx : Context::all()) {
            if (ctx.first() == obs || ctx.second() == obs) {
                holding.push_back(ctx);
            }
        }
        a.first_context = holding[0];
        a.second_context = holding[1];
        auto marginal = [&](const Context &ctx) -> std::optional<double> {
            const auto c = ctx.index();
            if (totals[c] == 0) {
                return std::nullopt;
            }
            const std::size_t slot = ctx.first() == obs ? 0 : 1;
            return static_cast<double>(ones[c][slot]) / static_cast<double>(totals[c]);
        };
        a.p_first = marginal(a.first_context);
        a.p_second = marginal(a.second_context);
        if (a.p_first && a.p_second) {
            a.discrepancy = std::abs(*a.p_first - *a.p_second);
        }
        out[static_cast<std::size_t>(obs - 1)] = a;
    }
    return out;
}

} // namespace kcbs

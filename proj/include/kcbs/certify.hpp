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
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kcbs/bounds.hpp"
#include "kcbs/device.hpp"
#include "kcbs/errors.hpp"
#include "kcbs/estimation.hpp"
#include "kcbs/qutrit.hpp"
#include "kcbs/rng.hpp"

namespace kcbs {

[[nodiscard]] inline std::vector<double> default_thresholds() {
    return {3.0, 3.1, 3.2, 3.3, 3.4, 3.5, 3.6, 3.7, 3.8, 3.9, kQuantumBound};
}

/// How the entropy consumed by choosing contexts is counted.
enum class InputAccounting { shannon, min_entropy };

[[nodiscard]] inline std::string to_string(InputAccounting a) {
    return a == InputAccounting::shannon ? "shannon" : "min_entropy";
}

struct CertificationParams {
    double delta = 0.001;
    double eps_prime = 0.01;
    std::vector<double> thresholds = default_thresholds();
    InputAccounting accounting = InputAccounting::shannon;

    void validate() const {
        if (!(delta > 0.0 && delta < 1.0)) {
            throw InvalidParameter("delta must lie in (0, 1)");
        }
        if (!(eps_prime > 0.0 && eps_prime < 1.0)) {
            throw InvalidParameter("eps_prime must lie in (0, 1)");
        }
        if (thresholds.empty() || thresholds.front() != kClassicalBound ||
            std::abs(thresholds.back() - kQuantumBound) > 1e-9) {
            throw InvalidParameter("thresholds must start at 3 and end at 4*sqrt(5)-5");
        }
        for (std::size_t i = 1; i < thresholds.size(); ++i) {
            if (!(thresholds[i] > thresholds[i - 1])) {
                throw InvalidParameter("thresholds must be strictly increasing");
            }
        }
    }
};

namespace detail {

inline void check_epsilon_domain(double k, double r, double eps_prime) {
    if (!(k >= 1.0)) {
        throw InvalidParameter("k must be at least 1");
    }
    if (!(r > 0.0 && r <= 0.2 + 1e-15)) {
        throw InvalidParameter("r must lie in (0, 0.2]");
    }
    if (!(eps_prime > 0.0 && eps_prime < 1.0)) {
        throw InvalidParameter("eps_prime must lie in (0, 1)");
    }
}

} // namespace detail

/// Deviation bound eps = (L_q + 1/r) * sqrt(-2 ln eps' / k).
[[nodiscard]] inline double epsilon(double k, double r, double eps_prime) {
    detail::check_epsilon_domain(k, r, eps_prime);
    return (kQuantumBound + 1.0 / r) * std::sqrt(-2.0 * std::log(eps_prime) / k);
}

/// Same quantity as sqrt(-2 (1 + L_q r)^2 ln eps' / (k r^2)).
[[nodiscard]] inline double epsilon_expanded(double k, double r, double eps_prime) {
    detail::check_epsilon_domain(k, r, eps_prime);
    const double a = 1.0 + kQuantumBound * r;
    return std::sqrt(-2.0 * a * a * std::log(eps_prime) / (k * r * r));
}

/// k times the Shannon entropy of the context weights.
[[nodiscard]] inline double input_entropy(const InputDistribution &dist, std::uint64_t k) {
    return static_cast<double>(k) * dist.shannon_entropy_bits();
}

/// k times the min-entropy of the context weights.
[[nodiscard]] inline double input_min_entropy(const InputDistribution &dist, std::uint64_t k) {
    return static_cast<double>(k) * dist.min_entropy_bits();
}

[[nodiscard]] inline double net_randomness(double entropy_bound_bits, double input_entropy_bits) {
    return entropy_bound_bits - input_entropy_bits;
}

struct AuditSummary {
    double max_discrepancy = 0.0;
    int worst_observable = 0;
    std::array<MarginalAudit, 5> observables{};
};

[[nodiscard]] inline AuditSummary summarize_audit(const std::array<MarginalAudit, 5> &audit) {
    AuditSummary s;
    s.observables = audit;
    for (const auto &a : audit) {
        if (a.discrepancy && *a.discrepancy > s.max_discrepancy) {
            s.max_discrepancy = *a.discrepancy;
            s.worst_observable = a.observable;
        }
    }
    return s;
}

struct CertificationReport {
    double L_hat = 0.0;
    std::optional<double> stderr_L;
    std::uint64_t k = 0;
    double r = 0.0;
    std::optional<std::size_t> m;
    std::optional<double> L_m;
    double epsilon = 0.0;
    std::optional<double> L_m_minus_eps;
    std::string curve_tag;
    double f_value = 0.0;
    double raw_bound_bits = 0.0;
    double entropy_bound_bits = 0.0;
    bool clamped = false;
    InputAccounting accounting = InputAccounting::shannon;
    double input_entropy_bits = 0.0;
    double net_bits = 0.0;
    double input_shannon_bits = 0.0;
    double input_min_entropy_bits = 0.0;
    double net_bits_shannon = 0.0;
    double net_bits_min_entropy = 0.0;
    bool suspicious = false;
    std::uint64_t discarded_count = 0;
    std::optional<AuditSummary> audit;
    std::vector<std::string> notes;
    CertificationParams params;
    InputDistribution distribution = InputDistribution::uniform();
};

/**
 * Finite-statistics min-entropy bound
 *
 *   k * f(L_m - eps) - log2(1/delta),
 *
 * with L_m the largest threshold not above L_hat and eps from epsilon(k, r,
 * eps'), r the smallest context weight. Clamped at 0.
 */
[[nodiscard]] inline CertificationReport min_entropy_bound(double L_hat, std::uint64_t k,
                                                           const InputDistribution &dist,
                                                           const CertificationParams &params,
                                                           const EntropyCurve &curve,
                                                           std::optional<double> stderr_L = std::nullopt) {
    params.validate();
    if (k == 0) {
        throw InvalidParameter("k must be at least 1");
    }
    CertificationReport rep;
    rep.L_hat = L_hat;
    rep.stderr_L = stderr_L;
    rep.k = k;
    rep.r = dist.min_weight();
    rep.params = params;
    rep.distribution = dist;
    rep.curve_tag = to_string(curve.kind);
    rep.accounting = params.accounting;
    rep.epsilon = epsilon(static_cast<double>(k), rep.r, params.eps_prime);

    const double slack = 3.0 * stderr_L.value_or(0.0);
    if (L_hat > kQuantumBound + slack) {
        rep.suspicious = true;
        rep.notes.push_back("suspicious data: estimate exceeds the quantum bound 4*sqrt(5)-5 by more than three "
                            "standard errors; threshold capped at the quantum bound");
    }
    const double capped = std::min(L_hat, kQuantumBound);
    for (std::size_t i = 0; i < params.thresholds.size(); ++i) {
        if (params.thresholds[i] <= capped) {
            rep.m = i;
            rep.L_m = params.thresholds[i];
        }
    }

    if (!rep.L_m) {
        rep.notes.push_back("no violation: estimate below the non-contextual bound 3");
    } else {
        rep.L_m_minus_eps = *rep.L_m - rep.epsilon;
        if (*rep.L_m_minus_eps <= kClassicalBound) {
            rep.notes.push_back(L_hat <= kClassicalBound ? "no violation: estimate does not exceed 3"
                                                         : "no certification at this k: L_m - eps <= 3");
        } else {
            rep.f_value = curve_eval(curve, *rep.L_m_minus_eps);
            rep.raw_bound_bits = static_cast<double>(k) * rep.f_value - std::log2(1.0 / params.delta);
            if (rep.raw_bound_bits < 0.0) {
                rep.clamped = true;
                rep.notes.push_back("computed bound negative; clamped to 0");
            }
            rep.entropy_bound_bits = std::max(0.0, rep.raw_bound_bits);
        }
    }

    rep.input_shannon_bits = input_entropy(dist, k);
    rep.input_min_entropy_bits = input_min_entropy(dist, k);
    rep.net_bits_shannon = net_randomness(rep.entropy_bound_bits, rep.input_shannon_bits);
    rep.net_bits_min_entropy = net_randomness(rep.entropy_bound_bits, rep.input_min_entropy_bits);
    rep.input_entropy_bits =
        params.accounting == InputAccounting::shannon ? rep.input_shannon_bits : rep.input_min_entropy_bits;
    rep.net_bits = net_randomness(rep.entropy_bound_bits, rep.input_entropy_bits);
    rep.notes.push_back(rep.net_bits > 0.0 ? "net randomness positive" : "net randomness not positive");
    rep.notes.push_back("input accounting is ambiguous: net is reported against both the Shannon entropy and the "
                        "min-entropy of the context choices; the selected accounting is '" +
                        to_string(params.accounting) + "'");
    if (curve.kind == CurveKind::quantum_reference) {
        rep.notes.push_back("quantum_reference curve comes from explicit qutrit realizations and is an upper "
                            "bound on the true f; use ns_analytic for a sound certificate");
    }
    rep.notes.push_back("valid unless an event of probability at most delta occurred, up to eps' in distribution "
                        "distance");
    return rep;
}

/// Estimates L_hat from a log and certifies it.
[[nodiscard]] inline CertificationReport certify_log(const TrialLog &log, const CertificationParams &params,
                                                     const EntropyCurve &curve) {
    const double L_hat = violation_from_log(log);
    const std::optional<double> se = log.k() >= 2 ? std::optional<double>(stderr_estimate(log)) : std::nullopt;
    auto rep = min_entropy_bound(L_hat, log.k(), log.distribution, params, curve, se);
    rep.discarded_count = log.discarded_count;
    rep.audit = summarize_audit(no_disturbance_report(log));
    if (log.discarded_count > 0) {
        rep.notes.push_back("fair sampling assumed: " + std::to_string(log.discarded_count) +
                            " no-click events discarded; k counts retained trials");
    }
    return rep;
}

[[nodiscard]] inline nlohmann::ordered_json distribution_json(const InputDistribution &d) {
    nlohmann::ordered_json j;
    j["kind"] = d.describe();
    j["weights"] = d.weights();
    if (d.alpha()) {
        j["alpha"] = *d.alpha();
    }
    if (d.design_k()) {
        j["design_k"] = *d.design_k();
    }
    return j;
}

namespace detail {

template <typename T>
nlohmann::ordered_json optional_json(const std::optional<T> &v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

} // namespace detail

[[nodiscard]] inline nlohmann::ordered_json to_json(const CertificationReport &r) {
    using detail::optional_json;
    nlohmann::ordered_json j;
    j["format_version"] = 1;
    j["inputs"] = {{"L_hat", r.L_hat},
                   {"stderr", optional_json(r.stderr_L)},
                   {"k", r.k},
                   {"distribution", distribution_json(r.distribution)},
                   {"delta", r.params.delta},
                   {"eps_prime", r.params.eps_prime},
                   {"thresholds", r.params.thresholds},
                   {"curve", r.curve_tag},
                   {"accounting", to_string(r.accounting)},
                   {"discarded_count", r.discarded_count}};
    j["r"] = r.r;
    j["epsilon"] = r.epsilon;
    j["m"] = optional_json(r.m);
    j["L_m"] = optional_json(r.L_m);
    j["L_m_minus_eps"] = optional_json(r.L_m_minus_eps);
    j["f"] = r.f_value;
    j["raw_bound_bits"] = r.raw_bound_bits;
    j["entropy_bound_bits"] = r.entropy_bound_bits;
    j["clamped"] = r.clamped;
    j["input_entropy_bits"] = r.input_entropy_bits;
    j["net_bits"] = r.net_bits;
    j["accounting_alternatives"] = {
        {"shannon", {{"input_entropy_bits", r.input_shannon_bits}, {"net_bits", r.net_bits_shannon}}},
        {"min_entropy", {{"input_entropy_bits", r.input_min_entropy_bits}, {"net_bits", r.net_bits_min_entropy}}}};
    j["suspicious"] = r.suspicious;
    j["assumptions"] = {"fair sampling over retained trials", "classical side information only",
                        "measurements of each context are compatible"};
    if (r.audit) {
        auto obs = nlohmann::ordered_json::array();
        for (const auto &a : r.audit->observables) {
            obs.push_back({{"observable", a.observable},
                           {"contexts", {a.first_context.label(), a.second_context.label()}},
                           {"p_first", optional_json(a.p_first)},
                           {"p_second", optional_json(a.p_second)},
                           {"discrepancy", optional_json(a.discrepancy)}});
        }
        j["no_disturbance"] = {{"max_discrepancy", r.audit->max_discrepancy},
                               {"worst_observable", r.audit->worst_observable},
                               {"observables", obs}};
    }
    j["notes"] = r.notes;
    return j;
}

struct CoverageResult {
    double exceedance = 0.0;
    std::uint64_t exceed_count = 0;
    std::uint64_t replicas = 0;
    double L_true = 0.0;
    double epsilon = 0.0;
};

/// Fraction of independent runs whose estimate reaches L_true + eps.
[[nodiscard]] inline CoverageResult azuma_coverage_test(const DeviceModel &model, const InputDistribution &dist,
                                                        std::uint64_t k, double eps_prime, std::uint64_t replicas,
                                                        std::uint64_t seed, unsigned threads = 0) {
    if (replicas == 0) {
        throw InvalidParameter("replicas must be at least 1");
    }
    CoverageResult res;
    res.replicas = replicas;
    res.L_true = true_violation(model);
    res.epsilon = epsilon(static_cast<double>(k), dist.min_weight(), eps_prime);
    std::vector<std::uint8_t> hit(replicas, 0);
    detail::parallel_for(replicas, threads, [&](std::size_t i) {
        const auto log = run_experiment(model, dist, k, derive_seed(seed, {stream::replica, i}));
        hit[i] = violation_from_log(log) >= res.L_true + res.epsilon ? 1 : 0;
    });
    for (auto h : hit) {
        res.exceed_count += h;
    }
    res.exceedance = static_cast<double>(res.exceed_count) / static_cast<double>(replicas);
    return res;
}

} // namespace kcbs

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
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kcbs/errors.hpp"
#include "kcbs/special.hpp"

namespace kcbs {

using Bits = std::vector<std::uint8_t>;

struct BitString {
    Bits bits;
    std::string origin; ///< e.g. S1, S2, St, S1_ext

    [[nodiscard]] std::size_t size() const noexcept { return bits.size(); }
};

/// Pairwise debiasing: 01 -> 0, 10 -> 1, 00 and 11 dropped.
[[nodiscard]] inline Bits von_neumann_extract(const Bits &in) {
    Bits out;
    out.reserve(in.size() / 4);
    for (std::size_t i = 0; i + 1 < in.size(); i += 2) {
        if (in[i] != in[i + 1]) {
            out.push_back(in[i]);
        }
    }
    return out;
}

/// p-value of one test, or the reason none was computed.
struct TestResult {
    std::optional<double> p;
    std::string note;

    [[nodiscard]] static TestResult value(double p) { return {std::clamp(p, 0.0, 1.0), {}}; }
    [[nodiscard]] static TestResult insufficient(std::size_t have, std::size_t need) {
        return {std::nullopt, "insufficient data: " + std::to_string(have) + " bits, need " + std::to_string(need)};
    }
};

namespace tests {

namespace detail {

inline double count_ones(const Bits &b) {
    return static_cast<double>(std::count(b.begin(), b.end(), std::uint8_t{1}));
}

/// Overlapping m-bit pattern counts with wrap-around.
inline std::vector<std::uint64_t> pattern_counts(const Bits &b, unsigned m) {
    std::vector<std::uint64_t> c(std::size_t{1} << m, 0);
    if (m == 0) {
        c[0] = b.size();
        return c;
    }
    const std::size_t n = b.size();
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t v = 0;
        for (unsigned j = 0; j < m; ++j) {
            v = (v << 1) | b[(i + j) % n];
        }
        ++c[v];
    }
    return c;
}

inline double psi_sq(const Bits &b, unsigned m) {
    if (m == 0) {
        return 0.0;
    }
    const auto c = pattern_counts(b, m);
    const double n = static_cast<double>(b.size());
    double s = 0.0;
    for (auto v : c) {
        s += static_cast<double>(v) * static_cast<double>(v);
    }
    return s * std::ldexp(1.0, static_cast<int>(m)) / n - n;
}

inline double phi(const Bits &b, unsigned m) {
    if (m == 0) {
        return 0.0;
    }
    const auto c = pattern_counts(b, m);
    const double n = static_cast<double>(b.size());
    double s = 0.0;
    for (auto v : c) {
        if (v > 0) {
            const double p = static_cast<double>(v) / n;
            s += p * std::log(p);
        }
    }
    return s;
}

} // namespace detail

inline constexpr std::size_t kFrequencyMin = 10;
inline constexpr std::size_t kRunsMin = 10;
inline constexpr std::size_t kCusumsMin = 100;
inline constexpr std::size_t kTwoBitMin = 21;

[[nodiscard]] inline TestResult frequency(const Bits &b) {
    if (b.size() < kFrequencyMin) {
        return TestResult::insufficient(b.size(), kFrequencyMin);
    }
    const double n = static_cast<double>(b.size());
    const double s = 2.0 * detail::count_ones(b) - n;
    return TestResult::value(special::erfc(std::abs(s) / std::sqrt(n) / std::numbers::sqrt2));
}

[[nodiscard]] inline TestResult block_frequency(const Bits &b, std::size_t M = 128) {
    const std::size_t need = std::max<std::size_t>(100, M);
    if (b.size() < need) {
        return TestResult::insufficient(b.size(), need);
    }
    const std::size_t blocks = b.size() / M;
    double chi = 0.0;
    for (std::size_t i = 0; i < blocks; ++i) {
        const auto first = b.begin() + static_cast<std::ptrdiff_t>(i * M);
        const double pi = static_cast<double>(std::count(first, first + static_cast<std::ptrdiff_t>(M), 1)) /
                          static_cast<double>(M);
        chi += (pi - 0.5) * (pi - 0.5);
    }
    chi *= 4.0 * static_cast<double>(M);
    return TestResult::value(special::igamc(static_cast<double>(blocks) / 2.0, chi / 2.0));
}

/// Fails with p = 0 when the frequency pre-test |pi - 1/2| >= 2/sqrt(n) fails.
[[nodiscard]] inline TestResult runs(const Bits &b) {
    if (b.size() < kRunsMin) {
        return TestResult::insufficient(b.size(), kRunsMin);
    }
    const double n = static_cast<double>(b.size());
    const double pi = detail::count_ones(b) / n;
    if (std::abs(pi - 0.5) >= 2.0 / std::sqrt(n)) {
        return {0.0, "frequency pre-test failed"};
    }
    double v = 1.0;
    for (std::size_t i = 1; i < b.size(); ++i) {
        v += b[i] != b[i - 1] ? 1.0 : 0.0;
    }
    const double q = pi * (1.0 - pi);
    return TestResult::value(special::erfc(std::abs(v - 2.0 * n * q) / (2.0 * std::sqrt(2.0 * n) * q)));
}

/// Class layout of the longest-run test for a block length.
struct LongestRunClasses {
    std::size_t M;
    std::size_t min_n;
    unsigned low;  ///< first class is "<= low"
    unsigned high; ///< last class is ">= high"
    std::vector<double> pi;
};

/// P(longest run of ones in an M-bit block <= r).
[[nodiscard]] inline double longest_run_cdf(std::size_t M, unsigned r) {
    // dp[t]: probability of the prefix ending in exactly t ones with no run > r
    std::vector<double> dp(r + 1, 0.0);
    dp[0] = 1.0;
    for (std::size_t i = 0; i < M; ++i) {
        std::vector<double> next(r + 1, 0.0);
        double total = 0.0;
        for (unsigned t = 0; t <= r; ++t) {
            total += dp[t];
            if (t + 1 <= r) {
                next[t + 1] += 0.5 * dp[t];
            }
        }
        next[0] = 0.5 * total;
        dp = std::move(next);
    }
    double s = 0.0;
    for (double v : dp) {
        s += v;
    }
    return s;
}

[[nodiscard]] inline LongestRunClasses longest_run_classes(std::size_t M) {
    LongestRunClasses c{};
    switch (M) {
    case 8:
        c = {8, 128, 1, 4, {}};
        break;
    case 128:
        c = {128, 6272, 4, 9, {}};
        break;
    case 10000:
        c = {10000, 750000, 10, 16, {}};
        break;
    default:
        throw InvalidParameter("longest-run block length must be 8, 128 or 10000");
    }
    double prev = 0.0;
    for (unsigned r = c.low; r < c.high; ++r) {
        const double cdf = longest_run_cdf(M, r);
        c.pi.push_back(cdf - prev);
        prev = cdf;
    }
    c.pi.push_back(1.0 - prev);
    return c;
}

[[nodiscard]] inline TestResult longest_run(const Bits &b, std::size_t M = 128) {
    const auto cls = longest_run_classes(M);
    if (b.size() < cls.min_n) {
        return TestResult::insufficient(b.size(), cls.min_n);
    }
    const std::size_t blocks = b.size() / M;
    std::vector<double> v(cls.pi.size(), 0.0);
    for (std::size_t i = 0; i < blocks; ++i) {
        unsigned run = 0;
        unsigned best = 0;
        for (std::size_t j = 0; j < M; ++j) {
            run = b[i * M + j] ? run + 1 : 0;
            best = std::max(best, run);
        }
        const unsigned clamped = std::clamp(best, cls.low, cls.high);
        v[clamped - cls.low] += 1.0;
    }
    double chi = 0.0;
    const double N = static_cast<double>(blocks);
    for (std::size_t i = 0; i < v.size(); ++i) {
        chi += (v[i] - N * cls.pi[i]) * (v[i] - N * cls.pi[i]) / (N * cls.pi[i]);
    }
    const double K = static_cast<double>(v.size() - 1);
    return TestResult::value(special::igamc(K / 2.0, chi / 2.0));
}

/// All m-bit templates that cannot overlap a shifted copy of themselves.
[[nodiscard]] inline std::vector<Bits> aperiodic_templates(unsigned m) {
    if (m < 2 || m > 16) {
        throw InvalidParameter("template length must be 2..16");
    }
    std::vector<Bits> out;
    for (std::uint32_t v = 0; v < (1U << m); ++v) {
        Bits t(m);
        for (unsigned i = 0; i < m; ++i) {
            t[i] = static_cast<std::uint8_t>((v >> (m - 1 - i)) & 1U);
        }
        bool periodic = false;
        for (unsigned s = 1; s < m && !periodic; ++s) {
            periodic = std::equal(t.begin() + s, t.end(), t.begin());
        }
        if (!periodic) {
            out.push_back(std::move(t));
        }
    }
    return out;
}

inline constexpr std::size_t kTemplateBlocks = 8;
inline constexpr double kTemplateMinMean = 5.0;

/// Non-overlapping template matching for one template over 8 blocks.
[[nodiscard]] inline TestResult template_matching(const Bits &b, const Bits &tpl) {
    const std::size_t m = tpl.size();
    const std::size_t M = b.size() / kTemplateBlocks;
    const double mu = M >= m ? static_cast<double>(M - m + 1) / std::ldexp(1.0, static_cast<int>(m)) : 0.0;
    if (mu < kTemplateMinMean) {
        const auto need = static_cast<std::size_t>(kTemplateMinMean * std::ldexp(1.0, static_cast<int>(m))) + m - 1;
        return TestResult::insufficient(b.size(), need * kTemplateBlocks);
    }
    const double md = static_cast<double>(m);
    const double var =
        static_cast<double>(M) * (1.0 / std::ldexp(1.0, static_cast<int>(m)) - (2.0 * md - 1.0) / std::ldexp(1.0, 2 * static_cast<int>(m)));
    double chi = 0.0;
    for (std::size_t blk = 0; blk < kTemplateBlocks; ++blk) {
        const auto base = b.begin() + static_cast<std::ptrdiff_t>(blk * M);
        double w = 0.0;
        std::size_t i = 0;
        while (i + m <= M) {
            if (std::equal(tpl.begin(), tpl.end(), base + static_cast<std::ptrdiff_t>(i))) {
                w += 1.0;
                i += m;
            } else {
                ++i;
            }
        }
        chi += (w - mu) * (w - mu) / var;
    }
    return TestResult::value(special::igamc(static_cast<double>(kTemplateBlocks) / 2.0, chi / 2.0));
}

/// Template matching over the whole aperiodic set; the smallest p-value is
/// Sidak-corrected for the number of templates.
[[nodiscard]] inline TestResult non_overlapping_templates(const Bits &b, unsigned m = 8) {
    const auto set = aperiodic_templates(m);
    double pmin = 1.0;
    for (const auto &t : set) {
        const auto r = template_matching(b, t);
        if (!r.p) {
            return r;
        }
        pmin = std::min(pmin, *r.p);
    }
    const double T = static_cast<double>(set.size());
    return TestResult::value(-std::expm1(T * std::log1p(-pmin)));
}

struct SerialPValues {
    double p1;
    double p2;
};

[[nodiscard]] inline std::optional<SerialPValues> serial_pvalues(const Bits &b, unsigned m = 2) {
    if (m < 2 || b.size() < 4 || static_cast<double>(m) >= std::floor(std::log2(static_cast<double>(b.size()))) - 2.0) {
        return std::nullopt;
    }
    const double p0 = detail::psi_sq(b, m);
    const double p1 = detail::psi_sq(b, m - 1);
    const double p2 = detail::psi_sq(b, m - 2);
    const double d1 = p0 - p1;
    const double d2 = p0 - 2.0 * p1 + p2;
    return SerialPValues{special::igamc(std::ldexp(1.0, static_cast<int>(m) - 2), std::max(d1, 0.0) / 2.0),
                         special::igamc(std::ldexp(1.0, static_cast<int>(m) - 3), std::max(d2, 0.0) / 2.0)};
}

/// Smaller of the two serial p-values.
[[nodiscard]] inline TestResult serial(const Bits &b, unsigned m = 2) {
    const auto r = serial_pvalues(b, m);
    if (!r) {
        return TestResult::insufficient(b.size(), std::size_t{1} << (m + 3));
    }
    return TestResult::value(std::min(r->p1, r->p2));
}

[[nodiscard]] inline TestResult approximate_entropy(const Bits &b, unsigned m = 2) {
    if (b.size() < 4 || static_cast<double>(m) >= std::floor(std::log2(static_cast<double>(b.size()))) - 5.0) {
        return TestResult::insufficient(b.size(), std::size_t{1} << (m + 6));
    }
    const double n = static_cast<double>(b.size());
    const double apen = detail::phi(b, m) - detail::phi(b, m + 1);
    const double chi = 2.0 * n * (std::numbers::ln2 - apen);
    return TestResult::value(special::igamc(std::ldexp(1.0, static_cast<int>(m) - 1), std::max(chi, 0.0) / 2.0));
}

enum class CusumMode { forward, backward };

[[nodiscard]] inline TestResult cumulative_sums(const Bits &b, CusumMode mode) {
    if (b.size() < kCusumsMin) {
        return TestResult::insufficient(b.size(), kCusumsMin);
    }
    const std::size_t n = b.size();
    long long s = 0;
    long long z = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t idx = mode == CusumMode::forward ? i : n - 1 - i;
        s += b[idx] ? 1 : -1;
        z = std::max(z, s < 0 ? -s : s);
    }
    const double nd = static_cast<double>(n);
    const double zd = static_cast<double>(z);
    const double sq = std::sqrt(nd);
    using special::normal_cdf;
    double sum1 = 0.0;
    for (auto k = static_cast<long long>((-nd / zd + 1.0) / 4.0); k <= static_cast<long long>((nd / zd - 1.0) / 4.0); ++k) {
        const double kd = static_cast<double>(k);
        sum1 += normal_cdf((4.0 * kd + 1.0) * zd / sq) - normal_cdf((4.0 * kd - 1.0) * zd / sq);
    }
    double sum2 = 0.0;
    for (auto k = static_cast<long long>((-nd / zd - 3.0) / 4.0); k <= static_cast<long long>((nd / zd - 1.0) / 4.0); ++k) {
        const double kd = static_cast<double>(k);
        sum2 += normal_cdf((4.0 * kd + 3.0) * zd / sq) - normal_cdf((4.0 * kd + 1.0) * zd / sq);
    }
    return TestResult::value(1.0 - sum1 + sum2);
}

/// Worse of the forward and backward cumulative-sums p-values.
[[nodiscard]] inline TestResult cumulative_sums(const Bits &b) {
    const auto f = cumulative_sums(b, CusumMode::forward);
    if (!f.p) {
        return f;
    }
    const auto r = cumulative_sums(b, CusumMode::backward);
    return TestResult::value(std::min(*f.p, *r.p));
}

/// Two-bit serial test: overlapping pair counts against the single-bit
/// counts, chi-square with 2 degrees of freedom.
[[nodiscard]] inline TestResult two_bit(const Bits &b) {
    if (b.size() < kTwoBitMin) {
        return TestResult::insufficient(b.size(), kTwoBitMin);
    }
    const double n = static_cast<double>(b.size());
    const double n1 = detail::count_ones(b);
    const double n0 = n - n1;
    std::array<double, 4> pair{};
    for (std::size_t i = 0; i + 1 < b.size(); ++i) {
        pair[static_cast<std::size_t>(b[i] * 2 + b[i + 1])] += 1.0;
    }
    double sq = 0.0;
    for (double v : pair) {
        sq += v * v;
    }
    const double x = 4.0 / (n - 1.0) * sq - 2.0 / n * (n0 * n0 + n1 * n1) + 1.0;
    return TestResult::value(special::igamc(1.0, std::max(x, 0.0) / 2.0));
}

} // namespace tests

inline constexpr double kDefaultTheta = 0.001;

struct NamedTest {
    std::string name;
    std::function<TestResult(const Bits &)> run;
};

/// The nine tests in report order.
[[nodiscard]] inline std::vector<NamedTest> standard_tests() {
    return {
        {"Frequency", [](const Bits &b) { return tests::frequency(b); }},
        {"BlockFrequency", [](const Bits &b) { return tests::block_frequency(b); }},
        {"Runs", [](const Bits &b) { return tests::runs(b); }},
        {"LongestRun", [](const Bits &b) { return tests::longest_run(b); }},
        {"NonOverlappingTemplate", [](const Bits &b) { return tests::non_overlapping_templates(b); }},
        {"Serial", [](const Bits &b) { return tests::serial(b); }},
        {"ApproximateEntropy", [](const Bits &b) { return tests::approximate_entropy(b); }},
        {"CumulativeSums", [](const Bits &b) { return tests::cumulative_sums(b); }},
        {"TwoBit", [](const Bits &b) { return tests::two_bit(b); }},
    };
}

struct BatteryEntry {
    std::string test;
    TestResult result;
};

/// p-values of every test on one string; verdicts are derived on demand.
struct BatteryColumn {
    std::string label;
    std::size_t length = 0;
    std::vector<BatteryEntry> entries;

    [[nodiscard]] bool passes(const BatteryEntry &e, double theta) const { return e.result.p && *e.result.p >= theta; }
    [[nodiscard]] std::vector<std::string> failures(double theta) const {
        std::vector<std::string> out;
        for (const auto &e : entries) {
            if (e.result.p && *e.result.p < theta) {
                out.push_back(e.test);
            }
        }
        return out;
    }
    [[nodiscard]] std::vector<std::string> insufficient() const {
        std::vector<std::string> out;
        for (const auto &e : entries) {
            if (!e.result.p) {
                out.push_back(e.test);
            }
        }
        return out;
    }
    [[nodiscard]] bool all_pass(double theta) const { return failures(theta).empty() && insufficient().empty(); }
    [[nodiscard]] const TestResult &at(const std::string &test) const {
        for (const auto &e : entries) {
            if (e.test == test) {
                return e.result;
            }
        }
        throw InvalidParameter("unknown test " + test);
    }
};

[[nodiscard]] inline BatteryColumn battery(const BitString &s) {
    BatteryColumn col;
    col.label = s.origin;
    col.length = s.size();
    for (const auto &t : standard_tests()) {
        col.entries.push_back({t.name, t.run(s.bits)});
    }
    return col;
}

/// Table of p-values: rows are tests, columns are strings.
struct TestReport {
    double theta = kDefaultTheta;
    std::vector<BatteryColumn> columns;

    [[nodiscard]] nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["format_version"] = 1;
        j["theta"] = theta;
        auto labels = nlohmann::ordered_json::array();
        auto lengths = nlohmann::ordered_json::object();
        for (const auto &c : columns) {
            labels.push_back(c.label);
            lengths[c.label] = c.length;
        }
        j["columns"] = labels;
        j["lengths"] = lengths;
        auto rows = nlohmann::ordered_json::array();
        const auto names = standard_tests();
        for (const auto &t : names) {
            nlohmann::ordered_json row;
            row["test"] = t.name;
            auto p = nlohmann::ordered_json::object();
            auto pass = nlohmann::ordered_json::object();
            for (const auto &c : columns) {
                const auto &r = c.at(t.name);
                if (r.p) {
                    p[c.label] = *r.p;
                    pass[c.label] = *r.p >= theta;
                } else {
                    p[c.label] = nullptr;
                    pass[c.label] = r.note;
                }
            }
            row["p_value"] = p;
            row["pass"] = pass;
            rows.push_back(row);
        }
        j["rows"] = rows;
        auto verdicts = nlohmann::ordered_json::object();
        for (const auto &c : columns) {
            verdicts[c.label] = {{"all_pass", c.all_pass(theta)},
                                 {"failures", c.failures(theta)},
                                 {"insufficient_data", c.insufficient()}};
        }
        j["verdicts"] = verdicts;
        return j;
    }
};

} // namespace kcbs

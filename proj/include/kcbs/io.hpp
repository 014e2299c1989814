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
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "kcbs/bounds.hpp"
#include "kcbs/certify.hpp"
#include "kcbs/device.hpp"
#include "kcbs/errors.hpp"
#include "kcbs/estimation.hpp"
#include "kcbs/randtests.hpp"

namespace kcbs::io {

namespace fs = std::filesystem;

inline constexpr int kFormatVersion = 1;

class IoError : public Error {
  public:
    using Error::Error;
};

/// Writes through a temporary file in the same directory, then renames.
inline void write_atomic(const fs::path &path, std::string_view content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) {
            throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
        }
    }
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot open " + tmp.string() + " for writing");
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            throw IoError("failed writing " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

[[nodiscard]] inline std::string read_file(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open " + path.string(), 0);
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_json(const fs::path &path, const nlohmann::ordered_json &j) { write_atomic(path, j.dump(2) + "\n"); }

[[nodiscard]] inline nlohmann::json read_json(const fs::path &path) {
    const auto text = read_file(path);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        // byte offset -> line
        const auto upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n')) + 1;
        throw ParseError(path.string() + ": invalid JSON", line);
    }
}

/// Shortest text that reads back to the same double.
[[nodiscard]] inline std::string format_double(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, r.ptr};
}

namespace detail {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            return out;
        }
        start = pos + 1;
    }
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

inline std::vector<std::string_view> lines(std::string_view text) {
    auto out = split(text, '\n');
    if (!out.empty() && out.back().empty()) {
        out.pop_back();
    }
    return out;
}

template <typename T>
T parse_number(std::string_view field, std::size_t line, const char *what) {
    field = trim(field);
    T v{};
    const auto *end = field.data() + field.size();
    const auto r = std::from_chars(field.data(), end, v);
    if (field.empty() || r.ec != std::errc() || r.ptr != end) {
        throw ParseError(std::string("invalid ") + what + " '" + std::string(field) + "'", line);
    }
    return v;
}

inline Context parse_context(std::string_view fi, std::string_view fj, std::size_t line) {
    const int i = parse_number<int>(fi, line, "observable i");
    const int j = parse_number<int>(fj, line, "observable j");
    try {
        return Context(i, j);
    } catch (const InvalidParameter &) {
        throw ParseError("(" + std::to_string(i) + "," + std::to_string(j) + ") is not a context", line);
    }
}

inline double parse_double(std::string_view field, std::size_t line, const char *what) {
    const double v = parse_number<double>(field, line, what);
    if (!std::isfinite(v)) {
        throw ParseError(std::string("non-finite ") + what, line);
    }
    return v;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Trial logs: CSV plus JSON sidecar

inline constexpr std::string_view kTrialHeader = "trial,i,j,a_i,a_j";

[[nodiscard]] inline fs::path sidecar_path(const fs::path &csv) {
    fs::path p = csv;
    p.replace_extension(".json");
    return p;
}

[[nodiscard]] inline std::string trial_csv(const TrialLog &log) {
    std::string s;
    s.reserve(24 * log.records.size() + 32);
    s += kTrialHeader;
    s += '\n';
    for (const auto &r : log.records) {
        s += std::to_string(r.index);
        s += ',';
        s += static_cast<char>('0' + r.context.first());
        s += ',';
        s += static_cast<char>('0' + r.context.second());
        s += ',';
        s += static_cast<char>('0' + r.outcome.a_i);
        s += ',';
        s += static_cast<char>('0' + r.outcome.a_j);
        s += '\n';
    }
    return s;
}

[[nodiscard]] inline nlohmann::ordered_json trial_sidecar(const TrialLog &log) {
    nlohmann::ordered_json j;
    j["format_version"] = kFormatVersion;
    j["k"] = log.k();
    j["seed"] = log.seed;
    j["distribution"] = distribution_json(log.distribution);
    j["discarded_count"] = log.discarded_count;
    return j;
}

inline void write_trial_log(const fs::path &csv, const TrialLog &log) {
    write_atomic(csv, trial_csv(log));
    write_json(sidecar_path(csv), trial_sidecar(log));
}

[[nodiscard]] inline InputDistribution distribution_from_json(const nlohmann::json &j) {
    try {
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "uniform") {
            return InputDistribution::uniform();
        }
        if (kind == "biased") {
            return InputDistribution::biased(j.at("alpha").get<double>(), j.at("design_k").get<std::uint64_t>());
        }
        if (kind == "custom") {
            return InputDistribution::custom(j.at("weights").get<std::array<double, 5>>());
        }
        throw InvalidParameter("unknown distribution kind '" + kind + "'");
    } catch (const nlohmann::json::exception &e) {
        throw InvalidParameter(std::string("malformed distribution: ") + e.what());
    }
}

/// Records only; distribution and seed stay at their defaults.
[[nodiscard]] inline std::vector<TrialRecord> parse_trial_csv(std::string_view text) {
    const auto rows = detail::lines(text);
    if (rows.empty() || detail::trim(rows[0]) != kTrialHeader) {
        throw ParseError("expected header '" + std::string(kTrialHeader) + "'", 1);
    }
    std::vector<TrialRecord> out;
    out.reserve(rows.size() - 1);
    for (std::size_t n = 1; n < rows.size(); ++n) {
        const std::size_t line = n + 1;
        const auto f = detail::split(rows[n], ',');
        if (f.size() != 5) {
            throw ParseError("expected 5 fields, found " + std::to_string(f.size()), line);
        }
        TrialRecord r;
        r.index = detail::parse_number<std::uint64_t>(f[0], line, "trial index");
        r.context = detail::parse_context(f[1], f[2], line);
        const int a = detail::parse_number<int>(f[3], line, "outcome a_i");
        const int b = detail::parse_number<int>(f[4], line, "outcome a_j");
        if ((a != 0 && a != 1) || (b != 0 && b != 1)) {
            throw ParseError("outcomes must be 0 or 1", line);
        }
        r.outcome = {static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b)};
        out.push_back(r);
    }
    return out;
}

/// Reads a log and its sidecar. Without a sidecar `fallback` supplies the
/// distribution.
[[nodiscard]] inline TrialLog read_trial_log(const fs::path &csv,
                                             const std::optional<InputDistribution> &fallback = std::nullopt) {
    TrialLog log;
    log.records = parse_trial_csv(read_file(csv));
    const auto side = sidecar_path(csv);
    if (fs::exists(side)) {
        const auto j = read_json(side);
        try {
            if (j.at("format_version").get<int>() != kFormatVersion) {
                throw ParseError(side.string() + ": unsupported format_version", 0);
            }
            log.seed = j.at("seed").get<std::uint64_t>();
            log.discarded_count = j.at("discarded_count").get<std::uint64_t>();
            log.distribution = distribution_from_json(j.at("distribution"));
            if (j.at("k").get<std::uint64_t>() != log.k()) {
                throw ParseError(side.string() + ": k does not match the number of CSV rows", 0);
            }
        } catch (const nlohmann::json::exception &e) {
            throw ParseError(side.string() + ": " + e.what(), 0);
        } catch (const InvalidParameter &e) {
            throw ParseError(side.string() + ": " + e.what(), 0);
        }
    } else if (fallback) {
        log.distribution = *fallback;
    } else {
        throw ParseError("missing sidecar " + side.string(), 0);
    }
    return log;
}

// ---------------------------------------------------------------------------
// Probability tables

struct ProbTableFile {
    ProbTable table;
    std::vector<std::string> warnings;
};

/// CSV `i,j,p10,p01,p00[,p11]`, one row per context in any order. Rows more
/// than 2e-3 from unit sum draw a warning, more than 1e-2 an error.
[[nodiscard]] inline ProbTableFile parse_prob_csv(std::string_view text) {
    const auto rows = detail::lines(text);
    if (rows.empty()) {
        throw ParseError("empty probability table", 1);
    }
    const auto header = detail::trim(rows[0]);
    bool with_p11 = false;
    if (header == "i,j,p10,p01,p00,p11") {
        with_p11 = true;
    } else if (header != "i,j,p10,p01,p00") {
        throw ParseError("expected header 'i,j,p10,p01,p00[,p11]'", 1);
    }
    ProbTableFile out;
    std::array<bool, 5> seen{};
    for (std::size_t n = 1; n < rows.size(); ++n) {
        const std::size_t line = n + 1;
        if (detail::trim(rows[n]).empty()) {
            continue;
        }
        const auto f = detail::split(rows[n], ',');
        if (f.size() != (with_p11 ? 6U : 5U)) {
            throw ParseError("wrong number of fields", line);
        }
        const Context ctx = detail::parse_context(f[0], f[1], line);
        if (seen[ctx.index()]) {
            throw ParseError("duplicate context " + ctx.label(), line);
        }
        seen[ctx.index()] = true;
        ProbRow row;
        row.p10 = detail::parse_double(f[2], line, "p10");
        row.p01 = detail::parse_double(f[3], line, "p01");
        row.p00 = detail::parse_double(f[4], line, "p00");
        row.p11 = with_p11 ? detail::parse_double(f[5], line, "p11") : 0.0;
        for (double p : {row.p10, row.p01, row.p00, row.p11}) {
            if (p < 0.0 || p > 1.0) {
                throw ParseError("probability outside [0, 1]", line);
            }
        }
        const double dev = std::abs(row.sum() - 1.0);
        if (dev > kProbRowRejection) {
            throw ParseError("row for " + ctx.label() + " sums to " + format_double(row.sum()), line);
        }
        if (dev > kProbRowTolerance) {
            out.warnings.push_back("row for " + ctx.label() + " (line " + std::to_string(line) + ") sums to " +
                                   format_double(row.sum()));
        }
        out.table.rows[ctx.index()] = row;
    }
    for (std::size_t c = 0; c < 5; ++c) {
        if (!seen[c]) {
            throw ParseError("missing row for context " + Context::from_index(c).label(), rows.size() + 1);
        }
    }
    return out;
}

[[nodiscard]] inline std::string prob_csv(const ProbTable &t) {
    std::string s = "i,j,p10,p01,p00,p11\n";
    for (const auto &ctx : Context::all()) {
        const auto &r = t.rows[ctx.index()];
        s += std::to_string(ctx.first()) + "," + std::to_string(ctx.second()) + "," + format_double(r.p10) + "," +
             format_double(r.p01) + "," + format_double(r.p00) + "," + format_double(r.p11) + "\n";
    }
    return s;
}

// ---------------------------------------------------------------------------
// Curves: TSV `L\tf_ns[\tf_q]` after `#` comment lines

struct CurveTable {
    std::vector<double> L;
    std::vector<double> f_ns;
    std::vector<double> f_q; ///< empty when absent
    std::vector<std::string> comments;
};

[[nodiscard]] inline std::string curve_tsv(const CurveTable &t) {
    std::string s = "# format_version=" + std::to_string(kFormatVersion) + "\n";
    for (const auto &c : t.comments) {
        s += "# " + c + "\n";
    }
    const bool q = !t.f_q.empty();
    s += q ? "L\tf_ns\tf_q\n" : "L\tf_ns\n";
    for (std::size_t i = 0; i < t.L.size(); ++i) {
        s += format_double(t.L[i]) + "\t" + format_double(t.f_ns[i]);
        if (q) {
            s += "\t" + format_double(t.f_q[i]);
        }
        s += "\n";
    }
    return s;
}

[[nodiscard]] inline CurveTable parse_curve_tsv(std::string_view text) {
    const auto rows = detail::lines(text);
    CurveTable t;
    std::size_t n = 0;
    for (; n < rows.size() && !rows[n].empty() && rows[n].front() == '#'; ++n) {
        t.comments.emplace_back(detail::trim(rows[n].substr(1)));
    }
    if (n >= rows.size()) {
        throw ParseError("missing curve header", n + 1);
    }
    const auto header = detail::trim(rows[n]);
    bool q = false;
    if (header == "L\tf_ns\tf_q") {
        q = true;
    } else if (header != "L\tf_ns") {
        throw ParseError("expected header 'L<TAB>f_ns<TAB>f_q'", n + 1);
    }
    for (++n; n < rows.size(); ++n) {
        const std::size_t line = n + 1;
        if (detail::trim(rows[n]).empty()) {
            continue;
        }
        const auto f = detail::split(rows[n], '\t');
        if (f.size() != (q ? 3U : 2U)) {
            throw ParseError("wrong number of columns", line);
        }
        const double L = detail::parse_double(f[0], line, "L");
        if (L < kClassicalBound - 1e-9 || L > kQuantumBound + 1e-9) {
            throw ParseError("L outside [3, 4*sqrt(5)-5]", line);
        }
        if (!t.L.empty() && !(L > t.L.back())) {
            throw ParseError("L values must be strictly increasing", line);
        }
        t.L.push_back(L);
        t.f_ns.push_back(detail::parse_double(f[1], line, "f_ns"));
        if (q) {
            t.f_q.push_back(detail::parse_double(f[2], line, "f_q"));
        }
    }
    if (t.L.empty()) {
        throw ParseError("curve has no rows", rows.size() + 1);
    }
    return t;
}

/// Curve from one column of a TSV: "f_q" gives quantum_reference, "f_ns"
/// gives ns_lp.
[[nodiscard]] inline EntropyCurve curve_from_table(const CurveTable &t, const std::string &column) {
    EntropyCurve c;
    const std::vector<double> *col = nullptr;
    if (column == "f_q") {
        if (t.f_q.empty()) {
            throw ParseError("curve file has no f_q column", 0);
        }
        c.kind = CurveKind::quantum_reference;
        col = &t.f_q;
    } else if (column == "f_ns") {
        c.kind = CurveKind::ns_lp;
        col = &t.f_ns;
    } else {
        throw InvalidParameter("curve column must be f_ns or f_q");
    }
    for (std::size_t i = 0; i < t.L.size(); ++i) {
        c.points.push_back({t.L[i], (*col)[i]});
    }
    return c;
}

// ---------------------------------------------------------------------------
// Bit strings

[[nodiscard]] inline std::string bits_ascii(const Bits &b) {
    std::string s = "# format_version=" + std::to_string(kFormatVersion) + "\n";
    s.reserve(s.size() + b.size() + b.size() / 64 + 1);
    for (std::size_t i = 0; i < b.size(); ++i) {
        s += static_cast<char>('0' + b[i]);
        if (i % 64 == 63 || i + 1 == b.size()) {
            s += '\n';
        }
    }
    return s;
}

/// `bits=<n>` line, then the bits packed most-significant first.
[[nodiscard]] inline std::string bits_packed(const Bits &b) {
    std::string s = "bits=" + std::to_string(b.size()) + "\n";
    std::uint8_t acc = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        acc = static_cast<std::uint8_t>(acc | (b[i] << (7 - i % 8)));
        if (i % 8 == 7 || i + 1 == b.size()) {
            s += static_cast<char>(acc);
            acc = 0;
        }
    }
    return s;
}

/// Accepts either layout.
[[nodiscard]] inline Bits parse_bits(std::string_view text) {
    Bits b;
    if (text.starts_with("bits=")) {
        const auto nl = text.find('\n');
        if (nl == std::string_view::npos) {
            throw ParseError("packed bit file lacks a header line", 1);
        }
        const auto n = detail::parse_number<std::size_t>(text.substr(5, nl - 5), 1, "bit count");
        const auto payload = text.substr(nl + 1);
        if (payload.size() != (n + 7) / 8) {
            throw ParseError("packed payload has " + std::to_string(payload.size()) + " bytes, expected " +
                                 std::to_string((n + 7) / 8),
                             2);
        }
        b.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto byte = static_cast<std::uint8_t>(payload[i / 8]);
            b.push_back(static_cast<std::uint8_t>((byte >> (7 - i % 8)) & 1U));
        }
        return b;
    }
    const auto rows = detail::lines(text);
    for (std::size_t n = 0; n < rows.size(); ++n) {
        const auto row = detail::trim(rows[n]);
        if (!row.empty() && row.front() == '#') {
            continue;
        }
        for (char c : row) {
            if (c != '0' && c != '1') {
                throw ParseError(std::string("unexpected character '") + c + "' in bit file", n + 1);
            }
            b.push_back(static_cast<std::uint8_t>(c - '0'));
        }
    }
    return b;
}

} // namespace kcbs::io

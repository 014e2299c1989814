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

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kcbs/bounds.hpp"
#include "kcbs/certify.hpp"
#include "kcbs/device.hpp"
#include "kcbs/errors.hpp"
#include "kcbs/estimation.hpp"
#include "kcbs/io.hpp"
#include "kcbs/randtests.hpp"

namespace kcbs {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitConfig = 2, kExitParse = 3, kExitNumerical = 4 };

struct RunConfig {
    std::uint64_t seed = 1;
    std::uint64_t k = 100000;

    std::string device = "ideal"; ///< ideal | depolarized | lossy | nchv | nchv-rotating | nchv-adaptive
    double visibility = 1.0;
    double efficiency = 1.0;

    std::string dist = "uniform"; ///< uniform | biased | custom
    double alpha = 6.0;
    std::optional<std::array<double, 5>> weights;

    double delta = 0.001;
    double eps_prime = 0.01;
    std::vector<double> thresholds = default_thresholds();
    std::string accounting = "shannon"; ///< shannon | min_entropy

    std::string curve = "ns"; ///< ns | quantum_reference | file
    std::string curve_file;
    std::string curve_column = "f_q";
    std::size_t grid = 20;
    int restarts = 100;
    std::uint64_t curve_seed = 7;

    double theta = kDefaultTheta;
    std::string out_dir = "out";

    [[nodiscard]] DeviceModel device_model() const {
        if (device == "ideal") {
            return IdealQuantum{};
        }
        if (device == "depolarized") {
            return Depolarized{visibility};
        }
        if (device == "lossy") {
            return LossyQuantum{efficiency};
        }
        if (device == "nchv") {
            return DeterministicNchv{};
        }
        if (device == "nchv-rotating") {
            return DeterministicNchv{{1, 0, 0, 1, 0}, rotating_memory()};
        }
        if (device == "nchv-adaptive") {
            return DeterministicNchv{{1, 0, 0, 1, 0}, adaptive_memory()};
        }
        throw InvalidParameter("unknown device '" + device + "'");
    }

    [[nodiscard]] InputDistribution distribution() const {
        if (dist == "uniform") {
            return InputDistribution::uniform();
        }
        if (dist == "biased") {
            return InputDistribution::biased(alpha, k);
        }
        if (dist == "custom") {
            if (!weights) {
                throw InvalidParameter("custom distribution needs five weights");
            }
            return InputDistribution::custom(*weights);
        }
        throw InvalidParameter("unknown distribution '" + dist + "'");
    }

    [[nodiscard]] CertificationParams cert_params() const {
        CertificationParams p;
        p.delta = delta;
        p.eps_prime = eps_prime;
        p.thresholds = thresholds;
        if (accounting == "shannon") {
            p.accounting = InputAccounting::shannon;
        } else if (accounting == "min_entropy") {
            p.accounting = InputAccounting::min_entropy;
        } else {
            throw InvalidParameter("accounting must be shannon or min_entropy");
        }
        return p;
    }

    [[nodiscard]] QuantumSearchOptions search_options() const {
        QuantumSearchOptions o;
        o.restarts = restarts;
        o.seed = curve_seed;
        return o;
    }

    /// Throws InvalidParameter on the first violated precondition.
    void validate() const {
        if (k == 0) {
            throw InvalidParameter("k must be at least 1");
        }
        validate_model(device_model());
        const auto d = distribution();
        if (!(d.min_weight() > 0.0)) {
            throw InvalidParameter("every context needs positive input probability");
        }
        if (d.min_weight() > 0.2 + 1e-15) {
            throw InvalidParameter("smallest context weight exceeds 0.2");
        }
        cert_params().validate();
        if (curve != "ns" && curve != "quantum_reference" && curve != "file") {
            throw InvalidParameter("curve must be ns, quantum_reference or file");
        }
        if (curve == "file" && curve_file.empty()) {
            throw InvalidParameter("curve 'file' needs a curve file path");
        }
        if (curve_column != "f_q" && curve_column != "f_ns") {
            throw InvalidParameter("curve column must be f_q or f_ns");
        }
        if (grid < 2) {
            throw InvalidParameter("curve grid needs at least two points");
        }
        if (restarts < 1) {
            throw InvalidParameter("restarts must be at least 1");
        }
        if (!(theta > 0.0 && theta < 1.0)) {
            throw InvalidParameter("theta must lie in (0, 1)");
        }
    }

    [[nodiscard]] nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["seed"] = seed;
        j["k"] = k;
        j["device"] = device;
        j["visibility"] = visibility;
        j["efficiency"] = efficiency;
        j["dist"] = dist;
        j["alpha"] = alpha;
        j["weights"] = weights ? nlohmann::ordered_json(*weights) : nlohmann::ordered_json(nullptr);
        j["delta"] = delta;
        j["eps_prime"] = eps_prime;
        j["thresholds"] = thresholds;
        j["accounting"] = accounting;
        j["curve"] = curve;
        j["curve_file"] = curve_file;
        j["curve_column"] = curve_column;
        j["grid"] = grid;
        j["restarts"] = restarts;
        j["curve_seed"] = curve_seed;
        j["theta"] = theta;
        j["out_dir"] = out_dir;
        return j;
    }

    /// Overwrites the fields present in `j`; unknown keys are rejected.
    void merge_json(const nlohmann::json &j) {
        if (!j.is_object()) {
            throw InvalidParameter("config must be a JSON object");
        }
        try {
            for (const auto &[key, v] : j.items()) {
                if (key == "seed") {
                    seed = v.get<std::uint64_t>();
                } else if (key == "k") {
                    k = v.get<std::uint64_t>();
                } else if (key == "device") {
                    device = v.get<std::string>();
                } else if (key == "visibility") {
                    visibility = v.get<double>();
                } else if (key == "efficiency") {
                    efficiency = v.get<double>();
                } else if (key == "dist") {
                    dist = v.get<std::string>();
                } else if (key == "alpha") {
                    alpha = v.get<double>();
                } else if (key == "weights") {
                    if (v.is_null()) {
                        weights.reset();
                    } else {
                        weights = v.get<std::array<double, 5>>();
                    }
                } else if (key == "delta") {
                    delta = v.get<double>();
                } else if (key == "eps_prime") {
                    eps_prime = v.get<double>();
                } else if (key == "thresholds") {
                    thresholds = v.get<std::vector<double>>();
                } else if (key == "accounting") {
                    accounting = v.get<std::string>();
                } else if (key == "curve") {
                    curve = v.get<std::string>();
                } else if (key == "curve_file") {
                    curve_file = v.get<std::string>();
                } else if (key == "curve_column") {
                    curve_column = v.get<std::string>();
                } else if (key == "grid") {
                    grid = v.get<std::size_t>();
                } else if (key == "restarts") {
                    restarts = v.get<int>();
                } else if (key == "curve_seed") {
                    curve_seed = v.get<std::uint64_t>();
                } else if (key == "theta") {
                    theta = v.get<double>();
                } else if (key == "out_dir") {
                    out_dir = v.get<std::string>();
                } else {
                    throw InvalidParameter("unknown config key '" + key + "'");
                }
            }
        } catch (const nlohmann::json::exception &e) {
            throw InvalidParameter(std::string("config type error: ") + e.what());
        }
    }
};

/// Maps toolkit exceptions to exit codes and prints the message.
[[nodiscard]] inline int run_guarded(const std::function<int()> &fn, std::ostream &err) {
    try {
        return fn();
    } catch (const ParseError &e) {
        err << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const NumericalFailure &e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const LpInfeasible &e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const InvalidParameter &e) {
        err << "invalid configuration: " << e.what() << "\n";
        return kExitConfig;
    } catch (const InvalidDistribution &e) {
        err << "invalid configuration: " << e.what() << "\n";
        return kExitConfig;
    } catch (const InvalidState &e) {
        err << "invalid configuration: " << e.what() << "\n";
        return kExitConfig;
    } catch (const OutOfRange &e) {
        err << "invalid configuration: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

// ---------------------------------------------------------------------------
// Commands

struct CurveRequest {
    std::size_t grid = 50;
    int restarts = 100;
    std::uint64_t seed = 7;
    bool ns_only = false;
};

/// L grid, LP-derived f_ns and optional quantum f_q as a table.
[[nodiscard]] inline io::CurveTable build_curve_table(const CurveRequest &req, std::ostream &log) {
    const auto grid = violation_grid(req.grid);
    io::CurveTable t;
    t.L = grid;
    const auto ns = ns_lp_curve(grid);
    for (const auto &p : ns.points) {
        t.f_ns.push_back(p.f);
    }
    t.comments.push_back("f_ns: ns_lp");
    if (req.ns_only) {
        return t;
    }
    QuantumSearchOptions o;
    o.restarts = req.restarts;
    o.seed = req.seed;
    const auto q = quantum_curve(grid, o);
    t.comments.push_back("f_q: quantum_reference restarts=" + std::to_string(req.restarts) +
                         " seed=" + std::to_string(req.seed) + " tolerance=" + io::format_double(o.tolerance));
    if (!q.metadata.flagged.empty()) {
        std::string flagged;
        for (double L : q.metadata.flagged) {
            flagged += (flagged.empty() ? "" : ",") + io::format_double(L);
            log << "warning: quantum search did not converge at L = " << io::format_double(L) << "\n";
        }
        t.comments.push_back("flagged=" + flagged);
    }
    // flagged nodes are filled from the envelope by interpolation
    for (double L : grid) {
        t.f_q.push_back(curve_eval(q, L));
    }
    return t;
}

inline int cmd_curve(const CurveRequest &req, const std::string &out_path, std::ostream &log) {
    if (req.grid < 2) {
        throw InvalidParameter("grid needs at least two points");
    }
    if (req.restarts < 1) {
        throw InvalidParameter("restarts must be at least 1");
    }
    const auto t = build_curve_table(req, log);
    io::write_atomic(out_path, io::curve_tsv(t));
    log << "wrote " << out_path << " (" << t.L.size() << " points)\n";
    return kExitOk;
}

/// Curve selected by the config.
[[nodiscard]] inline EntropyCurve load_curve(const RunConfig &cfg) {
    if (cfg.curve == "ns") {
        return EntropyCurve::ns_analytic();
    }
    if (cfg.curve == "file") {
        return io::curve_from_table(io::parse_curve_tsv(io::read_file(cfg.curve_file)), cfg.curve_column);
    }
    return quantum_curve(violation_grid(cfg.grid), cfg.search_options());
}

inline int cmd_simulate(const RunConfig &cfg, const std::string &out_path, std::ostream &log) {
    cfg.validate();
    const auto trial_log = run_experiment(cfg.device_model(), cfg.distribution(), cfg.k, cfg.seed);
    io::write_trial_log(out_path, trial_log);
    log << "wrote " << out_path << " (k = " << trial_log.k() << ", L_hat = " << io::format_double(violation_from_log(trial_log))
        << ")\n";
    return kExitOk;
}

[[nodiscard]] inline nlohmann::ordered_json certify_json(const CertificationReport &rep, const RunConfig &cfg,
                                                         const std::string &source) {
    auto j = to_json(rep);
    j["source"] = source;
    j["config"] = cfg.to_json();
    return j;
}

/// Certifies a trial log, or a probability table when `from_probs` is set.
inline int cmd_certify(const RunConfig &cfg, const std::string &in_path, bool from_probs, const std::string &out_path,
                       std::ostream &log) {
    cfg.validate();
    const auto params = cfg.cert_params();
    if (from_probs) {
        const auto pt = io::parse_prob_csv(io::read_file(in_path));
        for (const auto &w : pt.warnings) {
            log << "warning: " << w << "\n";
        }
        const double L_hat = violation_from_probs(pt.table);
        const auto curve = load_curve(cfg);
        const auto rep = min_entropy_bound(L_hat, cfg.k, cfg.distribution(), params, curve);
        auto j = certify_json(rep, cfg, in_path);
        j["probability_table_warnings"] = pt.warnings;
        io::write_json(out_path, j);
        log << "L_hat = " << io::format_double(L_hat) << ", bound = " << io::format_double(rep.entropy_bound_bits)
            << " bits\n";
        return kExitOk;
    }
    const auto trial_log = io::read_trial_log(in_path);
    const auto curve = load_curve(cfg);
    const auto rep = certify_log(trial_log, params, curve);
    io::write_json(out_path, certify_json(rep, cfg, in_path));
    log << "L_hat = " << io::format_double(rep.L_hat) << ", bound = " << io::format_double(rep.entropy_bound_bits)
        << " bits, net = " << io::format_double(rep.net_bits) << " bits\n";
    for (const auto &n : rep.notes) {
        log << "note: " << n << "\n";
    }
    return kExitOk;
}

struct StreamSet {
    BitString s1;
    BitString s2;
    BitString st;
};

/// a_i stream, a_j stream, and both interleaved per trial.
[[nodiscard]] inline StreamSet output_streams(const TrialLog &log) {
    StreamSet s{{{}, "S1"}, {{}, "S2"}, {{}, "St"}};
    s.s1.bits.reserve(log.k());
    s.s2.bits.reserve(log.k());
    s.st.bits.reserve(2 * log.k());
    for (const auto &r : log.records) {
        s.s1.bits.push_back(r.outcome.a_i);
        s.s2.bits.push_back(r.outcome.a_j);
        s.st.bits.push_back(r.outcome.a_i);
        s.st.bits.push_back(r.outcome.a_j);
    }
    return s;
}

/// Extracted S1 and S2 plus raw St, each through the battery.
[[nodiscard]] inline TestReport extract_and_test(const TrialLog &log, double theta,
                                                 std::vector<BitString> *strings = nullptr) {
    const auto s = output_streams(log);
    std::vector<BitString> cols{{von_neumann_extract(s.s1.bits), "S1_ext"},
                                {von_neumann_extract(s.s2.bits), "S2_ext"},
                                s.st};
    TestReport rep;
    rep.theta = theta;
    for (const auto &c : cols) {
        rep.columns.push_back(battery(c));
    }
    if (strings != nullptr) {
        *strings = std::move(cols);
    }
    return rep;
}

inline int cmd_extract_test(const std::string &log_path, double theta, const std::string &out_dir, bool packed,
                            std::ostream &log) {
    if (!(theta > 0.0 && theta < 1.0)) {
        throw InvalidParameter("theta must lie in (0, 1)");
    }
    const auto trial_log = io::read_trial_log(log_path);
    std::vector<BitString> strings;
    const auto rep = extract_and_test(trial_log, theta, &strings);
    const io::fs::path dir(out_dir);
    for (const auto &s : strings) {
        io::write_atomic(dir / (s.origin + ".bits"), packed ? io::bits_packed(s.bits) : io::bits_ascii(s.bits));
    }
    io::write_json(dir / "test_report.json", rep.to_json());
    for (const auto &c : rep.columns) {
        log << c.label << " (" << c.length << " bits): " << (c.all_pass(theta) ? "all pass" : "failures");
        for (const auto &f : c.failures(theta)) {
            log << " " << f;
        }
        for (const auto &f : c.insufficient()) {
            log << " " << f << "(insufficient data)";
        }
        log << "\n";
    }
    return kExitOk;
}

/// simulate, certify, extract and test; writes everything under out_dir.
inline int cmd_pipeline(const RunConfig &cfg, bool dry_run, std::ostream &log) {
    cfg.validate();
    if (dry_run) {
        log << "configuration valid\n";
        return kExitOk;
    }
    const io::fs::path dir(cfg.out_dir);
    const auto log_path = (dir / "trials.csv").string();
    if (const int rc = cmd_simulate(cfg, log_path, log); rc != kExitOk) {
        return rc;
    }
    const auto trial_log = io::read_trial_log(log_path);
    const auto curve = load_curve(cfg);
    const auto cert = certify_log(trial_log, cfg.cert_params(), curve);
    io::write_json(dir / "certification.json", certify_json(cert, cfg, log_path));

    std::vector<BitString> strings;
    const auto tests = extract_and_test(trial_log, cfg.theta, &strings);
    for (const auto &s : strings) {
        io::write_atomic(dir / (s.origin + ".bits"), io::bits_ascii(s.bits));
    }
    io::write_json(dir / "test_report.json", tests.to_json());

    nlohmann::ordered_json summary;
    summary["format_version"] = io::kFormatVersion;
    summary["config"] = cfg.to_json();
    summary["L_hat"] = cert.L_hat;
    summary["entropy_bound_bits"] = cert.entropy_bound_bits;
    summary["input_entropy_bits"] = cert.input_entropy_bits;
    summary["net_bits"] = cert.net_bits;
    summary["net_bits_shannon"] = cert.net_bits_shannon;
    summary["net_bits_min_entropy"] = cert.net_bits_min_entropy;
    summary["net_positive"] = cert.net_bits > 0.0;
    auto verdicts = nlohmann::ordered_json::object();
    for (const auto &c : tests.columns) {
        verdicts[c.label] = c.all_pass(cfg.theta);
    }
    summary["battery_all_pass"] = verdicts;
    io::write_json(dir / "summary.json", summary);

    log << "L_hat = " << io::format_double(cert.L_hat) << "\n"
        << "entropy bound = " << io::format_double(cert.entropy_bound_bits) << " bits\n"
        << "net (" << to_string(cert.accounting) << ") = " << io::format_double(cert.net_bits) << " bits"
        << (cert.net_bits > 0.0 ? "" : " [not positive]") << "\n"
        << "net (shannon) = " << io::format_double(cert.net_bits_shannon)
        << " bits, net (min_entropy) = " << io::format_double(cert.net_bits_min_entropy) << " bits\n";
    return kExitOk;
}

} // namespace kcbs

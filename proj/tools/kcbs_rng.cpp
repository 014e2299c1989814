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

#include <array>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "kcbs/pipeline.hpp"

namespace {

using kcbs::RunConfig;

/// Config flags of one subcommand; applied on top of the JSON config only
/// when given on the command line.
class ConfigFlags {
  public:
    explicit ConfigFlags(CLI::App *app) : app_(app) {
        app_->add_option("--config", config_path_, "JSON config file (flags override it)");
    }

    template <typename T>
    void add(const std::string &name, const std::string &help, T RunConfig::*field) {
        auto value = std::make_shared<T>(RunConfig{}.*field);
        auto *opt = app_->add_option(name, *value, help);
        setters_.emplace_back(opt, [value, field](RunConfig &c) { c.*field = *value; });
    }

    void add_weights() {
        auto value = std::make_shared<std::vector<double>>();
        auto *opt = app_->add_option("--weights", *value, "five context weights for --dist custom")->expected(5);
        setters_.emplace_back(opt, [value](RunConfig &c) {
            std::array<double, 5> w{};
            std::copy(value->begin(), value->end(), w.begin());
            c.weights = w;
        });
    }

    void add_run() {
        add("--seed", "master seed", &RunConfig::seed);
        add("--k", "number of trials", &RunConfig::k);
        add("--device", "ideal | depolarized | lossy | nchv | nchv-rotating | nchv-adaptive", &RunConfig::device);
        add("--visibility", "depolarized device visibility", &RunConfig::visibility);
        add("--efficiency", "lossy device detection efficiency", &RunConfig::efficiency);
        add_dist();
    }

    void add_dist() {
        add("--dist", "uniform | biased | custom", &RunConfig::dist);
        add("--alpha", "bias parameter of --dist biased", &RunConfig::alpha);
        add_weights();
    }

    void add_certify() {
        add("--delta", "probability floor delta", &RunConfig::delta);
        add("--eps-prime", "Azuma failure probability", &RunConfig::eps_prime);
        add("--thresholds", "violation thresholds L_m", &RunConfig::thresholds);
        add("--accounting", "shannon | min_entropy input accounting", &RunConfig::accounting);
        add("--curve", "ns | quantum_reference | file", &RunConfig::curve);
        add("--curve-file", "TSV curve for --curve file", &RunConfig::curve_file);
        add("--curve-column", "f_q | f_ns column of --curve-file", &RunConfig::curve_column);
        add("--grid", "grid size of a computed quantum curve", &RunConfig::grid);
        add("--restarts", "restarts per grid point of a computed quantum curve", &RunConfig::restarts);
        add("--curve-seed", "seed of a computed quantum curve", &RunConfig::curve_seed);
    }

    [[nodiscard]] RunConfig resolve() const {
        RunConfig cfg;
        if (!config_path_.empty()) {
            cfg.merge_json(kcbs::io::read_json(config_path_));
        }
        for (const auto &[opt, set] : setters_) {
            if (opt->count() > 0) {
                set(cfg);
            }
        }
        return cfg;
    }

  private:
    CLI::App *app_;
    std::string config_path_;
    std::vector<std::pair<CLI::Option *, std::function<void(RunConfig &)>>> setters_;
};

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Contextuality-certified randomness toolkit"};
    app.require_subcommand(1);

    auto *sim = app.add_subcommand("simulate", "simulate a device and write a trial log");
    ConfigFlags sim_flags(sim);
    sim_flags.add_run();
    std::string sim_out = "trials.csv";
    sim->add_option("--out", sim_out, "trial log CSV (sidecar JSON next to it)");

    auto *curve = app.add_subcommand("curve", "tabulate f_ns and the quantum reference f_q");
    kcbs::CurveRequest curve_req;
    std::string curve_out = "curve.tsv";
    curve->add_option("--grid", curve_req.grid, "number of grid points")->capture_default_str();
    curve->add_option("--restarts", curve_req.restarts, "restarts per grid point")->capture_default_str();
    curve->add_option("--seed", curve_req.seed, "search seed")->capture_default_str();
    curve->add_flag("--ns-only", curve_req.ns_only, "skip the quantum column");
    curve->add_option("--out", curve_out, "output TSV");

    auto *cert = app.add_subcommand("certify", "certify a trial log or probability table");
    ConfigFlags cert_flags(cert);
    cert_flags.add_certify();
    cert_flags.add("--k", "trial count for --from-probs", &RunConfig::k);
    cert_flags.add_dist();
    std::string cert_in;
    std::string cert_out = "certification.json";
    bool from_probs = false;
    cert->add_option("input", cert_in, "trial log CSV or probability CSV")->required();
    cert->add_flag("--from-probs", from_probs, "input is an i,j,p10,p01,p00[,p11] table");
    cert->add_option("--out", cert_out, "report JSON");

    auto *ext = app.add_subcommand("extract-test", "extract output bits and run the test battery");
    std::string ext_in;
    std::string ext_dir = "bits";
    double theta = kcbs::kDefaultTheta;
    bool packed = false;
    ext->add_option("input", ext_in, "trial log CSV")->required();
    ext->add_option("--theta", theta, "pass threshold on p-values")->capture_default_str();
    ext->add_option("--out-dir", ext_dir, "directory for bit files and test_report.json");
    ext->add_flag("--packed", packed, "write packed binary bit files");

    auto *pipe = app.add_subcommand("pipeline", "simulate, certify, extract and test in one run");
    ConfigFlags pipe_flags(pipe);
    pipe_flags.add_run();
    pipe_flags.add_certify();
    pipe_flags.add("--theta", "pass threshold on p-values", &RunConfig::theta);
    pipe_flags.add("--out-dir", "output directory", &RunConfig::out_dir);
    bool dry_run = false;
    pipe->add_flag("--dry-run", dry_run, "validate the configuration only");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        (void)app.exit(e);
        return kcbs::kExitConfig;
    }

    auto &out = std::cout;
    auto &err = std::cerr;
    return kcbs::run_guarded(
        [&]() -> int {
            if (sim->parsed()) {
                return kcbs::cmd_simulate(sim_flags.resolve(), sim_out, out);
            }
            if (curve->parsed()) {
                return kcbs::cmd_curve(curve_req, curve_out, out);
            }
            if (cert->parsed()) {
                return kcbs::cmd_certify(cert_flags.resolve(), cert_in, from_probs, cert_out, out);
            }
            if (ext->parsed()) {
                return kcbs::cmd_extract_test(ext_in, theta, ext_dir, packed, out);
            }
            return kcbs::cmd_pipeline(pipe_flags.resolve(), dry_run, out);
        },
        err);
}

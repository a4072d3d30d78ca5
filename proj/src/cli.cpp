/*
 * Copyright 2026 The growarch Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "growarch/cli.hpp"

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "growarch/config.hpp"
#include "growarch/errors.hpp"
#include "growarch/feature_io.hpp"
#include "growarch/gaussian.hpp"
#include "growarch/gate.hpp"
#include "growarch/orchestrator.hpp"
#include "growarch/seed.hpp"

namespace growarch {

namespace {

struct CommonArgs {
    std::string config;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<double> epsilon;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--config", a.config, "Config file (key=value lines)")->check(CLI::ExistingFile);
    cmd->add_option("--set", a.sets, "Override one key, KEY=VALUE (repeatable)");
    cmd->add_option("--seed", a.seed, "Master seed (default 0)");
}

RunConfig resolve_config(const CommonArgs& a) {
    RunConfig cfg = a.config.empty() ? RunConfig{} : load_config(a.config);
    for (const auto& s : a.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw InvalidConfig("--set expects KEY=VALUE, got '" + s + "'");
        apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1), "--set");
    }
    if (a.seed) cfg.seed = *a.seed;
    if (a.epsilon) cfg.gate.epsilon = *a.epsilon;
    cfg.validate();
    return cfg;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path.string());
    f << j.dump(2) << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Growing-data architecture adaptation engine", "growarch"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Help for every command");

    CommonArgs common;

    auto* simulate = app.add_subcommand("simulate", "Write the snapshots of a growth plan as CSV + meta files");
    add_common(simulate, common);
    simulate->add_option("--out", common.out, "Output directory")->required();

    std::string path_a, path_b;
    bool with_js = false;
    int js_samples = 20000;
    auto* distance = app.add_subcommand("distance", "Squared W2 between the Gaussian fits of two feature CSVs");
    distance->add_option("first", path_a, "Feature CSV")->required()->check(CLI::ExistingFile);
    distance->add_option("second", path_b, "Feature CSV")->required()->check(CLI::ExistingFile);
    distance->add_flag("--js", with_js, "Also print the Monte Carlo Jensen-Shannon divergence");
    distance->add_option("--js-samples", js_samples, "Monte Carlo samples for --js");
    distance->add_option("--seed", common.seed, "Seed for --js (default 0)");

    std::string arch_text;
    auto* gate = app.add_subcommand("gate", "Accuracy drop of an architecture between two snapshots");
    add_common(gate, common);
    gate->add_option("previous", path_a, "Previous snapshot CSV (with .meta sidecar)")->required()->check(CLI::ExistingFile);
    gate->add_option("current", path_b, "Current snapshot CSV (with .meta sidecar)")->required()->check(CLI::ExistingFile);
    gate->add_option("--arch", arch_text, "Architecture to test (default: run.initial_arch on the previous snapshot)");
    gate->add_option("--epsilon", common.epsilon, "Gate threshold");

    auto* adapt = app.add_subcommand("adapt", "Run the adaptation loop over the growth plan");
    add_common(adapt, common);
    adapt->add_option("--out", common.out, "Directory for records.json, traces and controller weights");
    adapt->add_option("--epsilon", common.epsilon, "Gate threshold");

    int oracle_t = 0;
    double oracle_shift = 0;
    std::string oracle_prev;
    auto* oracle = app.add_subcommand("oracle", "Exhaustive search on one snapshot of the plan");
    add_common(oracle, common);
    oracle->add_option("--t", oracle_t, "Snapshot time step, 1-based (default: last)");
    auto* prev_opt = oracle->add_option("--prev", oracle_prev, "Previous architecture; switches to the reward objective");
    oracle->add_option("--shift", oracle_shift, "Shift d_t for the reward objective")->needs(prev_opt);

    auto* sweep = app.add_subcommand("sweep-lambda", "Adapted architecture per lambda in sweep.lambdas");
    add_common(sweep, common);
    sweep->add_option("--out", common.out, "Write sweep.json into this directory");

    auto* ablate = app.add_subcommand("ablate-wd", "Run the loop with and without the shift penalty");
    add_common(ablate, common);
    ablate->add_option("--out", common.out, "Write ablation.json into this directory");

    std::string records_path;
    auto* report = app.add_subcommand("report", "Summary table for a records.json");
    report->add_option("records", records_path, "records.json of a run")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return kExitUsage;
    }

    try {
        if (simulate->parsed()) {
            const RunConfig cfg = resolve_config(common);
            GrowthPlan plan = cfg.plan;
            plan.seed = plan_seed(cfg.seed);
            std::filesystem::create_directories(common.out);
            for (std::size_t s = 0; s < plan.steps.size(); ++s) {
                const Snapshot snap = gen_snapshot(plan, s);
                const auto stem = std::filesystem::path(common.out) / ("snapshot_t" + std::to_string(snap.meta.t));
                write_snapshot(snap, stem);
                out << stem.string() << ".csv rows=" << snap.meta.n_samples << " classes=" << snap.meta.n_classes
                    << '\n';
            }
        } else if (distance->parsed()) {
            const auto a = fit_gaussian(read_feature_csv(path_a));
            const auto b = fit_gaussian(read_feature_csv(path_b));
            out << "d=" << fmt("%.6f", wasserstein2_gaussian(b, a));
            if (with_js) {
                const auto seed = derive_seed(common.seed.value_or(0), 0, SeedPurpose::distance);
                out << " js=" << fmt("%.6f", js_divergence_mc(b, a, js_samples, seed));
            }
            out << '\n';
        } else if (gate->parsed()) {
            const RunConfig cfg = resolve_config(common);
            const SnapshotMeta prev = read_snapshot(path_a).meta;
            const SnapshotMeta cur = read_snapshot(path_b).meta;
            RunConfig arch_cfg = cfg;
            if (!arch_text.empty()) arch_cfg.initial_arch = arch_text;
            const Architecture arch = initial_architecture(arch_cfg, prev);
            const SurrogateEvaluator eval(cfg.space, cfg.surrogate);
            const double h = accuracy_drop(arch, prev, cur, eval);
            out << "H_t=" << fmt("%.4f", h) << " adapt=" << (should_adapt(h, cfg.gate) ? "true" : "false") << '\n';
        } else if (adapt->parsed()) {
            const RunConfig cfg = resolve_config(common);
            const RunResult run = run_adaptation(cfg);
            if (!common.out.empty()) write_run(cfg, run, common.out);
            out << render_report(records_json(cfg, run));
        } else if (oracle->parsed()) {
            const RunConfig cfg = resolve_config(common);
            const int t = oracle_t == 0 ? static_cast<int>(cfg.plan.steps.size()) : oracle_t;
            const SnapshotMeta meta = cfg.plan.meta_at(static_cast<std::size_t>(t - 1));
            const OracleObjective objective =
                oracle_prev.empty()
                    ? OracleObjective::accuracy()
                    : OracleObjective::reward(decode(oracle_prev, cfg.space), oracle_shift, cfg.trainer.lambda);
            const OracleResult best = oracle_best(cfg.space, meta, cfg.surrogate, objective);
            out << "arch=" << encode(best.arch) << " accuracy=" << fmt("%.6f", best.accuracy)
                << " madds=" << fmt("%.3f", best.madds) << " objective=" << fmt("%.6f", best.objective) << '\n';
        } else if (sweep->parsed()) {
            const RunConfig cfg = resolve_config(common);
            const auto rows = lambda_sweep(cfg, cfg.sweep_lambdas);
            nlohmann::json j = nlohmann::json::array();
            for (const auto& r : rows) {
                out << "lambda=" << fmt("%g", r.lambda) << " accuracy=" << fmt("%.6f", r.accuracy)
                    << " madds=" << fmt("%.3f", r.madds) << " arch=" << encode(r.arch) << '\n';
                j.push_back({{"lambda", r.lambda},
                             {"arch", encode(r.arch)},
                             {"accuracy", r.accuracy},
                             {"madds", r.madds},
                             {"shift", r.shift}});
            }
            if (!common.out.empty()) write_json(j, std::filesystem::path(common.out) / "sweep.json");
        } else if (ablate->parsed()) {
            const RunConfig cfg = resolve_config(common);
            const AblationResult res = wd_ablation(cfg);
            nlohmann::json j;
            auto summarize = [&](const char* label, const RunResult& run) {
                nlohmann::json rows = nlohmann::json::array();
                for (const auto& r : run.records) {
                    out << label << " t=" << r.t << " adapted=" << (r.adapted ? "yes" : "no")
                        << " V=" << fmt("%.6f", r.v_new) << " madds=" << fmt("%.3f", r.madds_new)
                        << " arch=" << encode(r.new_arch) << '\n';
                    rows.push_back({{"t", r.t},
                                    {"adapted", r.adapted},
                                    {"arch", encode(r.new_arch)},
                                    {"accuracy", r.v_new},
                                    {"madds", r.madds_new}});
                }
                j[label] = rows;
            };
            summarize("with_penalty", res.with_penalty);
            summarize("without_penalty", res.without_penalty);
            if (!common.out.empty()) write_json(j, std::filesystem::path(common.out) / "ablation.json");
        } else if (report->parsed()) {
            std::ifstream f(records_path);
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(f);
            } catch (const nlohmann::json::exception& e) {
                throw IoError(records_path + ": " + e.what());
            }
            out << render_report(j);
        }
    } catch (const InvalidConfig& e) {
        err << "config error: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const nlohmann::json::exception& e) {
        err << "error: malformed records: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

}  // namespace growarch

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

#include "growarch/orchestrator.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "growarch/errors.hpp"
#include "growarch/gate.hpp"
#include "growarch/seed.hpp"

namespace growarch {

namespace {

struct PreparedPlan {
    GrowthPlan plan;
    std::vector<SnapshotMeta> metas;
    std::vector<GaussianSummaryd> fits;
};

PreparedPlan prepare(const RunConfig& cfg, const FeatureExtractor& extract) {
    PreparedPlan out;
    out.plan = cfg.plan;
    out.plan.seed = plan_seed(cfg.seed);
    for (std::size_t s = 0; s < out.plan.steps.size(); ++s) {
        const Snapshot snap = gen_snapshot(out.plan, s);
        out.metas.push_back(snap.meta);
        out.fits.push_back(fit_snapshot(snap, extract));
    }
    return out;
}

std::vector<double> resolve_edges(const RunConfig& cfg, const std::vector<GaussianSummaryd>& fits) {
    if (!cfg.trainer.bucket_edges.empty()) return cfg.trainer.bucket_edges;
    return bucket_edges_for(fits, cfg.controller.buckets);
}

}  // namespace

std::uint64_t plan_seed(std::uint64_t master) { return derive_seed(master, 0, SeedPurpose::data); }

GaussianSummaryd fit_snapshot(const Snapshot& s, const FeatureExtractor& extract) {
    return fit_gaussian(extract(s));
}

std::vector<double> bucket_edges_for(const std::vector<GaussianSummaryd>& fits, int buckets) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0;
    for (std::size_t i = 0; i < fits.size(); ++i) {
        for (std::size_t j = i + 1; j < fits.size(); ++j) {
            const double d = wasserstein2_gaussian(fits[j], fits[i]);
            if (d > 0) {
                lo = std::min(lo, d);
                hi = std::max(hi, d);
            }
        }
    }
    if (!(hi > lo)) return default_bucket_edges(buckets);
    return log_spaced_edges(lo, hi, buckets);
}

Architecture initial_architecture(const RunConfig& cfg, const SnapshotMeta& meta) {
    if (cfg.initial_arch != "oracle") return decode(cfg.initial_arch, cfg.space);
    try {
        return oracle_best(cfg.space, meta, cfg.surrogate, OracleObjective::accuracy()).arch;
    } catch (const SpaceTooLarge& e) {
        throw InvalidConfig(std::string("run.initial_arch=oracle: ") + e.what() +
                            "; set run.initial_arch to an encoded architecture");
    }
}

RunResult run_adaptation(const RunConfig& cfg, const FeatureExtractor& extract) {
    cfg.validate();
    const PreparedPlan prepared = prepare(cfg, extract);
    const SurrogateEvaluator eval(cfg.space, cfg.surrogate);

    RunResult run;
    run.bucket_edges = resolve_edges(cfg, prepared.fits);
    run.initial_arch = initial_architecture(cfg, prepared.metas.front());
    run.initial_accuracy = eval.accuracy(run.initial_arch, prepared.metas.front());
    run.params = ControllerParams::random(cfg.space, cfg.controller, derive_seed(cfg.seed, 0, SeedPurpose::controller_init));

    Architecture current = run.initial_arch;
    for (std::size_t s = 1; s < prepared.metas.size(); ++s) {
        const int t = static_cast<int>(s) + 1;
        const auto started = std::chrono::steady_clock::now();
        try {
            AdaptationRecord rec;
            rec.t = t;
            rec.prev_arch = current;
            rec.shift = wasserstein2_gaussian(prepared.fits[s], prepared.fits[s - 1]);
            rec.drop = accuracy_drop(current, prepared.metas[s - 1], prepared.metas[s], eval);
            rec.adapted = should_adapt(rec.drop, cfg.gate);
            if (rec.adapted) {
                TrainerConfig tcfg = cfg.trainer;
                tcfg.bucket_edges = run.bucket_edges;
                tcfg.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(t), SeedPurpose::controller_train);
                auto trained = train(run.params, current, rec.shift, prepared.metas[s], eval, cfg.space, tcfg);
                rec.trace = std::move(trained.trace);
                rec.new_arch =
                    greedy_decode(run.params, make_input(current, rec.shift, run.bucket_edges, cfg.space), cfg.space);
            } else {
                rec.new_arch = current;
            }
            rec.v_prev = eval.accuracy(rec.prev_arch, prepared.metas[s]);
            rec.v_new = eval.accuracy(rec.new_arch, prepared.metas[s]);
            rec.madds_prev = madds(rec.prev_arch, cfg.space);
            rec.madds_new = madds(rec.new_arch, cfg.space);
            rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
            current = rec.new_arch;
            run.records.push_back(std::move(rec));
        } catch (const Error& e) {
            throw Error("adaptation step t=" + std::to_string(t) + " failed: " + e.what());
        }
    }
    return run;
}

namespace {

std::string trace_name(int t) { return "trace_t" + std::to_string(t) + ".csv"; }

}  // namespace

nlohmann::json records_json(const RunConfig& cfg, const RunResult& run) {
    nlohmann::json j;
    nlohmann::json config = nlohmann::json::object();
    for (const auto& [key, value] : config_entries(cfg)) config[key] = value;
    j["config"] = config;
    j["initial_arch"] = encode(run.initial_arch);
    j["initial_accuracy"] = run.initial_accuracy;
    j["initial_madds"] = madds(run.initial_arch, cfg.space);
    j["bucket_edges"] = run.bucket_edges;
    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : run.records) {
        nlohmann::json rec;
        rec["t"] = r.t;
        rec["shift"] = r.shift;
        rec["drop"] = r.drop;
        rec["adapted"] = r.adapted;
        rec["prev_arch"] = encode(r.prev_arch);
        rec["new_arch"] = encode(r.new_arch);
        rec["v_prev"] = r.v_prev;
        rec["v_new"] = r.v_new;
        rec["madds_prev"] = r.madds_prev;
        rec["madds_new"] = r.madds_new;
        rec["trace_file"] = r.adapted ? nlohmann::json(trace_name(r.t)) : nlohmann::json(nullptr);
        rec["iterations"] = r.trace.size();
        records.push_back(std::move(rec));
    }
    j["records"] = std::move(records);
    return j;
}

void write_run(const RunConfig& cfg, const RunResult& run, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "records.json", std::ios::binary);
        if (!out) throw IoError("cannot write " + (dir / "records.json").string());
        out << records_json(cfg, run).dump(2) << '\n';
    }
    {
        nlohmann::json timings = nlohmann::json::array();
        for (const auto& r : run.records) timings.push_back({{"t", r.t}, {"seconds", r.seconds}});
        std::ofstream out(dir / "timings.json", std::ios::binary);
        out << timings.dump(2) << '\n';
    }
    for (const auto& r : run.records) {
        if (r.adapted) write_trace_csv(r.trace, dir / trace_name(r.t));
    }
    save_params(run.params, dir / "controller.axpt");
}

std::vector<DistanceRow> compare_distance_metrics(const GrowthPlan& plan, std::size_t base_step,
                                                  const std::vector<std::uint64_t>& seeds, int js_samples) {
    plan.validate();
    if (base_step >= plan.steps.size()) throw InvalidStep("base step out of range");
    if (seeds.empty()) throw InvalidConfig("need at least one seed");
    std::vector<DistanceRow> rows;
    for (std::size_t s = base_step; s < plan.steps.size(); ++s) rows.push_back({static_cast<int>(s), 0.0, 0.0});

    for (std::uint64_t seed : seeds) {
        GrowthPlan p = plan;
        p.seed = seed;
        const GaussianSummaryd base = fit_snapshot(gen_snapshot(p, base_step));
        for (std::size_t s = base_step; s < plan.steps.size(); ++s) {
            const GaussianSummaryd cur = fit_snapshot(gen_snapshot(p, s));
            auto& row = rows[s - base_step];
            row.w2 += wasserstein2_gaussian(cur, base);
            row.js += js_divergence_mc(cur, base, js_samples, derive_seed(seed, s, SeedPurpose::distance));
        }
    }
    for (auto& row : rows) {
        row.w2 /= static_cast<double>(seeds.size());
        row.js /= static_cast<double>(seeds.size());
    }
    return rows;
}

std::vector<SweepRow> lambda_sweep(const RunConfig& cfg, const std::vector<double>& lambdas) {
    cfg.validate();
    if (lambdas.size() < 2) throw InvalidConfig("lambda sweep needs at least two values");
    if (cfg.plan.steps.size() < 2) throw InvalidConfig("lambda sweep needs a plan with at least two steps");
    const PreparedPlan prepared = prepare(cfg, identity_features);
    const SurrogateEvaluator eval(cfg.space, cfg.surrogate);
    const auto edges = resolve_edges(cfg, prepared.fits);
    const Architecture prev = initial_architecture(cfg, prepared.metas[0]);
    const double shift = wasserstein2_gaussian(prepared.fits[1], prepared.fits[0]);
    const auto init = ControllerParams::random(cfg.space, cfg.controller, derive_seed(cfg.seed, 0, SeedPurpose::controller_init));

    std::vector<SweepRow> rows;
    for (double lambda : lambdas) {
        ControllerParams params = init;
        TrainerConfig tcfg = cfg.trainer;
        tcfg.lambda = lambda;
        tcfg.bucket_edges = edges;
        tcfg.seed = derive_seed(cfg.seed, 2, SeedPurpose::controller_train);
        train(params, prev, shift, prepared.metas[1], eval, cfg.space, tcfg);
        SweepRow row;
        row.lambda = lambda;
        row.arch = greedy_decode(params, make_input(prev, shift, edges, cfg.space), cfg.space);
        row.accuracy = eval.accuracy(row.arch, prepared.metas[1]);
        row.madds = madds(row.arch, cfg.space);
        row.shift = shift;
        rows.push_back(std::move(row));
    }
    return rows;
}

AblationResult wd_ablation(const RunConfig& cfg) {
    AblationResult out;
    out.with_penalty = run_adaptation(cfg);
    RunConfig plain = cfg;
    plain.trainer.lambda = 0.0;
    out.without_penalty = run_adaptation(plain);
    return out;
}

std::string render_report(const nlohmann::json& records) {
    std::ostringstream out;
    char line[512];
    out << "initial architecture: " << records.at("initial_arch").get<std::string>() << '\n';
    std::snprintf(line, sizeof line, "initial accuracy: %.4f  initial MAdds: %.3f M\n",
                  records.at("initial_accuracy").get<double>(), records.at("initial_madds").get<double>());
    out << line;
    std::snprintf(line, sizeof line, "%4s %12s %9s %7s %8s %8s %10s %10s  %s\n", "t", "shift", "drop", "adapt",
                  "V_prev", "V_new", "MAdds_prev", "MAdds_new", "architecture");
    out << line;
    for (const auto& r : records.at("records")) {
        std::snprintf(line, sizeof line, "%4d %12.6f %9.4f %7s %8.4f %8.4f %10.3f %10.3f  %s\n", r.at("t").get<int>(),
                      r.at("shift").get<double>(), r.at("drop").get<double>(),
                      r.at("adapted").get<bool>() ? "yes" : "no", r.at("v_prev").get<double>(),
                      r.at("v_new").get<double>(), r.at("madds_prev").get<double>(), r.at("madds_new").get<double>(),
                      r.at("new_arch").get<std::string>().c_str());
        out << line;
    }
    return out.str();
}

}  // namespace growarch

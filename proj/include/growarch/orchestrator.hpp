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

// The adaptation loop over a growth plan, plus the comparison harnesses
// (distance metrics, lambda sweep, shift-penalty ablation).
//
// Seeds: with master seed m, snapshot data uses derive_seed(m, 0, data),
// the controller initialization derive_seed(m, 0, controller_init), and the
// training at step t derive_seed(m, t, controller_train).

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "growarch/config.hpp"
#include "growarch/controller.hpp"
#include "growarch/datagen.hpp"

namespace growarch {

struct AdaptationRecord {
    int t = 0;
    double shift = 0;  // squared W2 between the fitted current and previous snapshots
    double drop = 0;   // accuracy drop of the previous architecture
    bool adapted = false;
    Architecture prev_arch;
    Architecture new_arch;
    double v_prev = 0;  // previous architecture on the current snapshot
    double v_new = 0;   // new architecture on the current snapshot
    double madds_prev = 0;
    double madds_new = 0;
    std::vector<TraceRow> trace;
    double seconds = 0;
};

struct RunResult {
    Architecture initial_arch;
    double initial_accuracy = 0;
    std::vector<double> bucket_edges;
    std::vector<AdaptationRecord> records;
    ControllerParams params;
};

/// Snapshot seed used for a master seed.
std::uint64_t plan_seed(std::uint64_t master);

/// Fits the default-ridge Gaussian to the extracted features of a snapshot.
GaussianSummaryd fit_snapshot(const Snapshot& s, const FeatureExtractor& extract = identity_features);

/// B−1 log-spaced edges over the range of positive pairwise W2² between the
/// plan's snapshots; default edges when the range is degenerate.
std::vector<double> bucket_edges_for(const std::vector<GaussianSummaryd>& fits, int buckets);

/// α_1: decoded from cfg.initial_arch, or the accuracy oracle on `meta`.
Architecture initial_architecture(const RunConfig& cfg, const SnapshotMeta& meta);

RunResult run_adaptation(const RunConfig& cfg, const FeatureExtractor& extract = identity_features);

/// records.json body: config echo, initial architecture, per-step records
/// (trace files referenced relative to the output directory). Wall-clock
/// timings are kept out so identical runs produce identical bytes.
nlohmann::json records_json(const RunConfig& cfg, const RunResult& run);

/// Writes records.json, timings.json, trace_t<t>.csv for adapted steps and
/// controller.axpt into `dir`.
void write_run(const RunConfig& cfg, const RunResult& run, const std::filesystem::path& dir);

struct DistanceRow {
    int step = 0;
    double w2 = 0;
    double js = 0;
};

/// Distances from the base snapshot to each later one under both metrics,
/// averaged over the plan seeds given.
std::vector<DistanceRow> compare_distance_metrics(const GrowthPlan& plan, std::size_t base_step,
                                                  const std::vector<std::uint64_t>& seeds, int js_samples = 20000);

struct SweepRow {
    double lambda = 0;
    Architecture arch;
    double accuracy = 0;
    double madds = 0;
    double shift = 0;
};

/// One adaptation step (snapshot 1 → 2) per lambda from the same seed; the
/// controller is trained regardless of the gate.
std::vector<SweepRow> lambda_sweep(const RunConfig& cfg, const std::vector<double>& lambdas);

struct AblationResult {
    RunResult with_penalty;
    RunResult without_penalty;
};

/// Two full runs sharing every seed; the second sets lambda to 0.
AblationResult wd_ablation(const RunConfig& cfg);

/// Human-readable table for a parsed records.json.
std::string render_report(const nlohmann::json& records);

}  // namespace growarch

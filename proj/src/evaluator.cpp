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

#include "growarch/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "growarch/errors.hpp"
#include "growarch/reward.hpp"

namespace growarch {

void SurrogateConfig::validate() const {
    if (!(bump_width > 0)) throw InvalidConfig("surrogate.width must be positive");
    if (!(peak_height >= 0)) throw InvalidConfig("surrogate.peak must be nonnegative");
    if (!(floor >= 0)) throw InvalidConfig("surrogate.floor must be nonnegative");
    if (floor + peak_height > 1.0) throw InvalidConfig("surrogate.floor + surrogate.peak must not exceed 1");
    if (!(depth_penalty >= 0)) throw InvalidConfig("surrogate.depth_penalty must be nonnegative");
}

double complexity_score(const SnapshotMeta& meta) {
    if (meta.max_classes < 2) throw InvalidConfig("max_classes must be at least 2 for the complexity score");
    if (meta.n_classes < 1) throw InvalidConfig("n_classes must be positive");
    const double class_term = std::log2(static_cast<double>(meta.n_classes)) / std::log2(static_cast<double>(meta.max_classes));
    const double s = 0.5 * meta.volume_fraction + 0.5 * class_term;
    return std::clamp(s, 0.0, 1.0);
}

double optimal_capacity(double s, const SurrogateConfig& cfg) {
    return cfg.optimum_intercept + cfg.optimum_slope * s;
}

int optimal_depth(double s) { return static_cast<int>(std::lround(2.0 + 2.0 * s)); }

double surrogate_accuracy(const Architecture& a, const SnapshotMeta& meta, const SurrogateConfig& cfg,
                          const SpaceConfig& space) {
    const double cap = madds(a, space) / madds(max_arch(space), space);
    const double s = complexity_score(meta);
    const double dev = cap - optimal_capacity(s, cfg);
    const int target_depth = optimal_depth(s);
    int depth_gap = 0;
    for (const auto& unit : a.units) depth_gap += std::abs(unit.depth() - target_depth);
    const double v = cfg.floor + cfg.peak_height * std::exp(-dev * dev / (2.0 * cfg.bump_width * cfg.bump_width)) -
                     cfg.depth_penalty * depth_gap;
    return std::clamp(v, 0.0, 1.0);
}

SurrogateEvaluator::SurrogateEvaluator(SpaceConfig space, SurrogateConfig cfg)
    : space_(std::move(space)), cfg_(cfg) {
    space_.validate();
    cfg_.validate();
}

double SurrogateEvaluator::accuracy(const Architecture& a, const SnapshotMeta& meta) const {
    return surrogate_accuracy(a, meta, cfg_, space_);
}

double objective_value(const Evaluator& eval, const SpaceConfig& space, const SnapshotMeta& meta,
                       const OracleObjective& objective, const Architecture& a) {
    const double v = eval.accuracy(a, meta);
    if (objective.kind == OracleObjective::Kind::Accuracy) return v;
    if (!objective.prev) throw InvalidConfig("reward objective needs a previous architecture");
    const Architecture& prev = *objective.prev;
    return reward(v, eval.accuracy(prev, meta), madds(a, space), madds(prev, space), objective.lambda,
                  objective.shift);
}

OracleResult oracle_best(const Evaluator& eval, const SpaceConfig& space, const SnapshotMeta& meta,
                         const OracleObjective& objective, std::uint64_t cap) {
    // enumerate() yields sorted encodings, so a strict comparison keeps the
    // lexicographically smallest among exact ties.
    const auto all = enumerate(space, cap);
    std::optional<OracleResult> best;
    for (const auto& a : all) {
        OracleResult r{a, eval.accuracy(a, meta), madds(a, space), objective_value(eval, space, meta, objective, a)};
        if (!best || r.objective > best->objective ||
            (r.objective == best->objective && r.madds < best->madds)) {
            best = std::move(r);
        }
    }
    return *best;
}

OracleResult oracle_best(const SpaceConfig& space, const SnapshotMeta& meta, const SurrogateConfig& cfg,
                         const OracleObjective& objective, std::uint64_t cap) {
    const SurrogateEvaluator eval(space, cfg);
    return oracle_best(eval, space, meta, objective, cap);
}

}  // namespace growarch

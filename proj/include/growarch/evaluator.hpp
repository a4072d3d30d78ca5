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

// Accuracy of an architecture on a data snapshot. The surrogate is a closed
// form landscape: a Gaussian bump over normalized capacity whose optimum
// moves with how hard the snapshot is, minus a per-unit depth penalty.

#pragma once

#include <cstdint>
#include <optional>

#include "growarch/datagen.hpp"
#include "growarch/search_space.hpp"

namespace growarch {

struct SurrogateConfig {
    double peak_height = 0.45;
    double floor = 0.5;
    double bump_width = 0.15;
    double optimum_intercept = 0.3;
    double optimum_slope = 0.6;
    double depth_penalty = 0.02;

    void validate() const;
};

/// s = ½·volume_fraction + ½·log2(n_classes)/log2(max_classes), in [0,1].
double complexity_score(const SnapshotMeta& meta);

/// Capacity the surrogate rewards most at complexity s.
double optimal_capacity(double s, const SurrogateConfig& cfg);

/// Depth the surrogate prefers at complexity s: round(2 + 2s).
int optimal_depth(double s);

double surrogate_accuracy(const Architecture& a, const SnapshotMeta& meta, const SurrogateConfig& cfg,
                          const SpaceConfig& space);

/// Accuracy of an architecture on a snapshot, Φ(D; α).
class Evaluator {
public:
    virtual ~Evaluator() = default;
    [[nodiscard]] virtual double accuracy(const Architecture& a, const SnapshotMeta& meta) const = 0;
};

class SurrogateEvaluator final : public Evaluator {
public:
    SurrogateEvaluator(SpaceConfig space, SurrogateConfig cfg);

    [[nodiscard]] double accuracy(const Architecture& a, const SnapshotMeta& meta) const override;

    [[nodiscard]] const SpaceConfig& space() const noexcept { return space_; }
    [[nodiscard]] const SurrogateConfig& config() const noexcept { return cfg_; }

private:
    SpaceConfig space_;
    SurrogateConfig cfg_;
};

/// What oracle_best maximizes: raw accuracy, or the controller's reward
/// relative to a previous architecture.
struct OracleObjective {
    enum class Kind { Accuracy, Reward };
    Kind kind = Kind::Accuracy;
    std::optional<Architecture> prev;
    double shift = 1.0;
    double lambda = 0.0;

    static OracleObjective accuracy() { return {}; }
    static OracleObjective reward(Architecture prev, double shift, double lambda) {
        return {Kind::Reward, std::move(prev), shift, lambda};
    }
};

struct OracleResult {
    Architecture arch;
    double accuracy = 0;
    double madds = 0;
    double objective = 0;
};

/// Objective value of `a` (accuracy, or reward against objective.prev).
double objective_value(const Evaluator& eval, const SpaceConfig& space, const SnapshotMeta& meta,
                       const OracleObjective& objective, const Architecture& a);

/// Exhaustive search. Ties on the objective go to lower MAdds, then to the
/// lexicographically smaller encoding.
OracleResult oracle_best(const Evaluator& eval, const SpaceConfig& space, const SnapshotMeta& meta,
                         const OracleObjective& objective, std::uint64_t cap = 1'000'000);

OracleResult oracle_best(const SpaceConfig& space, const SnapshotMeta& meta, const SurrogateConfig& cfg,
                         const OracleObjective& objective, std::uint64_t cap = 1'000'000);

}  // namespace growarch

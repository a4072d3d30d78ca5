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

#pragma once

#include "growarch/evaluator.hpp"

namespace growarch {

struct GateConfig {
    double epsilon = 0.02;

    void validate() const;
};

/// Accuracy lost by the previous architecture when moving from the previous
/// snapshot to the current one. Negative when the new data suits it better.
double accuracy_drop(const Architecture& prev_arch, const SnapshotMeta& prev_meta, const SnapshotMeta& cur_meta,
                     const Evaluator& eval);

/// Strict: adapt only when the drop exceeds epsilon.
inline bool should_adapt(double drop, const GateConfig& cfg) { return drop > cfg.epsilon; }

}  // namespace growarch

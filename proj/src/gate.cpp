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

#include "growarch/gate.hpp"

#include <cmath>

#include "growarch/errors.hpp"

namespace growarch {

void GateConfig::validate() const {
    if (std::isnan(epsilon) || epsilon < 0) throw InvalidConfig("gate.epsilon must be nonnegative");
}

double accuracy_drop(const Architecture& prev_arch, const SnapshotMeta& prev_meta, const SnapshotMeta& cur_meta,
                     const Evaluator& eval) {
    return eval.accuracy(prev_arch, prev_meta) - eval.accuracy(prev_arch, cur_meta);
}

}  // namespace growarch

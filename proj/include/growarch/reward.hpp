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

#include <cmath>

#include "growarch/errors.hpp"

namespace growarch {

/// Accuracy gain minus the compute growth weighted by lambda / shift:
///   R = (v_new − v_prev) − (lambda / shift)·(c_new − c_prev)
/// with costs in millions of multiply-adds. A smaller shift between data
/// snapshots makes extra compute more expensive.
inline double reward(double v_new, double v_prev, double c_new, double c_prev, double lambda, double shift) {
    if (shift == 0.0) throw DivisionByZeroShift("reward needs a nonzero data shift");
    if (!(shift > 0.0)) throw InvalidData("data shift must be positive");
    if (!(lambda >= 0.0)) throw InvalidData("lambda must be nonnegative");
    const double gain = v_new - v_prev;
    const double growth = c_new - c_prev;
    if (lambda == 0.0 || growth == 0.0) return gain;
    return gain - (lambda / shift) * growth;
}

}  // namespace growarch

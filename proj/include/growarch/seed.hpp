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

#include <cstdint>

namespace growarch {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Child seed for (step, purpose). Each coordinate is mixed separately, so
/// adding steps or purposes never changes the seeds of existing ones.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t step, std::uint64_t purpose) noexcept {
    return mix64(mix64(mix64(master) ^ step) ^ (purpose * 0xD1B54A32D192ED03ULL));
}

/// Purposes used with derive_seed.
enum class SeedPurpose : std::uint64_t {
    data = 1,
    controller_init = 2,
    controller_train = 3,
    distance = 4,
};

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t step, SeedPurpose purpose) noexcept {
    return derive_seed(master, step, static_cast<std::uint64_t>(purpose));
}

}  // namespace growarch

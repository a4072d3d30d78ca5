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

// Run configuration and its flat text form: one "section.key=value" per
// line, '#' starts a comment, lists are comma separated. See README for the
// full key list.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "growarch/controller.hpp"
#include "growarch/datagen.hpp"
#include "growarch/evaluator.hpp"
#include "growarch/gate.hpp"
#include "growarch/search_space.hpp"

namespace growarch {

struct RunConfig {
    GrowthPlan plan;
    SpaceConfig space;
    SurrogateConfig surrogate;
    GateConfig gate;
    TrainerConfig trainer;
    ControllerShape controller;
    /// "oracle" or an encoded architecture.
    std::string initial_arch = "oracle";
    std::uint64_t seed = 0;
    std::vector<double> sweep_lambdas{0.0, 1e-4, 1e-3, 1e-2};
    int js_samples = 20000;

    void validate() const;
};

/// Sets one key; throws InvalidConfig naming the key (and `where`, when given).
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value, const std::string& where = {});

/// Applies "key=value" lines from `in`; `source` names the input in errors.
void apply_config(RunConfig& cfg, std::istream& in, const std::string& source);
RunConfig load_config(const std::filesystem::path& path);

/// Every key with its current value, sorted by key.
std::map<std::string, std::string> config_entries(const RunConfig& cfg);

/// Known keys, sorted.
std::vector<std::string> config_keys();

}  // namespace growarch

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

#include <filesystem>
#include <iosfwd>

#include "growarch/gaussian.hpp"

namespace growarch {

// Feature CSV: no header, one sample per row, comma separated decimal
// floats, LF line endings. The column count of the first row is enforced
// on every following row.

FeatureMatrix parse_feature_csv(std::istream& in);
FeatureMatrix read_feature_csv(const std::filesystem::path& path);

/// Writes with round-trip precision.
void write_feature_csv(std::ostream& out, const FeatureMatrix& m);
void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& m);

}  // namespace growarch

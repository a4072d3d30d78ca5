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

// Synthetic growing-data snapshots. Every class is an isotropic Gaussian
// around a prototype on a sphere; snapshots are nested, so the rows of
// step s are an exact prefix of the rows of step s+1.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "growarch/gaussian.hpp"

namespace growarch {

enum class Scenario { VolumeGrowth, ClassGrowth };

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

struct SnapshotMeta {
    int t = 1;
    int n_classes = 1;
    int n_samples = 0;
    double volume_fraction = 1.0;
    int max_classes = 1;

    friend bool operator==(const SnapshotMeta&, const SnapshotMeta&) = default;
};

struct Snapshot {
    FeatureMatrix features;
    std::vector<int> labels;
    SnapshotMeta meta;
};

struct GrowthPlan {
    Scenario scenario = Scenario::ClassGrowth;
    /// Volume fractions (VolumeGrowth) or class counts (ClassGrowth).
    std::vector<double> steps{2, 4, 8};
    int feature_dim = 8;
    double spread = 1.0;
    double prototype_radius = 5.0;
    /// Rows at volume fraction 1 (VolumeGrowth) or rows per class (ClassGrowth).
    int base_samples = 200;
    /// Fixed class count for VolumeGrowth.
    int n_classes = 10;
    /// Normalizer for the class term of the complexity score; 0 means the
    /// largest class count the plan reaches.
    int max_classes = 0;
    std::uint64_t seed = 0;

    void validate() const;
    [[nodiscard]] int resolved_max_classes() const;
    [[nodiscard]] int classes_at(std::size_t step) const;
    [[nodiscard]] int rows_at(std::size_t step) const;
    [[nodiscard]] SnapshotMeta meta_at(std::size_t step) const;
};

/// `n_classes` points uniform on the sphere of the given radius in R^q.
/// Rows for c classes are the first c rows of any larger request.
Eigen::MatrixXd gen_prototypes(int n_classes, int q, std::uint64_t seed, double radius = 5.0);

Snapshot gen_snapshot(const GrowthPlan& plan, std::size_t step_index);

/// Maps a snapshot to the feature rows used for distance estimation.
using FeatureExtractor = std::function<FeatureMatrix(const Snapshot&)>;

/// The desk-scale extractor: the snapshot rows themselves.
FeatureMatrix identity_features(const Snapshot& s);

// Snapshot files: <stem>.csv (features), <stem>.meta (key=value lines),
// <stem>.labels (one integer per line).
void write_snapshot(const Snapshot& s, const std::filesystem::path& stem);
SnapshotMeta read_meta(const std::filesystem::path& meta_path);
void write_meta(const SnapshotMeta& meta, const std::filesystem::path& meta_path);

/// Reads features from `csv_path` and the sidecar `<stem>.meta` next to it.
/// Labels are read when the `.labels` file exists.
Snapshot read_snapshot(const std::filesystem::path& csv_path);

}  // namespace growarch

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

#include "growarch/datagen.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>

#include "growarch/feature_io.hpp"
#include "growarch/seed.hpp"

namespace growarch {

std::string to_string(Scenario s) {
    return s == Scenario::VolumeGrowth ? "volume" : "class";
}

Scenario scenario_from_string(const std::string& s) {
    if (s == "volume") return Scenario::VolumeGrowth;
    if (s == "class") return Scenario::ClassGrowth;
    throw InvalidConfig("unknown scenario '" + s + "' (expected volume or class)");
}

void GrowthPlan::validate() const {
    if (steps.empty()) throw InvalidConfig("plan.steps must not be empty");
    if (feature_dim < 2) throw InvalidConfig("plan.dim must be at least 2");
    if (!(spread > 0)) throw InvalidConfig("plan.spread must be positive");
    if (!(prototype_radius >= 0)) throw InvalidConfig("plan.radius must be nonnegative");
    if (base_samples < 1) throw InvalidConfig("plan.base_samples must be positive");
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const double v = steps[i];
        if (i && v < steps[i - 1]) throw InvalidConfig("plan.steps must be non-decreasing");
        if (scenario == Scenario::VolumeGrowth) {
            if (!(v > 0 && v <= 1)) throw InvalidConfig("plan.steps volume fractions must lie in (0,1]");
        } else if (v < 1 || v != std::floor(v)) {
            throw InvalidConfig("plan.steps class counts must be positive integers");
        }
    }
    if (scenario == Scenario::VolumeGrowth && n_classes < 1) throw InvalidConfig("plan.n_classes must be positive");
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (rows_at(i) < 2) throw InvalidConfig("plan step " + std::to_string(i) + " has fewer than 2 rows");
    }
    if (max_classes != 0 && max_classes < classes_at(steps.size() - 1)) {
        throw InvalidConfig("plan.max_classes is smaller than the class count reached");
    }
}

int GrowthPlan::resolved_max_classes() const {
    if (max_classes > 0) return max_classes;
    return classes_at(steps.size() - 1);
}

int GrowthPlan::classes_at(std::size_t step) const {
    return scenario == Scenario::VolumeGrowth ? n_classes : static_cast<int>(steps.at(step));
}

int GrowthPlan::rows_at(std::size_t step) const {
    if (scenario == Scenario::VolumeGrowth) {
        return static_cast<int>(std::lround(steps.at(step) * base_samples));
    }
    return classes_at(step) * base_samples;
}

SnapshotMeta GrowthPlan::meta_at(std::size_t step) const {
    if (step >= steps.size()) {
        throw InvalidStep("step " + std::to_string(step) + " out of range (plan has " +
                          std::to_string(steps.size()) + " steps)");
    }
    SnapshotMeta meta;
    meta.t = static_cast<int>(step) + 1;
    meta.n_classes = classes_at(step);
    meta.n_samples = rows_at(step);
    meta.volume_fraction = scenario == Scenario::VolumeGrowth
                               ? steps[step]
                               : static_cast<double>(rows_at(step)) / rows_at(steps.size() - 1);
    meta.max_classes = resolved_max_classes();
    return meta;
}

Eigen::MatrixXd gen_prototypes(int n_classes, int q, std::uint64_t seed, double radius) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd protos(n_classes, q);
    for (int c = 0; c < n_classes; ++c) {
        Eigen::VectorXd v(q);
        do {
            for (int j = 0; j < q; ++j) v(j) = normal(rng);
        } while (v.norm() < 1e-12);
        protos.row(c) = (radius * v.normalized()).transpose();
    }
    return protos;
}

Snapshot gen_snapshot(const GrowthPlan& plan, std::size_t step_index) {
    Snapshot snap;
    snap.meta = plan.meta_at(step_index);
    plan.validate();

    const int q = plan.feature_dim;
    const int rows = snap.meta.n_samples;
    const Eigen::MatrixXd protos =
        gen_prototypes(snap.meta.n_classes, q, derive_seed(plan.seed, 0, SeedPurpose::data), plan.prototype_radius);

    snap.features.resize(rows, q);
    snap.labels.resize(static_cast<std::size_t>(rows));
    std::normal_distribution<double> normal;

    if (plan.scenario == Scenario::VolumeGrowth) {
        // One sequential stream: row i belongs to class i mod C.
        std::mt19937_64 rng(derive_seed(plan.seed, 1, SeedPurpose::data));
        for (int i = 0; i < rows; ++i) {
            const int c = i % snap.meta.n_classes;
            snap.labels[static_cast<std::size_t>(i)] = c;
            for (int j = 0; j < q; ++j) snap.features(i, j) = protos(c, j) + plan.spread * normal(rng);
        }
    } else {
        // Class-major rows; each class has its own stream.
        int i = 0;
        for (int c = 0; c < snap.meta.n_classes; ++c) {
            std::mt19937_64 rng(derive_seed(plan.seed, 2 + static_cast<std::uint64_t>(c), SeedPurpose::data));
            for (int k = 0; k < plan.base_samples; ++k, ++i) {
                snap.labels[static_cast<std::size_t>(i)] = c;
                for (int j = 0; j < q; ++j) snap.features(i, j) = protos(c, j) + plan.spread * normal(rng);
            }
        }
    }
    return snap;
}

FeatureMatrix identity_features(const Snapshot& s) { return s.features; }

void write_meta(const SnapshotMeta& meta, const std::filesystem::path& meta_path) {
    std::ofstream out(meta_path, std::ios::binary);
    if (!out) throw IoError("cannot write " + meta_path.string());
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, meta.volume_fraction);
    out << "t=" << meta.t << '\n'
        << "n_classes=" << meta.n_classes << '\n'
        << "n_samples=" << meta.n_samples << '\n'
        << "volume_fraction=" << std::string(buf, ptr) << '\n'
        << "max_classes=" << meta.max_classes << '\n';
}

SnapshotMeta read_meta(const std::filesystem::path& meta_path) {
    std::ifstream in(meta_path);
    if (!in) throw IoError("cannot open " + meta_path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InvalidData(meta_path.string() + ":" + std::to_string(line_no) + ": expected key=value");
        }
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto get = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw InvalidData(meta_path.string() + ": missing key '" + key + "'");
        return it->second;
    };
    SnapshotMeta meta;
    try {
        meta.t = std::stoi(get("t"));
        meta.n_classes = std::stoi(get("n_classes"));
        meta.n_samples = std::stoi(get("n_samples"));
        meta.volume_fraction = std::stod(get("volume_fraction"));
        meta.max_classes = std::stoi(get("max_classes"));
    } catch (const std::logic_error&) {
        throw InvalidData(meta_path.string() + ": malformed numeric value");
    }
    if (meta.n_classes < 1 || meta.max_classes < meta.n_classes || !(meta.volume_fraction > 0) ||
        meta.volume_fraction > 1) {
        throw InvalidData(meta_path.string() + ": metadata out of range");
    }
    return meta;
}

void write_snapshot(const Snapshot& s, const std::filesystem::path& stem) {
    auto with_ext = [&](const char* ext) {
        auto p = stem;
        p += ext;
        return p;
    };
    write_feature_csv(with_ext(".csv"), s.features);
    write_meta(s.meta, with_ext(".meta"));
    std::ofstream labels(with_ext(".labels"), std::ios::binary);
    if (!labels) throw IoError("cannot write labels for " + stem.string());
    for (int l : s.labels) labels << l << '\n';
}

Snapshot read_snapshot(const std::filesystem::path& csv_path) {
    Snapshot s;
    s.features = read_feature_csv(csv_path);
    auto meta_path = csv_path;
    meta_path.replace_extension(".meta");
    s.meta = read_meta(meta_path);
    if (s.meta.n_samples != s.features.rows()) {
        throw InvalidData(meta_path.string() + ": n_samples does not match the feature rows");
    }
    auto labels_path = csv_path;
    labels_path.replace_extension(".labels");
    if (std::filesystem::exists(labels_path)) {
        std::ifstream in(labels_path);
        int l = 0;
        while (in >> l) {
            if (l < 0 || l >= s.meta.n_classes) throw InvalidData(labels_path.string() + ": label out of range");
            s.labels.push_back(l);
        }
        if (s.labels.size() != static_cast<std::size_t>(s.features.rows())) {
            throw InvalidData(labels_path.string() + ": label count does not match the feature rows");
        }
    }
    return s;
}

}  // namespace growarch

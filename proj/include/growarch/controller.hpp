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

// Architecture adjuster: an autoregressive policy over architecture tokens.
//
// The previous architecture (one-hot tokens, with an explicit "off" slot for
// absent layers) goes through a two-layer tanh encoder; the data shift picks
// a row of a learnable bucket embedding table. Their concatenation
// initializes a GRU that emits, per unit, a depth decision followed by a
// (kernel, expansion) pair for each active layer. The embedding of each
// choice is the next GRU input.
//
// All parameters live in one flat vector; `ControllerParams::block` views a
// named slice as a matrix. Gradients and optimizer moments share the layout.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "growarch/evaluator.hpp"
#include "growarch/search_space.hpp"

namespace growarch {

struct ControllerShape {
    int hidden = 64;
    int encoder_hidden = 64;
    int arch_embed = 32;
    int shift_embed = 32;
    int buckets = 8;
    double init_range = 0.1;

    void validate() const;
};

enum class Optimizer { Adam, Sgd };

struct TrainerConfig {
    double learning_rate = 2e-4;
    double weight_decay = 5e-4;
    int iterations = 6000;
    double entropy_weight = 2e-4;
    double lambda = 0.5e-4;
    bool use_baseline = true;
    double baseline_decay = 0.95;
    int batch_size = 1;
    Optimizer optimizer = Optimizer::Adam;
    /// B−1 ascending interior edges; empty means default_bucket_edges(B).
    std::vector<double> bucket_edges;
    std::uint64_t seed = 0;

    void validate() const;
};

/// B−1 edges log-spaced over [lo, hi].
std::vector<double> log_spaced_edges(double lo, double hi, int buckets);
std::vector<double> default_bucket_edges(int buckets);

/// Bucket of `shift`: number of edges <= shift (so values below the first
/// edge land in bucket 0 and values above the last in bucket B−1).
int shift_bucket(double shift, const std::vector<double>& edges);

enum class Block : int {
    enc1_w,
    enc1_b,
    enc2_w,
    enc2_b,
    shift_table,
    init_w,
    init_b,
    start,
    depth_emb,
    kernel_emb,
    expansion_emb,
    gru_wz,
    gru_uz,
    gru_bz,
    gru_wr,
    gru_ur,
    gru_br,
    gru_wn,
    gru_un,
    gru_bn,
    depth_head_w,
    depth_head_b,
    kernel_head_w,
    kernel_head_b,
    expansion_head_w,
    expansion_head_b,
    count_
};

inline constexpr int kBlockCount = static_cast<int>(Block::count_);

std::string_view block_name(Block b);

class ControllerParams {
public:
    using Map = Eigen::Map<Eigen::MatrixXd>;
    using ConstMap = Eigen::Map<const Eigen::MatrixXd>;

    struct Slice {
        Eigen::Index offset = 0;
        Eigen::Index rows = 0;
        Eigen::Index cols = 0;
    };

    ControllerParams() = default;
    ControllerParams(const SpaceConfig& space, const ControllerShape& shape);

    /// Uniform(−init_range, init_range) on every parameter.
    static ControllerParams random(const SpaceConfig& space, const ControllerShape& shape, std::uint64_t seed);

    /// Sets the three output heads (weights and biases) to zero, which makes
    /// every decision uniform.
    void zero_heads();

    [[nodiscard]] Map block(Block b) { return block(theta_, b); }
    [[nodiscard]] ConstMap block(Block b) const { return block(theta_, b); }
    [[nodiscard]] Map block(Eigen::VectorXd& flat, Block b) const;
    [[nodiscard]] ConstMap block(const Eigen::VectorXd& flat, Block b) const;

    [[nodiscard]] Eigen::VectorXd& theta() noexcept { return theta_; }
    [[nodiscard]] const Eigen::VectorXd& theta() const noexcept { return theta_; }
    [[nodiscard]] Eigen::Index size() const noexcept { return theta_.size(); }
    [[nodiscard]] const Slice& slice(Block b) const { return slices_[static_cast<std::size_t>(b)]; }

    [[nodiscard]] const ControllerShape& shape() const noexcept { return shape_; }
    [[nodiscard]] int n_units() const noexcept { return n_units_; }
    [[nodiscard]] int max_depth() const noexcept { return max_depth_; }
    [[nodiscard]] int n_depths() const noexcept { return n_depths_; }
    [[nodiscard]] int n_kernels() const noexcept { return n_kernels_; }
    [[nodiscard]] int n_expansions() const noexcept { return n_expansions_; }
    [[nodiscard]] int onehot_size() const noexcept;

    /// Throws ShapeError unless the parameters were built for `space`.
    void check_compatible(const SpaceConfig& space) const;

    friend bool operator==(const ControllerParams& a, const ControllerParams& b) {
        return a.theta_.size() == b.theta_.size() && a.theta_ == b.theta_;
    }

private:
    void build_layout();

    ControllerShape shape_;
    int n_units_ = 0;
    int max_depth_ = 0;
    int n_depths_ = 0;
    int n_kernels_ = 0;
    int n_expansions_ = 0;
    std::array<Slice, kBlockCount> slices_{};
    Eigen::VectorXd theta_;
};

// Binary parameter file: "AXPT", u32 version, u32 array count, then for
// each array a u64 element count followed by little-endian f64 values. The
// first array is the shape record (hidden, encoder_hidden, arch_embed,
// shift_embed, buckets, n_units, max_depth, n_depths, n_kernels,
// n_expansions, init_range); the rest are the Block slices in enum order,
// each column-major.
inline constexpr std::uint32_t kParamsFormatVersion = 1;
void save_params(const ControllerParams& p, std::ostream& out);
void save_params(const ControllerParams& p, const std::filesystem::path& path);
ControllerParams load_params(std::istream& in, const SpaceConfig& space);
ControllerParams load_params(const std::filesystem::path& path, const SpaceConfig& space);

/// Controller input: previous architecture tokens and the data-shift bucket.
struct PolicyInput {
    Eigen::VectorXd arch_onehot;
    int bucket = 0;
};

/// One-hot token encoding of an architecture: per unit a depth one-hot, then
/// for every layer slot up to the maximum depth a kernel one-hot and an
/// expansion one-hot, each with a trailing "off" slot used by absent layers.
Eigen::VectorXd arch_onehot(const Architecture& a, const SpaceConfig& space);

PolicyInput make_input(const Architecture& prev, double shift, const std::vector<double>& edges,
                       const SpaceConfig& space);

/// Concatenated architecture embedding and shift embedding.
Eigen::VectorXd embed_state(const ControllerParams& p, const PolicyInput& in);

enum class DecisionKind { Depth, Kernel, Expansion };

struct Decision {
    DecisionKind kind = DecisionKind::Depth;
    int unit = 0;
    int layer = -1;  // -1 for depth decisions
    int choice = 0;
    double log_prob = 0;
    double entropy = 0;
};

struct Trajectory {
    Architecture arch;
    PolicyInput input;
    std::vector<Decision> decisions;
    double total_log_prob = 0;
    double total_entropy = 0;
};

/// Choice indices that produce `a`, in decision order.
std::vector<int> decision_choices(const Architecture& a, const SpaceConfig& space);

Trajectory sample(const ControllerParams& p, const PolicyInput& in, const SpaceConfig& space, std::mt19937_64& rng);

/// Argmax at every decision, lowest index on ties.
Architecture greedy_decode(const ControllerParams& p, const PolicyInput& in, const SpaceConfig& space);

/// Scores the fixed decision sequence of `a` under the policy.
Trajectory evaluate_path(const ControllerParams& p, const PolicyInput& in, const SpaceConfig& space,
                         const Architecture& a);

/// Scalar the update ascends:
///   advantage·log π(path) + entropy_weight·Σ entropy − ½·weight_decay·‖θ‖²
double policy_objective(const ControllerParams& p, const Trajectory& traj, const SpaceConfig& space,
                        double advantage, double entropy_weight, double weight_decay);

/// Reverse-mode gradient of policy_objective with respect to θ.
Eigen::VectorXd policy_gradient(const ControllerParams& p, const Trajectory& traj, const SpaceConfig& space,
                                double advantage, double entropy_weight, double weight_decay);

struct TrainingState {
    Eigen::VectorXd m;
    Eigen::VectorXd v;
    std::int64_t step = 0;
    double baseline = 0;
};

/// One policy-gradient ascent step on a single trajectory.
void reinforce_step(ControllerParams& p, const Trajectory& traj, double reward, const TrainerConfig& cfg,
                    const SpaceConfig& space, TrainingState& state);

/// Applies an already averaged gradient with the configured optimizer.
void apply_update(ControllerParams& p, const Eigen::VectorXd& grad, const TrainerConfig& cfg, TrainingState& state);

struct TraceRow {
    int iteration = 0;
    double reward = 0;
    double entropy = 0;
    double madds = 0;
};

struct TrainResult {
    std::vector<TraceRow> trace;
    TrainingState state;
};

/// Runs cfg.iterations rounds of sample → evaluate → reward → update against
/// the reward relative to `prev` on the snapshot described by `meta`.
TrainResult train(ControllerParams& p, const Architecture& prev, double shift, const SnapshotMeta& meta,
                  const Evaluator& eval, const SpaceConfig& space, const TrainerConfig& cfg);

/// CSV with header "iteration,reward,entropy,madds".
void write_trace_csv(const std::vector<TraceRow>& trace, std::ostream& out);
void write_trace_csv(const std::vector<TraceRow>& trace, const std::filesystem::path& path);

}  // namespace growarch

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

#include "growarch/controller.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>

#include "growarch/errors.hpp"
#include "growarch/reward.hpp"

namespace growarch {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void ControllerShape::validate() const {
    if (hidden < 1 || encoder_hidden < 1 || arch_embed < 1 || shift_embed < 1) {
        throw InvalidConfig("controller sizes must be positive");
    }
    if (buckets < 1) throw InvalidConfig("controller.buckets must be positive");
    if (!(init_range >= 0)) throw InvalidConfig("controller.init_range must be nonnegative");
}

void TrainerConfig::validate() const {
    if (!(learning_rate > 0)) throw InvalidConfig("trainer.lr must be positive");
    if (iterations < 1) throw InvalidConfig("trainer.iterations must be at least 1");
    if (!(lambda >= 0)) throw InvalidConfig("trainer.lambda must be nonnegative");
    if (!(weight_decay >= 0)) throw InvalidConfig("trainer.weight_decay must be nonnegative");
    if (!(entropy_weight >= 0)) throw InvalidConfig("trainer.entropy_weight must be nonnegative");
    if (!(baseline_decay >= 0 && baseline_decay < 1)) throw InvalidConfig("trainer.baseline_decay must lie in [0,1)");
    if (batch_size < 1) throw InvalidConfig("trainer.batch_size must be at least 1");
    for (std::size_t i = 1; i < bucket_edges.size(); ++i) {
        if (!(bucket_edges[i] > bucket_edges[i - 1])) throw InvalidConfig("trainer.bucket_edges must be ascending");
    }
}

std::vector<double> log_spaced_edges(double lo, double hi, int buckets) {
    if (buckets < 1) throw InvalidConfig("bucket count must be positive");
    if (!(lo > 0) || !(hi > lo)) throw InvalidConfig("bucket edge range must satisfy 0 < lo < hi");
    const int n = buckets - 1;
    if (n == 0) return {};
    if (n == 1) return {std::sqrt(lo * hi)};
    std::vector<double> edges;
    for (int i = 0; i < n; ++i) {
        const double f = static_cast<double>(i) / (n - 1);
        edges.push_back(std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo))));
    }
    return edges;
}

std::vector<double> default_bucket_edges(int buckets) { return log_spaced_edges(1e-2, 1e2, buckets); }

int shift_bucket(double shift, const std::vector<double>& edges) {
    return static_cast<int>(std::upper_bound(edges.begin(), edges.end(), shift) - edges.begin());
}

std::string_view block_name(Block b) {
    static constexpr std::array<std::string_view, kBlockCount> names{
        "enc1_w",        "enc1_b",        "enc2_w",        "enc2_b",          "shift_table",      "init_w",
        "init_b",        "start",         "depth_emb",     "kernel_emb",      "expansion_emb",    "gru_wz",
        "gru_uz",        "gru_bz",        "gru_wr",        "gru_ur",          "gru_br",           "gru_wn",
        "gru_un",        "gru_bn",        "depth_head_w",  "depth_head_b",    "kernel_head_w",    "kernel_head_b",
        "expansion_head_w", "expansion_head_b"};
    return names[static_cast<std::size_t>(b)];
}

// ---------------------------------------------------------------------------
// Parameter layout

ControllerParams::ControllerParams(const SpaceConfig& space, const ControllerShape& shape) : shape_(shape) {
    space.validate();
    shape.validate();
    n_units_ = space.n_units;
    max_depth_ = space.max_depth();
    n_depths_ = static_cast<int>(space.depth_choices.size());
    n_kernels_ = static_cast<int>(space.kernel_choices.size());
    n_expansions_ = static_cast<int>(space.expansion_choices.size());
    build_layout();
}

int ControllerParams::onehot_size() const noexcept {
    return n_units_ * (n_depths_ + max_depth_ * ((n_kernels_ + 1) + (n_expansions_ + 1)));
}

void ControllerParams::build_layout() {
    const Eigen::Index h = shape_.hidden;
    const Eigen::Index a1 = shape_.encoder_hidden;
    const Eigen::Index a2 = shape_.arch_embed;
    const Eigen::Index es = shape_.shift_embed;
    const Eigen::Index dims[kBlockCount][2] = {
        {a1, onehot_size()}, {a1, 1}, {a2, a1}, {a2, 1}, {es, shape_.buckets}, {h, a2 + es}, {h, 1}, {h, 1},
        {h, n_depths_}, {h, n_kernels_}, {h, n_expansions_},
        {h, h}, {h, h}, {h, 1}, {h, h}, {h, h}, {h, 1}, {h, h}, {h, h}, {h, 1},
        {n_depths_, h}, {n_depths_, 1}, {n_kernels_, h}, {n_kernels_, 1}, {n_expansions_, h}, {n_expansions_, 1}};
    Eigen::Index offset = 0;
    for (int i = 0; i < kBlockCount; ++i) {
        slices_[static_cast<std::size_t>(i)] = {offset, dims[i][0], dims[i][1]};
        offset += dims[i][0] * dims[i][1];
    }
    theta_ = VectorXd::Zero(offset);
}

ControllerParams ControllerParams::random(const SpaceConfig& space, const ControllerShape& shape,
                                          std::uint64_t seed) {
    ControllerParams p(space, shape);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-shape.init_range, shape.init_range);
    for (Eigen::Index i = 0; i < p.theta_.size(); ++i) p.theta_(i) = unif(rng);
    return p;
}

void ControllerParams::zero_heads() {
    for (Block b : {Block::depth_head_w, Block::depth_head_b, Block::kernel_head_w, Block::kernel_head_b,
                    Block::expansion_head_w, Block::expansion_head_b}) {
        block(b).setZero();
    }
}

ControllerParams::Map ControllerParams::block(VectorXd& flat, Block b) const {
    const auto& s = slice(b);
    return Map(flat.data() + s.offset, s.rows, s.cols);
}

ControllerParams::ConstMap ControllerParams::block(const VectorXd& flat, Block b) const {
    const auto& s = slice(b);
    return ConstMap(flat.data() + s.offset, s.rows, s.cols);
}

void ControllerParams::check_compatible(const SpaceConfig& space) const {
    if (space.n_units != n_units_ || space.max_depth() != max_depth_ ||
        static_cast<int>(space.depth_choices.size()) != n_depths_ ||
        static_cast<int>(space.kernel_choices.size()) != n_kernels_ ||
        static_cast<int>(space.expansion_choices.size()) != n_expansions_) {
        throw ShapeError("controller parameters were built for a different search space");
    }
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr char kMagic[4] = {'A', 'X', 'P', 'T'};

template <typename T>
void put_le(std::ostream& out, T value) {
    static_assert(std::is_unsigned_v<T>);
    for (std::size_t i = 0; i < sizeof(T); ++i) out.put(static_cast<char>((value >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(std::istream& in) {
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        const int c = in.get();
        if (c == std::char_traits<char>::eof()) throw IoError("truncated parameter file");
        value |= static_cast<T>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return value;
}

void put_array(std::ostream& out, const double* data, std::size_t n) {
    put_le<std::uint64_t>(out, n);
    for (std::size_t i = 0; i < n; ++i) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(data[i]));
}

std::vector<double> get_array(std::istream& in) {
    const auto n = get_le<std::uint64_t>(in);
    if (n > (std::uint64_t{1} << 32)) throw IoError("parameter array too large");
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = std::bit_cast<double>(get_le<std::uint64_t>(in));
    return v;
}

}  // namespace

void save_params(const ControllerParams& p, std::ostream& out) {
    out.write(kMagic, 4);
    put_le<std::uint32_t>(out, kParamsFormatVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(kBlockCount + 1));
    const auto& s = p.shape();
    const double shape_record[] = {double(s.hidden), double(s.encoder_hidden), double(s.arch_embed),
                                   double(s.shift_embed), double(s.buckets), double(p.n_units()),
                                   double(p.max_depth()), double(p.n_depths()), double(p.n_kernels()),
                                   double(p.n_expansions()), s.init_range};
    put_array(out, shape_record, std::size(shape_record));
    for (int b = 0; b < kBlockCount; ++b) {
        const auto& sl = p.slice(static_cast<Block>(b));
        put_array(out, p.theta().data() + sl.offset, static_cast<std::size_t>(sl.rows * sl.cols));
    }
    if (!out) throw IoError("failed writing parameters");
}

void save_params(const ControllerParams& p, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    save_params(p, out);
}

ControllerParams load_params(std::istream& in, const SpaceConfig& space) {
    char magic[4] = {};
    in.read(magic, 4);
    if (!in || !std::equal(magic, magic + 4, kMagic)) throw IoError("not a controller parameter file");
    const auto version = get_le<std::uint32_t>(in);
    if (version != kParamsFormatVersion) {
        throw IoError("unsupported parameter file version " + std::to_string(version));
    }
    const auto count = get_le<std::uint32_t>(in);
    if (count != static_cast<std::uint32_t>(kBlockCount + 1)) throw IoError("unexpected array count");
    const auto rec = get_array(in);
    if (rec.size() != 11) throw IoError("malformed shape record");
    ControllerShape shape;
    shape.hidden = static_cast<int>(rec[0]);
    shape.encoder_hidden = static_cast<int>(rec[1]);
    shape.arch_embed = static_cast<int>(rec[2]);
    shape.shift_embed = static_cast<int>(rec[3]);
    shape.buckets = static_cast<int>(rec[4]);
    shape.init_range = rec[10];
    ControllerParams p(space, shape);
    if (rec[5] != p.n_units() || rec[6] != p.max_depth() || rec[7] != p.n_depths() || rec[8] != p.n_kernels() ||
        rec[9] != p.n_expansions()) {
        throw ShapeError("parameter file was written for a different search space");
    }
    for (int b = 0; b < kBlockCount; ++b) {
        const auto& sl = p.slice(static_cast<Block>(b));
        const auto values = get_array(in);
        if (static_cast<Eigen::Index>(values.size()) != sl.rows * sl.cols) {
            throw IoError("array " + std::string(block_name(static_cast<Block>(b))) + " has the wrong length");
        }
        std::copy(values.begin(), values.end(), p.theta().data() + sl.offset);
    }
    return p;
}

ControllerParams load_params(const std::filesystem::path& path, const SpaceConfig& space) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return load_params(in, space);
}

// ---------------------------------------------------------------------------
// State embedding

VectorXd arch_onehot(const Architecture& a, const SpaceConfig& space) {
    validate(a, space);
    const int nd = static_cast<int>(space.depth_choices.size());
    const int nk = static_cast<int>(space.kernel_choices.size());
    const int ne = static_cast<int>(space.expansion_choices.size());
    const int max_depth = space.max_depth();
    const int per_unit = nd + max_depth * ((nk + 1) + (ne + 1));
    VectorXd o = VectorXd::Zero(space.n_units * per_unit);
    for (int u = 0; u < space.n_units; ++u) {
        const auto& unit = a.units[static_cast<std::size_t>(u)];
        int base = u * per_unit;
        o(base + choice_index(space.depth_choices, unit.depth())) = 1.0;
        base += nd;
        for (int l = 0; l < max_depth; ++l) {
            if (l < unit.depth()) {
                const auto& layer = unit.layers[static_cast<std::size_t>(l)];
                o(base + choice_index(space.kernel_choices, layer.kernel)) = 1.0;
                o(base + nk + 1 + choice_index(space.expansion_choices, layer.expansion)) = 1.0;
            } else {
                o(base + nk) = 1.0;
                o(base + nk + 1 + ne) = 1.0;
            }
            base += (nk + 1) + (ne + 1);
        }
    }
    return o;
}

PolicyInput make_input(const Architecture& prev, double shift, const std::vector<double>& edges,
                       const SpaceConfig& space) {
    if (!std::isfinite(shift)) throw InvalidData("data shift must be finite");
    return {arch_onehot(prev, space), shift_bucket(shift, edges)};
}

namespace {

struct EncoderCache {
    VectorXd a1;
    VectorXd a2;
    VectorXd state;
    VectorXd h0;
};

void check_input(const ControllerParams& p, const PolicyInput& in) {
    if (in.arch_onehot.size() != p.onehot_size()) throw ShapeError("policy input does not match the controller");
    if (in.bucket < 0 || in.bucket >= p.shape().buckets) {
        throw ShapeError("shift bucket " + std::to_string(in.bucket) + " outside the embedding table");
    }
}

EncoderCache encode_state(const ControllerParams& p, const PolicyInput& in) {
    check_input(p, in);
    EncoderCache c;
    c.a1 = (p.block(Block::enc1_w) * in.arch_onehot + p.block(Block::enc1_b)).array().tanh();
    c.a2 = (p.block(Block::enc2_w) * c.a1 + p.block(Block::enc2_b)).array().tanh();
    c.state.resize(c.a2.size() + p.shape().shift_embed);
    c.state << c.a2, p.block(Block::shift_table).col(in.bucket);
    c.h0 = (p.block(Block::init_w) * c.state + p.block(Block::init_b)).array().tanh();
    return c;
}

struct StepCache {
    DecisionKind kind = DecisionKind::Depth;
    int choice = 0;
    VectorXd x;
    VectorXd h_prev;
    VectorXd z;
    VectorXd r;
    VectorXd n;
    VectorXd h;
    VectorXd probs;
    double entropy = 0;
};

Block head_w(DecisionKind k) {
    switch (k) {
        case DecisionKind::Depth: return Block::depth_head_w;
        case DecisionKind::Kernel: return Block::kernel_head_w;
        case DecisionKind::Expansion: return Block::expansion_head_w;
    }
    return Block::depth_head_w;
}

Block head_b(DecisionKind k) { return static_cast<Block>(static_cast<int>(head_w(k)) + 1); }

Block embedding(DecisionKind k) {
    switch (k) {
        case DecisionKind::Depth: return Block::depth_emb;
        case DecisionKind::Kernel: return Block::kernel_emb;
        case DecisionKind::Expansion: return Block::expansion_emb;
    }
    return Block::depth_emb;
}

VectorXd sigmoid(const VectorXd& x) { return (1.0 + (-x.array()).exp()).inverse(); }

// One GRU step; fills the gate activations of `s` from s.x and s.h_prev.
void gru_forward(const ControllerParams& p, StepCache& s) {
    s.z = sigmoid(p.block(Block::gru_wz) * s.x + p.block(Block::gru_uz) * s.h_prev + p.block(Block::gru_bz));
    s.r = sigmoid(p.block(Block::gru_wr) * s.x + p.block(Block::gru_ur) * s.h_prev + p.block(Block::gru_br));
    const VectorXd gated = s.r.cwiseProduct(s.h_prev);
    s.n = (p.block(Block::gru_wn) * s.x + p.block(Block::gru_un) * gated + p.block(Block::gru_bn)).array().tanh();
    s.h = (1.0 - s.z.array()) * s.n.array() + s.z.array() * s.h_prev.array();
}

void softmax_into(const VectorXd& logits, StepCache& s) {
    if (!logits.allFinite()) throw NumericalError("controller produced non-finite logits");
    const double hi = logits.maxCoeff();
    s.probs = (logits.array() - hi).exp();
    s.probs /= s.probs.sum();
    double ent = 0;
    for (Eigen::Index i = 0; i < s.probs.size(); ++i) {
        if (s.probs(i) > 0) ent -= s.probs(i) * std::log(s.probs(i));
    }
    s.entropy = ent;
}

// Runs the decision sequence; `choose(probs, kind)` returns the chosen index.
template <typename Chooser>
Trajectory run_policy(const ControllerParams& p, const PolicyInput& in, const SpaceConfig& space, Chooser&& choose,
                      EncoderCache* enc_out = nullptr, std::vector<StepCache>* steps_out = nullptr) {
    p.check_compatible(space);
    EncoderCache enc = encode_state(p, in);
    Trajectory traj;
    traj.input = in;

    VectorXd h = enc.h0;
    VectorXd x = p.block(Block::start);
    std::vector<StepCache> steps;

    auto decide = [&](DecisionKind kind, int unit, int layer) {
        StepCache s;
        s.kind = kind;
        s.x = x;
        s.h_prev = h;
        gru_forward(p, s);
        const VectorXd logits = p.block(head_w(kind)) * s.h + p.block(head_b(kind));
        softmax_into(logits, s);
        s.choice = choose(s.probs, kind);
        if (s.choice < 0 || s.choice >= s.probs.size()) throw ShapeError("decision index out of range");
        const double lp = std::log(s.probs(s.choice));
        traj.decisions.push_back({kind, unit, layer, s.choice, lp, s.entropy});
        traj.total_log_prob += lp;
        traj.total_entropy += s.entropy;
        h = s.h;
        x = p.block(embedding(kind)).col(s.choice);
        const int c = s.choice;
        steps.push_back(std::move(s));
        return c;
    };

    for (int u = 0; u < space.n_units; ++u) {
        Unit unit;
        const int depth = space.depth_choices[static_cast<std::size_t>(decide(DecisionKind::Depth, u, -1))];
        for (int l = 0; l < depth; ++l) {
            const int k = decide(DecisionKind::Kernel, u, l);
            const int e = decide(DecisionKind::Expansion, u, l);
            unit.layers.push_back({space.kernel_choices[static_cast<std::size_t>(k)],
                                   space.expansion_choices[static_cast<std::size_t>(e)]});
        }
        traj.arch.units.push_back(std::move(unit));
    }
    if (enc_out) *enc_out = std::move(enc);
    if (steps_out) *steps_out = std::move(steps);
    return traj;
}

struct FixedChoices {
    const std::vector<int>& choices;
    std::size_t next = 0;
    int operator()(const VectorXd&, DecisionKind) {
        if (next >= choices.size()) throw ShapeError("trajectory is shorter than the decision sequence");
        return choices[next++];
    }
};

std::vector<int> trajectory_choices(const Trajectory& traj) {
    std::vector<int> out;
    out.reserve(traj.decisions.size());
    for (const auto& d : traj.decisions) out.push_back(d.choice);
    return out;
}

}  // namespace

VectorXd embed_state(const ControllerParams& p, const PolicyInput& in) { return encode_state(p, in).state; }

std::vector<int> decision_choices(const Architecture& a, const SpaceConfig& space) {
    validate(a, space);
    std::vector<int> out;
    for (const auto& unit : a.units) {
        out.push_back(choice_index(space.depth_choices, unit.depth()));
        for (const auto& layer : unit.layers) {
            out.push_back(choice_index(space.kernel_choices, layer.kernel));
            out.push_back(choice_index(space.expansion_choices, layer.expansion));
        }
    }
    return out;
}

Trajectory sample(const ControllerParams& p, const PolicyInput& in, const SpaceConfig& space, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto draw = [&](const VectorXd& probs, DecisionKind) {
        const double u = unif(rng);
        double acc = 0;
        for (Eigen::Index i = 0; i < probs.size(); ++i) {
            acc += probs(i);
            if (u < acc) return static_cast<int>(i);
        }
        // u landed in the round-off gap above the cumulative sum.
        for (Eigen::Index i = probs.size() - 1; i >= 0; --i) {
            if (probs(i) > 0) return static_cast<int>(i);
        }
        return 0;
    };
    return run_policy(p, in, space, draw);
}

Architecture greedy_decode(const ControllerParams& p, const PolicyInput& in, const SpaceConfig& space) {
    auto argmax = [](const VectorXd& probs, DecisionKind) {
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < probs.size(); ++i) {
            if (probs(i) > probs(best)) best = i;
        }
        return static_cast<int>(best);
    };
    return run_policy(p, in, space, argmax).arch;
}

Trajectory evaluate_path(const ControllerParams& p, const PolicyInput& in, const SpaceConfig& space,
                         const Architecture& a) {
    const auto choices = decision_choices(a, space);
    FixedChoices fixed{choices};
    auto traj = run_policy(p, in, space, fixed);
    if (fixed.next != choices.size()) throw ShapeError("architecture has more decisions than the policy consumed");
    return traj;
}

double policy_objective(const ControllerParams& p, const Trajectory& traj, const SpaceConfig& space,
                        double advantage, double entropy_weight, double weight_decay) {
    const auto choices = trajectory_choices(traj);
    FixedChoices fixed{choices};
    const Trajectory t = run_policy(p, traj.input, space, fixed);
    return advantage * t.total_log_prob + entropy_weight * t.total_entropy -
           0.5 * weight_decay * p.theta().squaredNorm();
}

VectorXd policy_gradient(const ControllerParams& p, const Trajectory& traj, const SpaceConfig& space,
                         double advantage, double entropy_weight, double weight_decay) {
    const auto choices = trajectory_choices(traj);
    FixedChoices fixed{choices};
    EncoderCache enc;
    std::vector<StepCache> steps;
    run_policy(p, traj.input, space, fixed, &enc, &steps);

    VectorXd grad = VectorXd::Zero(p.size());
    auto g = [&](Block b) { return p.block(grad, b); };

    const Eigen::Index hsz = p.shape().hidden;
    VectorXd dh_carry = VectorXd::Zero(hsz);
    for (std::size_t i = steps.size(); i-- > 0;) {
        const StepCache& s = steps[i];
        // d/dlogits of advantage·log p_c + entropy_weight·H
        VectorXd dlogits = -advantage * s.probs;
        dlogits(s.choice) += advantage;
        if (entropy_weight != 0) {
            const VectorXd logp = s.probs.array().max(1e-300).log();
            dlogits.array() -= entropy_weight * s.probs.array() * (logp.array() + s.entropy);
        }
        g(head_w(s.kind)).noalias() += dlogits * s.h.transpose();
        g(head_b(s.kind)) += dlogits;

        const VectorXd dh = p.block(head_w(s.kind)).transpose() * dlogits + dh_carry;

        // h = (1 − z)·n + z·h_prev
        const VectorXd dn = dh.cwiseProduct((1.0 - s.z.array()).matrix());
        const VectorXd dz = dh.cwiseProduct(s.h_prev - s.n);
        VectorXd dh_prev = dh.cwiseProduct(s.z);

        const VectorXd dn_pre = dn.cwiseProduct((1.0 - s.n.array().square()).matrix());
        const VectorXd gated = s.r.cwiseProduct(s.h_prev);
        g(Block::gru_wn).noalias() += dn_pre * s.x.transpose();
        g(Block::gru_un).noalias() += dn_pre * gated.transpose();
        g(Block::gru_bn) += dn_pre;
        const VectorXd dgated = p.block(Block::gru_un).transpose() * dn_pre;
        const VectorXd dr = dgated.cwiseProduct(s.h_prev);
        dh_prev += dgated.cwiseProduct(s.r);

        const VectorXd dz_pre = dz.cwiseProduct((s.z.array() * (1.0 - s.z.array())).matrix());
        const VectorXd dr_pre = dr.cwiseProduct((s.r.array() * (1.0 - s.r.array())).matrix());
        g(Block::gru_wz).noalias() += dz_pre * s.x.transpose();
        g(Block::gru_uz).noalias() += dz_pre * s.h_prev.transpose();
        g(Block::gru_bz) += dz_pre;
        g(Block::gru_wr).noalias() += dr_pre * s.x.transpose();
        g(Block::gru_ur).noalias() += dr_pre * s.h_prev.transpose();
        g(Block::gru_br) += dr_pre;
        dh_prev.noalias() += p.block(Block::gru_uz).transpose() * dz_pre;
        dh_prev.noalias() += p.block(Block::gru_ur).transpose() * dr_pre;

        const VectorXd dx = p.block(Block::gru_wn).transpose() * dn_pre +
                            p.block(Block::gru_wz).transpose() * dz_pre +
                            p.block(Block::gru_wr).transpose() * dr_pre;
        if (i == 0) {
            g(Block::start) += dx;
        } else {
            const StepCache& prev = steps[i - 1];
            g(embedding(prev.kind)).col(prev.choice) += dx;
        }
        dh_carry = std::move(dh_prev);
    }

    // h0 = tanh(W_init·state + b_init), state = [a2; shift_table(:, bucket)]
    const VectorXd d_init = dh_carry.cwiseProduct((1.0 - enc.h0.array().square()).matrix());
    g(Block::init_w).noalias() += d_init * enc.state.transpose();
    g(Block::init_b) += d_init;
    const VectorXd dstate = p.block(Block::init_w).transpose() * d_init;
    const Eigen::Index a2 = enc.a2.size();
    g(Block::shift_table).col(traj.input.bucket) += dstate.tail(dstate.size() - a2);

    const VectorXd d2 = dstate.head(a2).cwiseProduct((1.0 - enc.a2.array().square()).matrix());
    g(Block::enc2_w).noalias() += d2 * enc.a1.transpose();
    g(Block::enc2_b) += d2;
    const VectorXd d1 =
        (p.block(Block::enc2_w).transpose() * d2).cwiseProduct((1.0 - enc.a1.array().square()).matrix());
    g(Block::enc1_w).noalias() += d1 * traj.input.arch_onehot.transpose();
    g(Block::enc1_b) += d1;

    if (weight_decay != 0) grad -= weight_decay * p.theta();
    if (!grad.allFinite()) throw NumericalError("non-finite policy gradient");
    return grad;
}

// ---------------------------------------------------------------------------
// Training

void apply_update(ControllerParams& p, const VectorXd& grad, const TrainerConfig& cfg, TrainingState& state) {
    if (!grad.allFinite()) throw NumericalError("non-finite policy gradient");
    if (cfg.optimizer == Optimizer::Sgd) {
        p.theta() += cfg.learning_rate * grad;
        ++state.step;
        return;
    }
    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;
    if (state.m.size() != p.size()) {
        state.m = VectorXd::Zero(p.size());
        state.v = VectorXd::Zero(p.size());
        state.step = 0;
    }
    ++state.step;
    state.m = beta1 * state.m + (1 - beta1) * grad;
    state.v = beta2 * state.v + (1 - beta2) * grad.cwiseAbs2();
    const double c1 = 1 - std::pow(beta1, static_cast<double>(state.step));
    const double c2 = 1 - std::pow(beta2, static_cast<double>(state.step));
    p.theta().array() += cfg.learning_rate * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + eps);
}

namespace {

double advantage_of(double reward, const TrainerConfig& cfg, const TrainingState& state) {
    return cfg.use_baseline ? reward - state.baseline : reward;
}

void update_baseline(double reward, const TrainerConfig& cfg, TrainingState& state) {
    if (cfg.use_baseline) state.baseline = cfg.baseline_decay * state.baseline + (1 - cfg.baseline_decay) * reward;
}

}  // namespace

void reinforce_step(ControllerParams& p, const Trajectory& traj, double reward, const TrainerConfig& cfg,
                    const SpaceConfig& space, TrainingState& state) {
    if (!std::isfinite(reward)) throw NumericalError("non-finite reward");
    const VectorXd grad =
        policy_gradient(p, traj, space, advantage_of(reward, cfg, state), cfg.entropy_weight, cfg.weight_decay);
    apply_update(p, grad, cfg, state);
    update_baseline(reward, cfg, state);
}

TrainResult train(ControllerParams& p, const Architecture& prev, double shift, const SnapshotMeta& meta,
                  const Evaluator& eval, const SpaceConfig& space, const TrainerConfig& cfg) {
    cfg.validate();
    const auto edges = cfg.bucket_edges.empty() ? default_bucket_edges(p.shape().buckets) : cfg.bucket_edges;
    if (static_cast<int>(edges.size()) + 1 != p.shape().buckets) {
        throw InvalidConfig("bucket edge count must be controller.buckets - 1");
    }
    const PolicyInput input = make_input(prev, shift, edges, space);
    const double v_prev = eval.accuracy(prev, meta);
    const double c_prev = madds(prev, space);

    std::mt19937_64 rng(cfg.seed);
    TrainResult result;
    result.trace.reserve(static_cast<std::size_t>(cfg.iterations));
    for (int it = 0; it < cfg.iterations; ++it) {
        VectorXd grad = VectorXd::Zero(p.size());
        double reward_sum = 0, entropy_sum = 0, madds_sum = 0;
        std::vector<double> rewards;
        for (int b = 0; b < cfg.batch_size; ++b) {
            const Trajectory traj = sample(p, input, space, rng);
            const double c_new = madds(traj.arch, space);
            const double r = reward(eval.accuracy(traj.arch, meta), v_prev, c_new, c_prev, cfg.lambda, shift);
            if (!std::isfinite(r)) throw NumericalError("non-finite reward");
            grad += policy_gradient(p, traj, space, advantage_of(r, cfg, result.state), cfg.entropy_weight,
                                    cfg.weight_decay);
            rewards.push_back(r);
            reward_sum += r;
            entropy_sum += traj.total_entropy;
            madds_sum += c_new;
        }
        apply_update(p, grad / cfg.batch_size, cfg, result.state);
        for (double r : rewards) update_baseline(r, cfg, result.state);
        const double n = cfg.batch_size;
        result.trace.push_back({it, reward_sum / n, entropy_sum / n, madds_sum / n});
    }
    return result;
}

void write_trace_csv(const std::vector<TraceRow>& trace, std::ostream& out) {
    char buf[64];
    auto num = [&](double v) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, ptr);
    };
    out << "iteration,reward,entropy,madds\n";
    for (const auto& row : trace) {
        out << row.iteration << ',' << num(row.reward) << ',' << num(row.entropy) << ',' << num(row.madds) << '\n';
    }
}

void write_trace_csv(const std::vector<TraceRow>& trace, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    write_trace_csv(trace, out);
}

}  // namespace growarch

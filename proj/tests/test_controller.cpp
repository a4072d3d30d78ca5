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

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "growarch/controller.hpp"
#include "growarch/errors.hpp"
#include "test_support.hpp"

namespace growarch {
namespace {

ControllerShape small_shape() {
    ControllerShape s;
    s.hidden = 4;
    s.encoder_hidden = 5;
    s.arch_embed = 3;
    s.shift_embed = 2;
    s.buckets = 4;
    s.init_range = 0.5;
    return s;
}

SpaceConfig one_unit_toy() {
    SpaceConfig s = SpaceConfig::toy();
    s.n_units = 1;
    s.unit_out_channels = {8};
    s.unit_strides = {2};
    return s;
}

PolicyInput input_for(const Architecture& prev, int bucket, const SpaceConfig& space) {
    return {arch_onehot(prev, space), bucket};
}

TEST(Policy, NormalizedOverToySpace) {
    const SpaceConfig space = SpaceConfig::toy();
    const auto all = enumerate(space, 1000);
    ASSERT_EQ(all.size(), 144u);

    ControllerParams uniform = ControllerParams::random(space, ControllerShape{}, 1);
    uniform.zero_heads();
    double total = 0;
    for (const auto& a : all) {
        const double p = std::exp(evaluate_path(uniform, input_for(min_arch(space), 0, space), space, a).total_log_prob);
        double expected = 1;  // uniform per decision, not per architecture
        for (const auto& u : a.units) expected *= 0.5 * std::pow(0.5, u.depth());
        EXPECT_NEAR(p, expected, 1e-15);
        total += p;
    }
    EXPECT_NEAR(total, 1.0, 1e-9);

    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto params = ControllerParams::random(space, ControllerShape{}, seed);
        const auto in = input_for(random_arch(space, seed), static_cast<int>(seed % 8), space);
        double sum = 0;
        for (const auto& a : all) {
            const double p = std::exp(evaluate_path(params, in, space, a).total_log_prob);
            EXPECT_GT(p, 0.0);
            EXPECT_LE(p, 1.0);
            sum += p;
        }
        EXPECT_NEAR(sum, 1.0, 1e-9) << "seed " << seed;
    }
}

TEST(Policy, GradientMatchesFiniteDifferences) {
    const SpaceConfig space = one_unit_toy();
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        ControllerParams p = ControllerParams::random(space, small_shape(), seed);
        const auto in = input_for(random_arch(space, seed + 10), 1, space);
        std::mt19937_64 rng(seed);
        const Trajectory traj = sample(p, in, space, rng);
        const double adv = 0.7, ent = 0.3, wd = 0.05;
        const Eigen::VectorXd g = policy_gradient(p, traj, space, adv, ent, wd);
        ASSERT_EQ(g.size(), p.size());
        const double h = 1e-5;
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            const double x = p.theta()(i);
            p.theta()(i) = x + h;
            const double up = policy_objective(p, evaluate_path(p, in, space, traj.arch), space, adv, ent, wd);
            p.theta()(i) = x - h;
            const double down = policy_objective(p, evaluate_path(p, in, space, traj.arch), space, adv, ent, wd);
            p.theta()(i) = x;
            const double fd = (up - down) / (2 * h);
            EXPECT_LE(std::abs(fd - g(i)), 1e-4 * std::max(1.0, std::abs(fd))) << "coordinate " << i;
        }
    }
}

TEST(Reinforce, NoUpdateAtZeroAdvantage) {
    const SpaceConfig space = SpaceConfig::toy();
    ControllerParams p = ControllerParams::random(space, small_shape(), 3);
    const ControllerParams before = p;
    std::mt19937_64 rng(0);
    const Trajectory traj = sample(p, input_for(min_arch(space), 0, space), space, rng);
    TrainerConfig cfg;
    cfg.entropy_weight = 0;
    cfg.weight_decay = 0;
    TrainingState state;
    state.baseline = 0.25;
    reinforce_step(p, traj, 0.25, cfg, space, state);
    EXPECT_EQ(p.theta(), before.theta());
}

TEST(Reinforce, SgdStepIsRewardTimesScoreFunction) {
    const SpaceConfig space = SpaceConfig::toy();
    ControllerParams p = ControllerParams::random(space, small_shape(), 4);
    const ControllerParams before = p;
    std::mt19937_64 rng(1);
    const Trajectory traj = sample(p, input_for(max_arch(space), 2, space), space, rng);
    TrainerConfig cfg;
    cfg.optimizer = Optimizer::Sgd;
    cfg.use_baseline = false;
    cfg.entropy_weight = 0;
    cfg.weight_decay = 0;
    cfg.learning_rate = 0.1;
    const double r = 0.37;
    const Eigen::VectorXd score = policy_gradient(before, traj, space, 1.0, 0, 0);
    TrainingState state;
    reinforce_step(p, traj, r, cfg, space, state);
    EXPECT_LE((p.theta() - before.theta() - cfg.learning_rate * r * score).norm(), 1e-12);
}

TEST(Train, SingleIterationMakesOneUpdate) {
    const SpaceConfig space = SpaceConfig::toy();
    ControllerParams p = ControllerParams::random(space, small_shape(), 5);
    const ControllerParams before = p;
    const SurrogateEvaluator eval(space, SurrogateConfig{});
    TrainerConfig cfg;
    cfg.iterations = 1;
    cfg.bucket_edges = log_spaced_edges(0.1, 10, 4);
    const auto res = train(p, min_arch(space), 1.0, testing::make_meta(0.5, 2, 4), eval, space, cfg);
    EXPECT_EQ(res.trace.size(), 1u);
    EXPECT_EQ(res.state.step, 1);
    EXPECT_NE(p.theta(), before.theta());
}

TEST(Train, Deterministic) {
    const SpaceConfig space = SpaceConfig::toy();
    const SurrogateEvaluator eval(space, SurrogateConfig{});
    TrainerConfig cfg;
    cfg.iterations = 50;
    cfg.seed = 9;
    cfg.bucket_edges = log_spaced_edges(0.1, 10, 4);
    ControllerParams a = ControllerParams::random(space, small_shape(), 6);
    ControllerParams b = a;
    train(a, min_arch(space), 1.0, testing::make_meta(0.5, 2, 4), eval, space, cfg);
    train(b, min_arch(space), 1.0, testing::make_meta(0.5, 2, 4), eval, space, cfg);
    EXPECT_EQ(a, b);
}

TEST(Sample, UniformHeadsGiveUniformTokens) {
    const SpaceConfig space = SpaceConfig::toy();
    ControllerParams p = ControllerParams::random(space, small_shape(), 7);
    p.zero_heads();
    const auto in = input_for(min_arch(space), 0, space);
    std::mt19937_64 rng(123);
    const int n = 100000;
    int deep = 0, wide = 0, last_deep = 0;
    for (int i = 0; i < n; ++i) {
        const auto traj = sample(p, in, space, rng);
        deep += traj.arch.units[0].depth() == 3;
        wide += traj.arch.units[0].layers[0].kernel == 5;
        last_deep += traj.arch.units[1].depth() == 3;
    }
    const double sd = std::sqrt(n * 0.25);
    EXPECT_LE(std::abs(deep - n / 2.0), 4 * sd);
    EXPECT_LE(std::abs(wide - n / 2.0), 4 * sd);
    EXPECT_LE(std::abs(last_deep - n / 2.0), 4 * sd);
}

TEST(Sample, LogProbMatchesEvaluatePath) {
    const SpaceConfig space = SpaceConfig::toy();
    const auto p = ControllerParams::random(space, small_shape(), 8);
    const auto in = input_for(min_arch(space), 3, space);
    std::mt19937_64 rng(2);
    for (int i = 0; i < 50; ++i) {
        const auto traj = sample(p, in, space, rng);
        const auto again = evaluate_path(p, in, space, traj.arch);
        EXPECT_NEAR(traj.total_log_prob, again.total_log_prob, 1e-12);
        EXPECT_LT(traj.total_log_prob, 0.0);
        EXPECT_EQ(decision_choices(traj.arch, space).size(), traj.decisions.size());
    }
}

TEST(Greedy, UniformPolicyPicksLowestIndices) {
    const SpaceConfig space = SpaceConfig::toy();
    ControllerParams p = ControllerParams::random(space, small_shape(), 9);
    p.zero_heads();
    EXPECT_EQ(greedy_decode(p, input_for(max_arch(space), 1, space), space), min_arch(space));
}

TEST(Greedy, IdempotentAndShiftInvariantInBias) {
    const SpaceConfig space = SpaceConfig::toy();
    ControllerParams p = ControllerParams::random(space, ControllerShape{}, 10);
    const auto in = input_for(random_arch(space, 4), 2, space);
    const Architecture a = greedy_decode(p, in, space);
    EXPECT_EQ(greedy_decode(p, in, space), a);
    const double lp = evaluate_path(p, in, space, a).total_log_prob;
    p.block(Block::depth_head_b).array() += 3.0;
    p.block(Block::kernel_head_b).array() -= 1.5;
    EXPECT_EQ(greedy_decode(p, in, space), a);
    EXPECT_NEAR(evaluate_path(p, in, space, a).total_log_prob, lp, 1e-12);
}

TEST(EmbedState, DependsOnArchAndBucket) {
    const SpaceConfig space = SpaceConfig::toy();
    const auto p = ControllerParams::random(space, small_shape(), 11);
    const Architecture a = min_arch(space);
    const Architecture b = max_arch(space);
    EXPECT_EQ(embed_state(p, input_for(a, 1, space)), embed_state(p, input_for(a, 1, space)));
    EXPECT_NE(embed_state(p, input_for(a, 1, space)), embed_state(p, input_for(a, 2, space)));
    EXPECT_NE(embed_state(p, input_for(a, 1, space)), embed_state(p, input_for(b, 1, space)));
    EXPECT_NE(arch_onehot(a, space), arch_onehot(b, space));
    EXPECT_EQ(arch_onehot(a, space).size(), p.onehot_size());
    EXPECT_THROW(embed_state(p, input_for(a, 4, space)), ShapeError);
}

TEST(EmbedState, ShiftsInOneBucketShareAState) {
    const SpaceConfig space = SpaceConfig::toy();
    const auto p = ControllerParams::random(space, small_shape(), 12);
    const auto edges = log_spaced_edges(0.1, 10, 4);  // 0.1, 1, 10
    const Architecture a = min_arch(space);
    EXPECT_EQ(embed_state(p, make_input(a, 0.2, edges, space)), embed_state(p, make_input(a, 0.9, edges, space)));
    EXPECT_NE(embed_state(p, make_input(a, 0.2, edges, space)), embed_state(p, make_input(a, 1.1, edges, space)));
    EXPECT_EQ(make_input(a, 1e9, edges, space).bucket, 3);
    EXPECT_EQ(make_input(a, 0.0, edges, space).bucket, 0);
    EXPECT_THROW(make_input(a, std::nan(""), edges, space), InvalidData);
}

TEST(Buckets, Edges) {
    const auto e = log_spaced_edges(0.01, 100, 5);
    ASSERT_EQ(e.size(), 4u);
    EXPECT_NEAR(e.front(), 0.01, 1e-15);
    EXPECT_NEAR(e.back(), 100, 1e-10);
    for (std::size_t i = 1; i < e.size(); ++i) EXPECT_NEAR(e[i] / e[i - 1], e[1] / e[0], 1e-12);
    EXPECT_EQ(shift_bucket(0.001, e), 0);
    EXPECT_EQ(shift_bucket(e[1], e), 2);
    EXPECT_EQ(shift_bucket(1e6, e), 4);
    EXPECT_TRUE(log_spaced_edges(1, 2, 1).empty());
    EXPECT_EQ(default_bucket_edges(8).size(), 7u);
    EXPECT_THROW(log_spaced_edges(0, 1, 4), InvalidConfig);
}

TEST(Trained, ShiftBucketChangesThePolicy) {
    const SpaceConfig space = SpaceConfig::toy();
    ControllerParams p = ControllerParams::random(space, small_shape(), 13);
    const SurrogateEvaluator eval(space, SurrogateConfig{});
    TrainerConfig cfg;
    cfg.iterations = 20;
    cfg.learning_rate = 1e-2;
    cfg.bucket_edges = log_spaced_edges(0.1, 10, 4);
    train(p, min_arch(space), 1.0, testing::make_meta(0.5, 2, 4), eval, space, cfg);
    const Architecture a = max_arch(space);
    const double lp0 = evaluate_path(p, input_for(min_arch(space), 0, space), space, a).total_log_prob;
    const double lp2 = evaluate_path(p, input_for(min_arch(space), 2, space), space, a).total_log_prob;
    EXPECT_NE(lp0, lp2);
}

TEST(ParamsFile, RoundTrip) {
    const SpaceConfig space = SpaceConfig::toy();
    const auto p = ControllerParams::random(space, small_shape(), 14);
    std::stringstream buf;
    save_params(p, buf);
    const auto q = load_params(buf, space);
    EXPECT_EQ(p, q);
    EXPECT_EQ(q.shape().hidden, 4);

    testing::TempDir dir;
    save_params(p, dir.path() / "c.axpt");
    EXPECT_EQ(load_params(dir.path() / "c.axpt", space), p);
}

TEST(ParamsFile, Rejections) {
    const SpaceConfig space = SpaceConfig::toy();
    std::stringstream bad("NOPE....");
    EXPECT_THROW(load_params(bad, space), IoError);

    std::stringstream buf;
    save_params(ControllerParams::random(space, small_shape(), 15), buf);
    EXPECT_THROW(load_params(buf, SpaceConfig{}), ShapeError);

    std::stringstream truncated(buf.str().substr(0, 40));
    EXPECT_THROW(load_params(truncated, space), IoError);
}

TEST(Params, IncompatibleInput) {
    const auto p = ControllerParams::random(SpaceConfig::toy(), small_shape(), 16);
    EXPECT_THROW(greedy_decode(p, input_for(min_arch(SpaceConfig{}), 0, SpaceConfig{}), SpaceConfig{}), ShapeError);
}

TEST(Trace, CsvHeader) {
    std::ostringstream out;
    write_trace_csv({{0, 0.5, 1.25, 12.0}}, out);
    EXPECT_EQ(out.str(), "iteration,reward,entropy,madds\n0,0.5,1.25,12\n");
}

TEST(TrainerConfig, Validation) {
    TrainerConfig cfg;
    cfg.batch_size = 0;
    EXPECT_THROW(cfg.validate(), InvalidConfig);
    cfg = TrainerConfig{};
    cfg.bucket_edges = {1.0, 0.5};
    EXPECT_THROW(cfg.validate(), InvalidConfig);
    cfg = TrainerConfig{};
    cfg.baseline_decay = 1.0;
    EXPECT_THROW(cfg.validate(), InvalidConfig);
}

}  // namespace
}  // namespace growarch

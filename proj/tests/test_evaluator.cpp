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

#include <algorithm>
#include <cmath>
#include <tuple>

#include <gtest/gtest.h>

#include "growarch/datagen.hpp"
#include "growarch/errors.hpp"
#include "growarch/evaluator.hpp"
#include "growarch/reward.hpp"
#include "test_support.hpp"

namespace growarch {
namespace {

using testing::make_meta;

// The surrogate written out from its definition.
double v_oracle(const Architecture& a, double s, const SurrogateConfig& c, const SpaceConfig& space) {
    const double cap = madds(a, space) / madds(max_arch(space), space);
    const double c_star = 0.3 + 0.6 * s;
    const double d_star = std::round(2 + 2 * s);
    double gap = 0;
    for (const auto& u : a.units) gap += std::abs(u.depth() - d_star);
    const double v = c.floor + c.peak_height * std::exp(-(cap - c_star) * (cap - c_star) / (2 * c.bump_width * c.bump_width)) -
                     0.02 * gap;
    return std::clamp(v, 0.0, 1.0);
}

TEST(ComplexityScore, Examples) {
    EXPECT_DOUBLE_EQ(complexity_score(make_meta(1.0, 10, 10)), 1.0);
    EXPECT_DOUBLE_EQ(complexity_score(make_meta(0.2, 1, 10)), 0.1);
    EXPECT_LT(complexity_score(make_meta(0.4, 3, 10)), complexity_score(make_meta(0.5, 3, 10)));
    EXPECT_LT(complexity_score(make_meta(0.4, 3, 10)), complexity_score(make_meta(0.4, 4, 10)));
    EXPECT_THROW(complexity_score(make_meta(0.5, 1, 1)), InvalidConfig);
}

TEST(Surrogate, MatchesDefinition) {
    const SpaceConfig space = SpaceConfig::toy();
    const SurrogateConfig cfg;
    for (double vf : {0.1, 0.5, 0.9}) {
        for (int c : {1, 3, 8}) {
            const auto meta = make_meta(vf, c, 8);
            const double s = complexity_score(meta);
            for (const auto& a : enumerate(space, 1000)) {
                EXPECT_NEAR(surrogate_accuracy(a, meta, cfg, space), v_oracle(a, s, cfg, space), 1e-12);
            }
        }
    }
}

TEST(Surrogate, PeakValue) {
    const SpaceConfig space = SpaceConfig::toy();
    const Architecture a = decode("k3e3,k5e3,k3e3;k3e3,k3e3,k5e3", space);
    const auto meta = make_meta(0.5, 2, 4);  // s = 0.5, d* = 3
    SurrogateConfig cfg;
    const double cap = madds(a, space) / madds(max_arch(space), space);
    cfg.optimum_intercept = cap - cfg.optimum_slope * 0.5;
    EXPECT_NEAR(surrogate_accuracy(a, meta, cfg, space), 0.95, 1e-12);
}

TEST(Surrogate, UnimodalInCapacityAtFixedDepth) {
    const SpaceConfig space = SpaceConfig::toy();
    const SurrogateConfig cfg;
    const auto meta = make_meta(0.5, 2, 4);
    const double c_star = optimal_capacity(0.5, cfg);
    const double max_c = madds(max_arch(space), space);
    std::vector<std::pair<double, double>> pts;  // (cap, V) for depth 3/3
    for (const auto& a : enumerate(space, 1000)) {
        if (a.units[0].depth() == 3 && a.units[1].depth() == 3) {
            pts.emplace_back(madds(a, space) / max_c, surrogate_accuracy(a, meta, cfg, space));
        }
    }
    std::sort(pts.begin(), pts.end());
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (pts[i].first <= c_star) {
            EXPECT_GE(pts[i].second, pts[i - 1].second);
        }
        if (pts[i - 1].first >= c_star) {
            EXPECT_LE(pts[i].second, pts[i - 1].second);
        }
    }
}

TEST(Surrogate, RangeAndDeterminism) {
    const SpaceConfig space;
    SurrogateConfig cfg;
    cfg.depth_penalty = 0.5;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const Architecture a = random_arch(space, seed);
        const auto meta = make_meta(0.3, 5, 10);
        const double v = surrogate_accuracy(a, meta, cfg, space);
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
        EXPECT_EQ(v, surrogate_accuracy(a, meta, cfg, space));
    }
}

TEST(Surrogate, ConfigValidation) {
    SurrogateConfig cfg;
    cfg.floor = 0.6;
    EXPECT_THROW(cfg.validate(), InvalidConfig);
    cfg = SurrogateConfig{};
    cfg.bump_width = 0;
    EXPECT_THROW(cfg.validate(), InvalidConfig);
}

TEST(Oracle, UniqueMaximizerOnToySpace) {
    GrowthPlan plan;
    plan.scenario = Scenario::ClassGrowth;
    plan.steps = {2, 4};
    plan.seed = 3;
    const SnapshotMeta meta = gen_snapshot(plan, 0).meta;
    ASSERT_DOUBLE_EQ(complexity_score(meta), 0.5);

    const SpaceConfig space = SpaceConfig::toy();
    const SurrogateConfig cfg;
    const auto all = enumerate(space, 1000);
    double best = -1;
    int count = 0;
    for (const auto& a : all) {
        const double v = surrogate_accuracy(a, meta, cfg, space);
        if (v > best) {
            best = v;
            count = 1;
        } else if (v == best) {
            ++count;
        }
    }
    EXPECT_EQ(count, 1);
    const auto r = oracle_best(space, meta, cfg, OracleObjective::accuracy());
    EXPECT_EQ(r.accuracy, best);
    EXPECT_EQ(encode(r.arch), encode(oracle_best(space, meta, cfg, OracleObjective::accuracy()).arch));
}

TEST(Oracle, TieBreakMatchesBruteForce) {
    const SpaceConfig space = SpaceConfig::toy();
    const SurrogateConfig cfg;
    const SurrogateEvaluator eval(space, cfg);
    const Architecture prev = min_arch(space);
    for (double s_vf : {0.2, 0.6, 1.0}) {
        const auto meta = make_meta(s_vf, 3, 8);
        for (const auto& obj : {OracleObjective::accuracy(), OracleObjective::reward(prev, 0.3, 1e-3)}) {
            std::tuple<double, double, std::string> key{-1e300, 0, ""};
            bool first = true;
            for (const auto& a : enumerate(space, 1000)) {
                const double o = objective_value(eval, space, meta, obj, a);
                std::tuple<double, double, std::string> k{-o, madds(a, space), encode(a)};
                if (first || k < key) key = k;
                first = false;
            }
            const auto r = oracle_best(eval, space, meta, obj);
            EXPECT_EQ(encode(r.arch), std::get<2>(key));
        }
    }
}

TEST(Oracle, PenaltyDominantPicksMinimumMadds) {
    const SpaceConfig space = SpaceConfig::toy();
    const auto meta = make_meta(0.9, 6, 8);
    const auto r =
        oracle_best(space, meta, SurrogateConfig{}, OracleObjective::reward(max_arch(space), 1e-3, 1e3));
    EXPECT_EQ(r.arch, min_arch(space));
}

TEST(Oracle, Singleton) {
    SpaceConfig space;
    space.n_units = 1;
    space.depth_choices = {2};
    space.kernel_choices = {3};
    space.expansion_choices = {6};
    space.unit_out_channels = {8};
    space.unit_strides = {1};
    const auto r = oracle_best(space, make_meta(0.5, 2, 4), SurrogateConfig{}, OracleObjective::accuracy());
    EXPECT_EQ(encode(r.arch), "k3e6,k3e6");
}

TEST(Oracle, TooLargeSpacePropagates) {
    EXPECT_THROW(oracle_best(SpaceConfig{}, make_meta(0.5, 2, 4), SurrogateConfig{}, OracleObjective::accuracy()),
                 SpaceTooLarge);
}

TEST(Oracle, OptimalCapacityGrowsWithComplexity) {
    const SpaceConfig space = SpaceConfig::toy();
    double prev = 0;
    for (int i = 0; i <= 20; ++i) {
        const double vf = i / 20.0;
        const auto r = oracle_best(space, make_meta(vf, 1, 8), SurrogateConfig{}, OracleObjective::accuracy());
        EXPECT_GE(r.madds, prev) << "vf=" << vf;
        prev = r.madds;
    }
}

TEST(Reward, Examples) {
    EXPECT_EQ(reward(0.8, 0.8, 300, 300, 2.5e-4, 0.5), 0.0);
    EXPECT_NEAR(reward(0.8, 0.7, 300, 200, 2.5e-4, 0.5), 0.05, 1e-12);
    EXPECT_THROW(reward(0.8, 0.7, 300, 200, 2.5e-4, 0.0), DivisionByZeroShift);
    EXPECT_LT(reward(0.8, 0.7, 300, 200, 2.5e-4, 0.5), reward(0.8, 0.7, 300, 200, 2.5e-4, 0.6));
    EXPECT_EQ(reward(0.9, 0.7, 300, 200, 0.0, 0.5), 0.9 - 0.7);
}

}  // namespace
}  // namespace growarch

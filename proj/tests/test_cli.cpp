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

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "growarch/cli.hpp"
#include "test_support.hpp"

#ifndef GROWARCH_SOURCE_DIR
#error "GROWARCH_SOURCE_DIR must be defined"
#endif

namespace growarch {
namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome cli(std::vector<std::string> args) {
    args.insert(args.begin(), "growarch");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

const std::string kToy = std::string(GROWARCH_SOURCE_DIR) + "/configs/toy.cfg";

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto r = cli({"simulate", "--config", kToy, "--out", dir.path().string()});
        ASSERT_EQ(r.code, 0) << r.err;
    }
    std::string snap(int t) const { return (dir.path() / ("snapshot_t" + std::to_string(t) + ".csv")).string(); }

    testing::TempDir dir;
};

TEST_F(CliTest, SimulateWritesEverySnapshot) {
    for (int t = 1; t <= 3; ++t) {
        EXPECT_TRUE(std::filesystem::exists(snap(t)));
        EXPECT_TRUE(std::filesystem::exists(dir.path() / ("snapshot_t" + std::to_string(t) + ".meta")));
    }
}

TEST_F(CliTest, DistanceToItselfIsZero) {
    const auto r = cli({"distance", snap(1), snap(1), "--js"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "d=0.000000 js=0.000000\n");
    const auto moved = cli({"distance", snap(1), snap(3)});
    EXPECT_EQ(moved.code, 0);
    EXPECT_NE(moved.out, "d=0.000000\n");
}

TEST_F(CliTest, GateOnIdenticalSnapshots) {
    const auto r = cli({"gate", snap(2), snap(2), "--config", kToy, "--set", "gate.epsilon=0.02"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "H_t=0.0000 adapt=false\n");
}

TEST_F(CliTest, GateOnGrowth) {
    const auto r = cli({"gate", snap(1), snap(3), "--config", kToy});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("adapt=true"), std::string::npos) << r.out;
}

TEST_F(CliTest, AdaptIsReproducible) {
    const auto a = dir.path() / "a";
    const auto b = dir.path() / "b";
    const std::vector<std::string> common{"adapt", "--config", kToy, "--set", "trainer.iterations=50"};
    auto args = common;
    args.insert(args.end(), {"--out", a.string()});
    const auto ra = cli(args);
    ASSERT_EQ(ra.code, 0) << ra.err;
    args = common;
    args.insert(args.end(), {"--out", b.string()});
    const auto rb = cli(args);
    ASSERT_EQ(rb.code, 0) << rb.err;
    EXPECT_EQ(ra.out, rb.out);
    EXPECT_EQ(slurp(a / "records.json"), slurp(b / "records.json"));

    const auto rep = cli({"report", (a / "records.json").string()});
    EXPECT_EQ(rep.code, 0);
    EXPECT_EQ(rep.out, ra.out);
}

TEST(Cli, Oracle) {
    const auto r = cli({"oracle", "--config", kToy, "--t", "1"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("arch=k", 0), 0u);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(cli({}).code, kExitUsage);
    EXPECT_EQ(cli({"frobnicate"}).code, kExitUsage);
    EXPECT_EQ(cli({"distance", "only-one.csv"}).code, kExitUsage);
    EXPECT_EQ(cli({"--help"}).code, kExitOk);
}

TEST(Cli, ConfigErrors) {
    const auto r = cli({"oracle", "--config", kToy, "--set", "trainer.lamda=1"});
    EXPECT_EQ(r.code, kExitRuntime);
    EXPECT_NE(r.err.find("trainer.lamda"), std::string::npos);
    EXPECT_EQ(cli({"oracle", "--set", "novalue"}).code, kExitRuntime);
    const auto big = cli({"adapt", "--set", "trainer.iterations=1"});
    EXPECT_EQ(big.code, kExitRuntime);
    EXPECT_NE(big.err.find("run.initial_arch"), std::string::npos);
}

TEST(Cli, MalformedRecords) {
    testing::TempDir dir;
    std::ofstream(dir.path() / "r.json") << "{not json";
    EXPECT_EQ(cli({"report", (dir.path() / "r.json").string()}).code, kExitRuntime);
}

}  // namespace
}  // namespace growarch

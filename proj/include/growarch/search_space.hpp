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

// Inverted-residual block search space: per-unit depth, per-layer kernel
// size and expansion ratio.
//
// Text grammar: units are joined by ';', layers inside a unit by ',', and
// each layer is written "k<kernel>e<expansion>". Depth is the layer count.

#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace growarch {

using SpaceCount = boost::multiprecision::cpp_int;

struct SpaceConfig {
    int n_units = 5;
    std::vector<int> depth_choices{2, 3, 4};
    std::vector<int> kernel_choices{3, 5, 7};
    std::vector<int> expansion_choices{3, 4, 6};
    int input_resolution = 224;
    int stem_channels = 16;
    std::vector<int> unit_out_channels{16, 24, 40, 80, 160};
    std::vector<int> unit_strides{1, 2, 2, 2, 2};

    /// Throws InvalidConfig unless choice sets are non-empty, positive and
    /// strictly ascending, and the channel/stride lists match n_units.
    void validate() const;

    [[nodiscard]] int max_depth() const { return depth_choices.back(); }

    /// 2 units, depths {2,3}, kernels {3,5}, expansion {3}: 144 architectures.
    static SpaceConfig toy();
};

struct LayerSpec {
    int kernel = 0;
    int expansion = 0;
    friend auto operator<=>(const LayerSpec&, const LayerSpec&) = default;
};

struct Unit {
    std::vector<LayerSpec> layers;
    [[nodiscard]] int depth() const { return static_cast<int>(layers.size()); }
    friend auto operator<=>(const Unit&, const Unit&) = default;
};

struct Architecture {
    std::vector<Unit> units;
    friend auto operator<=>(const Architecture&, const Architecture&) = default;
};

/// Index of `value` in `choices`, or -1.
int choice_index(const std::vector<int>& choices, int value);

/// Throws InvalidToken / ShapeError if `a` is not a member of the space.
void validate(const Architecture& a, const SpaceConfig& cfg);

std::string encode(const Architecture& a);
Architecture decode(std::string_view text, const SpaceConfig& cfg);

/// Smallest (all minimum tokens) and largest (all maximum tokens) architectures.
Architecture min_arch(const SpaceConfig& cfg);
Architecture max_arch(const SpaceConfig& cfg);

/// Multiply-adds of one inverted-residual layer at output resolution h×w.
double layer_madds(double c_in, double c_out, double expansion, double kernel, double h, double w);

/// Raw multiply-adds of the stem (3×3 stride-2 convolution from 3 channels).
double stem_madds(const SpaceConfig& cfg);

/// Total cost in millions of multiply-adds.
double madds(const Architecture& a, const SpaceConfig& cfg);

SpaceCount space_size(const SpaceConfig& cfg);

/// Every architecture exactly once, sorted by encoded string.
std::vector<Architecture> enumerate(const SpaceConfig& cfg, std::uint64_t cap);

/// Uniform draw over the whole space (depth weighted by its number of
/// completions, then each layer token uniform).
Architecture random_arch(const SpaceConfig& cfg, std::uint64_t seed);

}  // namespace growarch

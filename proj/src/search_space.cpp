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

#include "growarch/search_space.hpp"

#include <algorithm>
#include <cctype>
#include <random>

#include "growarch/errors.hpp"

namespace growarch {

namespace {

void require_ascending(const std::vector<int>& v, const char* name) {
    if (v.empty()) throw InvalidConfig(std::string(name) + " must not be empty");
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] <= 0) throw InvalidConfig(std::string(name) + " entries must be positive");
        if (i && v[i] <= v[i - 1]) throw InvalidConfig(std::string(name) + " must be strictly ascending");
    }
}

int halve(int h) { return (h + 1) / 2; }

struct RawLayer {
    std::size_t unit;
    std::size_t pos;
    int kernel;
    int expansion;
    std::size_t begin;  // byte offset of the token
};

}  // namespace

void SpaceConfig::validate() const {
    if (n_units < 1) throw InvalidConfig("space.n_units must be positive");
    require_ascending(depth_choices, "space.depths");
    require_ascending(kernel_choices, "space.kernels");
    require_ascending(expansion_choices, "space.expansions");
    if (input_resolution < 1) throw InvalidConfig("space.resolution must be positive");
    if (stem_channels < 1) throw InvalidConfig("space.stem_channels must be positive");
    if (unit_out_channels.size() != static_cast<std::size_t>(n_units)) {
        throw InvalidConfig("space.channels must list one entry per unit");
    }
    if (unit_strides.size() != static_cast<std::size_t>(n_units)) {
        throw InvalidConfig("space.strides must list one entry per unit");
    }
    for (int c : unit_out_channels) {
        if (c < 1) throw InvalidConfig("space.channels entries must be positive");
    }
    for (int s : unit_strides) {
        if (s != 1 && s != 2) throw InvalidConfig("space.strides entries must be 1 or 2");
    }
}

SpaceConfig SpaceConfig::toy() {
    SpaceConfig cfg;
    cfg.n_units = 2;
    cfg.depth_choices = {2, 3};
    cfg.kernel_choices = {3, 5};
    cfg.expansion_choices = {3};
    cfg.input_resolution = 224;
    cfg.stem_channels = 16;
    cfg.unit_out_channels = {4, 8};
    cfg.unit_strides = {2, 2};
    return cfg;
}

int choice_index(const std::vector<int>& choices, int value) {
    auto it = std::find(choices.begin(), choices.end(), value);
    return it == choices.end() ? -1 : static_cast<int>(it - choices.begin());
}

void validate(const Architecture& a, const SpaceConfig& cfg) {
    if (a.units.size() != static_cast<std::size_t>(cfg.n_units)) {
        throw ShapeError("architecture has " + std::to_string(a.units.size()) + " units, space expects " +
                         std::to_string(cfg.n_units));
    }
    for (std::size_t u = 0; u < a.units.size(); ++u) {
        const auto& unit = a.units[u];
        if (choice_index(cfg.depth_choices, unit.depth()) < 0) {
            throw InvalidToken("unit " + std::to_string(u) + ": depth " + std::to_string(unit.depth()) +
                               " not in depth choices");
        }
        for (const auto& layer : unit.layers) {
            if (choice_index(cfg.kernel_choices, layer.kernel) < 0) {
                throw InvalidToken("unit " + std::to_string(u) + ": kernel " + std::to_string(layer.kernel) +
                                   " not in kernel choices");
            }
            if (choice_index(cfg.expansion_choices, layer.expansion) < 0) {
                throw InvalidToken("unit " + std::to_string(u) + ": expansion " +
                                   std::to_string(layer.expansion) + " not in expansion choices");
            }
        }
    }
}

std::string encode(const Architecture& a) {
    std::string out;
    for (std::size_t u = 0; u < a.units.size(); ++u) {
        if (u) out += ';';
        const auto& layers = a.units[u].layers;
        for (std::size_t l = 0; l < layers.size(); ++l) {
            if (l) out += ',';
            out += 'k';
            out += std::to_string(layers[l].kernel);
            out += 'e';
            out += std::to_string(layers[l].expansion);
        }
    }
    return out;
}

Architecture decode(std::string_view text, const SpaceConfig& cfg) {
    std::size_t pos = 0;
    auto read_int = [&](char tag) {
        if (pos >= text.size() || text[pos] != tag) {
            throw ParseError(std::string("expected '") + tag + "'", pos);
        }
        ++pos;
        const std::size_t start = pos;
        int value = 0;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            if (pos - start >= 6) throw ParseError("number too long", start);
            value = value * 10 + (text[pos] - '0');
            ++pos;
        }
        if (pos == start) throw ParseError("expected digits", pos);
        return value;
    };

    Architecture a;
    a.units.emplace_back();
    while (true) {
        LayerSpec layer;
        layer.kernel = read_int('k');
        layer.expansion = read_int('e');
        a.units.back().layers.push_back(layer);
        if (pos == text.size()) break;
        if (text[pos] == ',') {
            ++pos;
        } else if (text[pos] == ';') {
            ++pos;
            a.units.emplace_back();
        } else {
            throw ParseError(std::string("unexpected character '") + text[pos] + "'", pos);
        }
    }
    validate(a, cfg);
    return a;
}

Architecture min_arch(const SpaceConfig& cfg) {
    Architecture a;
    a.units.assign(static_cast<std::size_t>(cfg.n_units),
                   Unit{std::vector<LayerSpec>(static_cast<std::size_t>(cfg.depth_choices.front()),
                                               {cfg.kernel_choices.front(), cfg.expansion_choices.front()})});
    return a;
}

Architecture max_arch(const SpaceConfig& cfg) {
    Architecture a;
    a.units.assign(static_cast<std::size_t>(cfg.n_units),
                   Unit{std::vector<LayerSpec>(static_cast<std::size_t>(cfg.depth_choices.back()),
                                               {cfg.kernel_choices.back(), cfg.expansion_choices.back()})});
    return a;
}

double layer_madds(double c_in, double c_out, double expansion, double kernel, double h, double w) {
    const double hidden = expansion * c_in;
    return h * w * c_in * hidden + h * w * hidden * kernel * kernel + h * w * hidden * c_out;
}

double stem_madds(const SpaceConfig& cfg) {
    const double h = halve(cfg.input_resolution);
    return h * h * 3.0 * 9.0 * cfg.stem_channels;
}

double madds(const Architecture& a, const SpaceConfig& cfg) {
    double total = stem_madds(cfg);
    int h = halve(cfg.input_resolution);
    int c_in = cfg.stem_channels;
    for (std::size_t u = 0; u < a.units.size(); ++u) {
        if (cfg.unit_strides[u] == 2) h = halve(h);
        const int c_out = cfg.unit_out_channels[u];
        for (const auto& layer : a.units[u].layers) {
            total += layer_madds(c_in, c_out, layer.expansion, layer.kernel, h, h);
            c_in = c_out;
        }
    }
    return total / 1e6;
}

SpaceCount space_size(const SpaceConfig& cfg) {
    const SpaceCount per_layer = SpaceCount(cfg.kernel_choices.size()) * cfg.expansion_choices.size();
    SpaceCount per_unit = 0;
    for (int d : cfg.depth_choices) per_unit += boost::multiprecision::pow(per_layer, static_cast<unsigned>(d));
    return boost::multiprecision::pow(per_unit, static_cast<unsigned>(cfg.n_units));
}

std::vector<Architecture> enumerate(const SpaceConfig& cfg, std::uint64_t cap) {
    const SpaceCount size = space_size(cfg);
    if (size > cap) throw SpaceTooLarge(size.str());

    // All possible units, then the cartesian product over unit positions.
    std::vector<Unit> units;
    for (int d : cfg.depth_choices) {
        std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
        const std::size_t nk = cfg.kernel_choices.size();
        const std::size_t ne = cfg.expansion_choices.size();
        const std::size_t per_layer = nk * ne;
        while (true) {
            Unit unit;
            for (std::size_t i : idx) unit.layers.push_back({cfg.kernel_choices[i / ne], cfg.expansion_choices[i % ne]});
            units.push_back(std::move(unit));
            std::size_t p = idx.size();
            while (p > 0 && ++idx[p - 1] == per_layer) idx[--p] = 0;
            if (p == 0) break;
        }
    }

    std::vector<Architecture> out;
    out.reserve(static_cast<std::size_t>(size));
    std::vector<std::size_t> pick(static_cast<std::size_t>(cfg.n_units), 0);
    while (true) {
        Architecture a;
        for (std::size_t i : pick) a.units.push_back(units[i]);
        out.push_back(std::move(a));
        std::size_t p = pick.size();
        while (p > 0 && ++pick[p - 1] == units.size()) pick[--p] = 0;
        if (p == 0) break;
    }

    std::vector<std::pair<std::string, std::size_t>> keys;
    keys.reserve(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) keys.emplace_back(encode(out[i]), i);
    std::sort(keys.begin(), keys.end());
    std::vector<Architecture> sorted;
    sorted.reserve(out.size());
    for (const auto& [key, i] : keys) sorted.push_back(std::move(out[i]));
    return sorted;
}

Architecture random_arch(const SpaceConfig& cfg, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const double per_layer = static_cast<double>(cfg.kernel_choices.size() * cfg.expansion_choices.size());
    std::vector<double> depth_weights;
    for (int d : cfg.depth_choices) depth_weights.push_back(std::pow(per_layer, d));
    std::discrete_distribution<std::size_t> depth_dist(depth_weights.begin(), depth_weights.end());
    std::uniform_int_distribution<std::size_t> kernel_dist(0, cfg.kernel_choices.size() - 1);
    std::uniform_int_distribution<std::size_t> expansion_dist(0, cfg.expansion_choices.size() - 1);

    Architecture a;
    for (int u = 0; u < cfg.n_units; ++u) {
        Unit unit;
        const int depth = cfg.depth_choices[depth_dist(rng)];
        for (int l = 0; l < depth; ++l) {
            const int k = cfg.kernel_choices[kernel_dist(rng)];
            const int e = cfg.expansion_choices[expansion_dist(rng)];
            unit.layers.push_back({k, e});
        }
        a.units.push_back(std::move(unit));
    }
    return a;
}

}  // namespace growarch

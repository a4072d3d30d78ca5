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

#include "growarch/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>

#include "growarch/errors.hpp"

namespace growarch {

namespace {

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_double(const std::string& v) {
    std::string s = trim(v);
    if (s == "inf" || s == "+inf") return INFINITY;
    double out = 0;
    const char* b = s.data();
    if (!s.empty() && s[0] == '+') ++b;
    auto [ptr, ec] = std::from_chars(b, s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) throw std::invalid_argument("not a number");
    return out;
}

long long to_int(const std::string& v) {
    std::string s = trim(v);
    long long out = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) throw std::invalid_argument("not an integer");
    return out;
}

int to_i32(const std::string& v) {
    const long long x = to_int(v);
    if (x < INT32_MIN || x > INT32_MAX) throw std::invalid_argument("integer out of range");
    return static_cast<int>(x);
}

std::uint64_t to_u64(const std::string& v) {
    std::string s = trim(v);
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) throw std::invalid_argument("not an unsigned integer");
    return out;
}

bool to_bool(const std::string& v) {
    const std::string s = trim(v);
    if (s == "true" || s == "1" || s == "on") return true;
    if (s == "false" || s == "0" || s == "off") return false;
    throw std::invalid_argument("not a boolean");
}

template <typename T, typename F>
std::vector<T> to_list(const std::string& v, F convert) {
    std::vector<T> out;
    const std::string s = trim(v);
    if (s.empty()) return out;
    std::size_t start = 0;
    while (true) {
        const auto comma = s.find(',', start);
        out.push_back(convert(s.substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

template <typename T>
std::string fmt_list(const std::vector<T>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        if constexpr (std::is_floating_point_v<T>) {
            out += fmt(v[i]);
        } else {
            out += std::to_string(v[i]);
        }
    }
    return out;
}

struct Field {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

#define GROWARCH_NUM_FIELD(key, member, conv, show) \
    {key, {[](RunConfig& c, const std::string& v) { c.member = conv(v); }, [](const RunConfig& c) { return show(c.member); }}}

std::string show_int(long long v) { return std::to_string(v); }
std::string show_u64(std::uint64_t v) { return std::to_string(v); }
std::string show_bool(bool v) { return v ? "true" : "false"; }

const std::map<std::string, Field>& fields() {
    static const std::map<std::string, Field> table = {
        {"plan.scenario",
         {[](RunConfig& c, const std::string& v) { c.plan.scenario = scenario_from_string(trim(v)); },
          [](const RunConfig& c) { return to_string(c.plan.scenario); }}},
        {"plan.steps",
         {[](RunConfig& c, const std::string& v) { c.plan.steps = to_list<double>(v, to_double); },
          [](const RunConfig& c) { return fmt_list(c.plan.steps); }}},
        GROWARCH_NUM_FIELD("plan.dim", plan.feature_dim, to_i32, show_int),
        GROWARCH_NUM_FIELD("plan.spread", plan.spread, to_double, fmt),
        GROWARCH_NUM_FIELD("plan.radius", plan.prototype_radius, to_double, fmt),
        GROWARCH_NUM_FIELD("plan.base_samples", plan.base_samples, to_i32, show_int),
        GROWARCH_NUM_FIELD("plan.n_classes", plan.n_classes, to_i32, show_int),
        GROWARCH_NUM_FIELD("plan.max_classes", plan.max_classes, to_i32, show_int),

        GROWARCH_NUM_FIELD("space.n_units", space.n_units, to_i32, show_int),
        {"space.depths",
         {[](RunConfig& c, const std::string& v) { c.space.depth_choices = to_list<int>(v, to_i32); },
          [](const RunConfig& c) { return fmt_list(c.space.depth_choices); }}},
        {"space.kernels",
         {[](RunConfig& c, const std::string& v) { c.space.kernel_choices = to_list<int>(v, to_i32); },
          [](const RunConfig& c) { return fmt_list(c.space.kernel_choices); }}},
        {"space.expansions",
         {[](RunConfig& c, const std::string& v) { c.space.expansion_choices = to_list<int>(v, to_i32); },
          [](const RunConfig& c) { return fmt_list(c.space.expansion_choices); }}},
        GROWARCH_NUM_FIELD("space.resolution", space.input_resolution, to_i32, show_int),
        GROWARCH_NUM_FIELD("space.stem_channels", space.stem_channels, to_i32, show_int),
        {"space.channels",
         {[](RunConfig& c, const std::string& v) { c.space.unit_out_channels = to_list<int>(v, to_i32); },
          [](const RunConfig& c) { return fmt_list(c.space.unit_out_channels); }}},
        {"space.strides",
         {[](RunConfig& c, const std::string& v) { c.space.unit_strides = to_list<int>(v, to_i32); },
          [](const RunConfig& c) { return fmt_list(c.space.unit_strides); }}},

        GROWARCH_NUM_FIELD("surrogate.peak", surrogate.peak_height, to_double, fmt),
        GROWARCH_NUM_FIELD("surrogate.floor", surrogate.floor, to_double, fmt),
        GROWARCH_NUM_FIELD("surrogate.width", surrogate.bump_width, to_double, fmt),
        GROWARCH_NUM_FIELD("surrogate.optimum_intercept", surrogate.optimum_intercept, to_double, fmt),
        GROWARCH_NUM_FIELD("surrogate.optimum_slope", surrogate.optimum_slope, to_double, fmt),
        GROWARCH_NUM_FIELD("surrogate.depth_penalty", surrogate.depth_penalty, to_double, fmt),

        GROWARCH_NUM_FIELD("gate.epsilon", gate.epsilon, to_double, fmt),

        GROWARCH_NUM_FIELD("trainer.lr", trainer.learning_rate, to_double, fmt),
        GROWARCH_NUM_FIELD("trainer.weight_decay", trainer.weight_decay, to_double, fmt),
        GROWARCH_NUM_FIELD("trainer.iterations", trainer.iterations, to_i32, show_int),
        GROWARCH_NUM_FIELD("trainer.entropy_weight", trainer.entropy_weight, to_double, fmt),
        GROWARCH_NUM_FIELD("trainer.lambda", trainer.lambda, to_double, fmt),
        GROWARCH_NUM_FIELD("trainer.baseline", trainer.use_baseline, to_bool, show_bool),
        GROWARCH_NUM_FIELD("trainer.baseline_decay", trainer.baseline_decay, to_double, fmt),
        GROWARCH_NUM_FIELD("trainer.batch_size", trainer.batch_size, to_i32, show_int),
        {"trainer.optimizer",
         {[](RunConfig& c, const std::string& v) {
              const auto s = trim(v);
              if (s == "adam") {
                  c.trainer.optimizer = Optimizer::Adam;
              } else if (s == "sgd") {
                  c.trainer.optimizer = Optimizer::Sgd;
              } else {
                  throw std::invalid_argument("expected adam or sgd");
              }
          },
          [](const RunConfig& c) { return std::string(c.trainer.optimizer == Optimizer::Adam ? "adam" : "sgd"); }}},
        {"trainer.bucket_edges",
         {[](RunConfig& c, const std::string& v) { c.trainer.bucket_edges = to_list<double>(v, to_double); },
          [](const RunConfig& c) { return fmt_list(c.trainer.bucket_edges); }}},

        GROWARCH_NUM_FIELD("controller.hidden", controller.hidden, to_i32, show_int),
        GROWARCH_NUM_FIELD("controller.encoder_hidden", controller.encoder_hidden, to_i32, show_int),
        GROWARCH_NUM_FIELD("controller.arch_embed", controller.arch_embed, to_i32, show_int),
        GROWARCH_NUM_FIELD("controller.shift_embed", controller.shift_embed, to_i32, show_int),
        GROWARCH_NUM_FIELD("controller.buckets", controller.buckets, to_i32, show_int),
        GROWARCH_NUM_FIELD("controller.init_range", controller.init_range, to_double, fmt),

        {"run.initial_arch",
         {[](RunConfig& c, const std::string& v) { c.initial_arch = trim(v); },
          [](const RunConfig& c) { return c.initial_arch; }}},
        GROWARCH_NUM_FIELD("run.seed", seed, to_u64, show_u64),
        GROWARCH_NUM_FIELD("run.js_samples", js_samples, to_i32, show_int),
        {"sweep.lambdas",
         {[](RunConfig& c, const std::string& v) { c.sweep_lambdas = to_list<double>(v, to_double); },
          [](const RunConfig& c) { return fmt_list(c.sweep_lambdas); }}},
    };
    return table;
}

#undef GROWARCH_NUM_FIELD

}  // namespace

void RunConfig::validate() const {
    plan.validate();
    space.validate();
    surrogate.validate();
    gate.validate();
    trainer.validate();
    controller.validate();
    if (!trainer.bucket_edges.empty() && static_cast<int>(trainer.bucket_edges.size()) + 1 != controller.buckets) {
        throw InvalidConfig("trainer.bucket_edges must list controller.buckets - 1 edges");
    }
    if (js_samples < 1000) throw InvalidConfig("run.js_samples must be at least 1000");
    if (initial_arch != "oracle") decode(initial_arch, space);
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value, const std::string& where) {
    const std::string prefix = where.empty() ? "" : where + ": ";
    const auto& table = fields();
    auto it = table.find(key);
    if (it == table.end()) throw InvalidConfig(prefix + "unknown key '" + key + "'");
    try {
        it->second.set(cfg, value);
    } catch (const std::invalid_argument& e) {
        throw InvalidConfig(prefix + "invalid value '" + value + "' for '" + key + "': " + e.what());
    } catch (const InvalidConfig& e) {
        throw InvalidConfig(prefix + "invalid value for '" + key + "': " + e.what());
    }
}

void apply_config(RunConfig& cfg, std::istream& in, const std::string& source) {
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = source + ":" + std::to_string(line_no);
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw InvalidConfig(where + ": expected key=value");
        apply_setting(cfg, trim(line.substr(0, eq)), line.substr(eq + 1), where);
    }
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    RunConfig cfg;
    apply_config(cfg, in, path.string());
    return cfg;
}

std::map<std::string, std::string> config_entries(const RunConfig& cfg) {
    std::map<std::string, std::string> out;
    for (const auto& [key, field] : fields()) out[key] = field.get(cfg);
    return out;
}

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto& [key, field] : fields()) out.push_back(key);
    return out;
}

}  // namespace growarch

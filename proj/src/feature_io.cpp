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

#include "growarch/feature_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace growarch {

namespace {

double parse_field(std::string_view field, std::size_t line_no) {
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\r')) field.remove_suffix(1);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double value = 0;
    const auto* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc() || ptr != end || field.empty()) {
        throw InvalidData("line " + std::to_string(line_no) + ": cannot parse '" + std::string(field) + "'");
    }
    if (!std::isfinite(value)) throw InvalidData("line " + std::to_string(line_no) + ": non-finite value");
    return value;
}

}  // namespace

FeatureMatrix parse_feature_csv(std::istream& in) {
    std::vector<double> values;
    std::size_t cols = 0;
    std::size_t rows = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        std::size_t count = 0;
        std::string_view rest(line);
        while (true) {
            const auto comma = rest.find(',');
            values.push_back(parse_field(rest.substr(0, comma), line_no));
            ++count;
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (rows == 0) {
            cols = count;
        } else if (count != cols) {
            throw InvalidData("line " + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                              " columns, found " + std::to_string(count));
        }
        ++rows;
    }
    if (rows == 0) throw InvalidData("feature file is empty");
    FeatureMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    std::copy(values.begin(), values.end(), m.data());
    return m;
}

FeatureMatrix read_feature_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return parse_feature_csv(in);
}

void write_feature_csv(std::ostream& out, const FeatureMatrix& m) {
    char buf[64];
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) out.put(',');
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, m(r, c));
            out.write(buf, ptr - buf);
        }
        out.put('\n');
    }
}

void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    write_feature_csv(out, m);
}

}  // namespace growarch

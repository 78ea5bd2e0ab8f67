/*
 * Copyright 2026 The seduq Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "seduq/wind_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "seduq/common.hpp"

namespace seduq::wind {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    for (auto& f : fields) {
        const auto b = f.find_first_not_of(" \t");
        const auto e = f.find_last_not_of(" \t");
        f = (b == std::string::npos) ? std::string{} : f.substr(b, e - b + 1);
    }
    return fields;
}

double parse_double(const std::string& s, const char* what, std::size_t line) {
    double v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ParseError(std::string("unparseable ") + what + " '" + s + "'",
                         line);
    if (!std::isfinite(v))
        throw ParseError(std::string(what) + " is not finite", line);
    return v;
}

// Accepts YYYY-MM-DD[T ]HH:MM[:SS[.frac]] with optional trailing zone text.
void parse_timestamp(const std::string& ts, std::string& day, int& hour,
                     std::size_t line) {
    auto fail = [&] {
        throw ParseError("unparseable timestamp '" + ts + "'", line);
    };
    if (ts.size() < 16) fail();
    if (ts[4] != '-' || ts[7] != '-' || (ts[10] != 'T' && ts[10] != ' ') ||
        ts[13] != ':')
        fail();
    auto digits = [&](std::size_t pos, std::size_t len) {
        int v = 0;
        for (std::size_t i = pos; i < pos + len; ++i) {
            if (ts[i] < '0' || ts[i] > '9') fail();
            v = v * 10 + (ts[i] - '0');
        }
        return v;
    };
    const int month = digits(5, 2);
    const int dom = digits(8, 2);
    const int hh = digits(11, 2);
    const int mm = digits(14, 2);
    if (month < 1 || month > 12 || dom < 1 || dom > 31 || hh > 23 || mm > 59)
        fail();
    digits(0, 4);
    day = ts.substr(0, 10);
    hour = hh + 1; // hours indexed 1..24
}

} // namespace

std::vector<WindFieldRecord> ingest_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw InvalidInput("cannot open wind CSV: " + path.string());

    std::string line;
    if (!std::getline(in, line))
        throw SchemaError("empty wind CSV: " + path.string());

    static const std::vector<std::string> kColumns = {
        "timestamp", "farm_id", "turbine_id", "speed_mps", "power_mw"};

    const auto header = split_csv_line(line);
    std::vector<int> col_of(kColumns.size(), -1);
    for (std::size_t i = 0; i < header.size(); ++i) {
        const auto it = std::find(kColumns.begin(), kColumns.end(), header[i]);
        if (it == kColumns.end())
            throw SchemaError("unexpected column '" + header[i] + "' in " +
                              path.string());
        col_of[static_cast<std::size_t>(it - kColumns.begin())] =
            static_cast<int>(i);
    }
    for (std::size_t c = 0; c < kColumns.size(); ++c)
        if (col_of[c] < 0)
            throw SchemaError("missing column '" + kColumns[c] + "' in " +
                              path.string());

    std::vector<WindFieldRecord> records;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) +
                                 " fields, got " +
                                 std::to_string(fields.size()),
                             lineno);
        WindFieldRecord rec;
        rec.timestamp = fields[static_cast<std::size_t>(col_of[0])];
        rec.farm_id = fields[static_cast<std::size_t>(col_of[1])];
        rec.turbine_id = fields[static_cast<std::size_t>(col_of[2])];
        rec.speed_mps = parse_double(fields[static_cast<std::size_t>(col_of[3])],
                                     "speed_mps", lineno);
        rec.power_mw = parse_double(fields[static_cast<std::size_t>(col_of[4])],
                                    "power_mw", lineno);
        if (rec.speed_mps < 0.0)
            throw ParseError("negative speed_mps", lineno);
        if (rec.power_mw < 0.0)
            throw ParseError("negative power_mw", lineno);
        if (rec.farm_id.empty() || rec.turbine_id.empty())
            throw ParseError("empty farm_id or turbine_id", lineno);
        parse_timestamp(rec.timestamp, rec.day, rec.hour, lineno);
        records.push_back(std::move(rec));
    }
    return records;
}

std::map<std::string, std::vector<WindFieldRecord>>
group_by_farm(std::span<const WindFieldRecord> records) {
    std::map<std::string, std::vector<WindFieldRecord>> out;
    for (const auto& r : records) out[r.farm_id].push_back(r);
    return out;
}

HourlyAverages hourly_farm_average(std::span<const WindFieldRecord> records) {
    if (records.empty())
        throw InsufficientData("hourly_farm_average: no records");
    const std::string& farm = records.front().farm_id;
    for (const auto& r : records)
        if (r.farm_id != farm)
            throw InvalidInput("hourly_farm_average: mixed farms '" + farm +
                               "' and '" + r.farm_id + "'");

    struct Cell {
        double speed_sum = 0, power_sum = 0;
        int count = 0;
    };
    std::map<std::string, std::array<Cell, kHoursPerDay>> by_day;
    for (const auto& r : records) {
        auto& cell = by_day[r.day][static_cast<std::size_t>(r.hour - 1)];
        cell.speed_sum += r.speed_mps;
        cell.power_sum += r.power_mw;
        cell.count += 1;
    }

    std::vector<std::string> complete, dropped;
    for (const auto& [day, cells] : by_day) {
        const bool full = std::all_of(cells.begin(), cells.end(),
                                      [](const Cell& c) { return c.count > 0; });
        (full ? complete : dropped).push_back(day);
    }
    if (complete.empty())
        throw InsufficientData("hourly_farm_average: farm '" + farm +
                               "' has no complete days");

    const auto n = static_cast<Eigen::Index>(complete.size());
    HourlyAverages out;
    out.speed = WindFieldMatrix{farm, complete,
                                Eigen::MatrixXd::Zero(n, kHoursPerDay)};
    out.power = WindFieldMatrix{farm, complete,
                                Eigen::MatrixXd::Zero(n, kHoursPerDay)};
    out.dropped_days = std::move(dropped);
    for (Eigen::Index d = 0; d < n; ++d) {
        const auto& cells = by_day.at(complete[static_cast<std::size_t>(d)]);
        for (int h = 0; h < kHoursPerDay; ++h) {
            const auto& c = cells[static_cast<std::size_t>(h)];
            out.speed.values(d, h) = c.speed_sum / c.count;
            out.power.values(d, h) = c.power_sum / c.count;
        }
    }
    return out;
}

nlohmann::json WindFieldMatrix::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index d = 0; d < values.rows(); ++d) {
        nlohmann::json row = nlohmann::json::array();
        for (int h = 0; h < kHoursPerDay; ++h) row.push_back(values(d, h));
        rows.push_back(std::move(row));
    }
    return {{"farm_id", farm_id}, {"days", days}, {"values", rows}};
}

WindFieldMatrix WindFieldMatrix::from_json(const nlohmann::json& j) {
    WindFieldMatrix m;
    m.farm_id = j.at("farm_id").get<std::string>();
    m.days = j.at("days").get<std::vector<std::string>>();
    const auto& rows = j.at("values");
    m.values.resize(static_cast<Eigen::Index>(rows.size()), kHoursPerDay);
    for (std::size_t d = 0; d < rows.size(); ++d)
        for (int h = 0; h < kHoursPerDay; ++h)
            m.values(static_cast<Eigen::Index>(d), h) =
                rows[d][static_cast<std::size_t>(h)].get<double>();
    return m;
}

namespace {

struct SplitScan {
    // Indices sorted by speed; prefix sums let each candidate split be
    // scored in O(1).
    std::vector<std::size_t> order;
    std::vector<double> prefix_sum, prefix_sq;
};

double range_sse(const SplitScan& s, std::size_t lo, std::size_t hi) {
    const double sum = s.prefix_sum[hi] - s.prefix_sum[lo];
    const double sq = s.prefix_sq[hi] - s.prefix_sq[lo];
    const double n = static_cast<double>(hi - lo);
    return sq - sum * sum / n;
}

double range_mean(const SplitScan& s, std::size_t lo, std::size_t hi) {
    return (s.prefix_sum[hi] - s.prefix_sum[lo]) /
           static_cast<double>(hi - lo);
}

} // namespace

PowerCurveTree fit_power_curve(std::span<const double> speed,
                               std::span<const double> power, int max_depth,
                               int min_leaf_count) {
    if (speed.size() != power.size())
        throw InvalidInput("fit_power_curve: speed/power length mismatch");
    if (min_leaf_count < 1 || max_depth < 0)
        throw InvalidInput("fit_power_curve: bad hyperparameters");
    const std::size_t n = speed.size();
    if (n < 2 * static_cast<std::size_t>(min_leaf_count))
        throw InvalidInput("fit_power_curve: need at least 2*min_leaf_count "
                           "points, got " + std::to_string(n));

    SplitScan scan;
    scan.order.resize(n);
    std::iota(scan.order.begin(), scan.order.end(), std::size_t{0});
    std::sort(scan.order.begin(), scan.order.end(),
              [&](std::size_t a, std::size_t b) { return speed[a] < speed[b]; });
    scan.prefix_sum.assign(n + 1, 0.0);
    scan.prefix_sq.assign(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double y = power[scan.order[i]];
        scan.prefix_sum[i + 1] = scan.prefix_sum[i] + y;
        scan.prefix_sq[i + 1] = scan.prefix_sq[i] + y * y;
    }

    PowerCurveTree tree;
    tree.max_depth_ = max_depth;
    tree.min_leaf_ = min_leaf_count;
    tree.max_power_ = *std::max_element(power.begin(), power.end());

    const auto min_leaf = static_cast<std::size_t>(min_leaf_count);

    // Recursive builder over [lo, hi) in sorted order.
    auto build = [&](auto&& self, std::size_t lo, std::size_t hi,
                     int depth) -> int {
        const int node_id = static_cast<int>(tree.nodes_.size());
        tree.nodes_.push_back({});
        tree.nodes_[static_cast<std::size_t>(node_id)].value =
            range_mean(scan, lo, hi);

        if (depth >= max_depth || hi - lo < 2 * min_leaf) return node_id;

        const double parent_sse = range_sse(scan, lo, hi);
        double best_gain = 0.0;
        std::size_t best_mid = 0;
        for (std::size_t mid = lo + min_leaf; mid + min_leaf <= hi; ++mid) {
            // Only between distinct speeds.
            if (speed[scan.order[mid - 1]] == speed[scan.order[mid]]) continue;
            const double gain = parent_sse - range_sse(scan, lo, mid) -
                                range_sse(scan, mid, hi);
            if (gain > best_gain) {
                best_gain = gain;
                best_mid = mid;
            }
        }
        if (best_gain <= 0.0) return node_id;

        const double threshold = 0.5 * (speed[scan.order[best_mid - 1]] +
                                        speed[scan.order[best_mid]]);
        const int left = self(self, lo, best_mid, depth + 1);
        const int right = self(self, best_mid, hi, depth + 1);
        auto& node = tree.nodes_[static_cast<std::size_t>(node_id)];
        node.leaf = false;
        node.threshold = threshold;
        node.left = left;
        node.right = right;
        return node_id;
    };
    build(build, 0, n, 0);
    return tree;
}

double PowerCurveTree::predict(double speed_mps) const {
    if (nodes_.empty()) return 0.0;
    const Node* node = &nodes_[0];
    while (!node->leaf)
        node = &nodes_[static_cast<std::size_t>(
            speed_mps < node->threshold ? node->left : node->right)];
    return std::clamp(node->value, 0.0, max_power_);
}

int PowerCurveTree::leaf_count() const {
    int count = 0;
    for (const auto& n : nodes_) count += n.leaf ? 1 : 0;
    return count;
}

nlohmann::json PowerCurveTree::to_json() const {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : nodes_)
        nodes.push_back({{"leaf", n.leaf},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"value", n.value}});
    return {{"nodes", nodes},
            {"max_power", max_power_},
            {"max_depth", max_depth_},
            {"min_leaf_count", min_leaf_}};
}

PowerCurveTree PowerCurveTree::from_json(const nlohmann::json& j) {
    PowerCurveTree t;
    t.max_power_ = j.at("max_power").get<double>();
    t.max_depth_ = j.at("max_depth").get<int>();
    t.min_leaf_ = j.at("min_leaf_count").get<int>();
    for (const auto& jn : j.at("nodes")) {
        PowerCurveTree::Node n;
        n.leaf = jn.at("leaf").get<bool>();
        n.threshold = jn.at("threshold").get<double>();
        n.left = jn.at("left").get<int>();
        n.right = jn.at("right").get<int>();
        n.value = jn.at("value").get<double>();
        t.nodes_.push_back(n);
    }
    return t;
}

double predict_power(const PowerCurveTree& tree, double speed_mps) {
    return tree.predict(speed_mps);
}

} // namespace seduq::wind

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

#ifndef SEDUQ_WIND_DATA_HPP
#define SEDUQ_WIND_DATA_HPP

#include <Eigen/Dense>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace seduq::wind {

inline constexpr int kHoursPerDay = 24;

/// One raw sample of a turbine's wind speed and power output.
struct WindFieldRecord {
    std::string timestamp; // raw ISO-8601 text as read
    std::string day;       // calendar date part, YYYY-MM-DD
    int hour = 1;          // 1..24
    std::string farm_id;
    std::string turbine_id;
    double speed_mps = 0.0;
    double power_mw = 0.0;
};

/// Per-farm day-by-hour matrix of hourly means (speed in m/s or power in
/// MW). Always exactly 24 columns; rows are the complete days that
/// survived preprocessing, in ascending day order.
struct WindFieldMatrix {
    std::string farm_id;
    std::vector<std::string> days;
    Eigen::MatrixXd values; // n_days x 24

    nlohmann::json to_json() const;
    static WindFieldMatrix from_json(const nlohmann::json& j);
};

struct HourlyAverages {
    WindFieldMatrix speed;
    WindFieldMatrix power;
    std::vector<std::string> dropped_days; // days with at least one empty hour
};

/// Expected CSV header: timestamp,farm_id,turbine_id,speed_mps,power_mw.
/// Columns may appear in any order; extra columns are a SchemaError.
/// Malformed values, negative speed/power, or bad timestamps raise
/// ParseError carrying the 1-based line number.
std::vector<WindFieldRecord> ingest_csv(const std::filesystem::path& path);

std::map<std::string, std::vector<WindFieldRecord>>
group_by_farm(std::span<const WindFieldRecord> records);

/// Averages all records of one farm into day-by-hour speed and power
/// matrices. Cell (d, h) is the mean over turbines and sub-hour samples
/// in that day-hour. Days with any empty hour are dropped and reported.
/// All records must share one farm_id; zero complete days raise
/// InsufficientData.
HourlyAverages hourly_farm_average(std::span<const WindFieldRecord> records);

/// Binary regression tree for the farm power curve P = f(W). Splits are
/// greedy least-squares on speed; leaves predict the mean power of the
/// training points routed to them. Predictions are clamped to
/// [0, max training power].
class PowerCurveTree {
public:
    struct Node {
        bool leaf = true;
        double threshold = 0.0; // speed goes left if < threshold
        int left = -1, right = -1;
        double value = 0.0; // leaf mean
    };

    double predict(double speed_mps) const;
    int leaf_count() const;
    double max_power() const { return max_power_; }
    int max_depth() const { return max_depth_; }
    int min_leaf_count() const { return min_leaf_; }

    nlohmann::json to_json() const;
    static PowerCurveTree from_json(const nlohmann::json& j);

    friend PowerCurveTree fit_power_curve(std::span<const double>,
                                          std::span<const double>, int, int);

private:
    std::vector<Node> nodes_; // nodes_[0] is the root
    double max_power_ = 0.0;
    int max_depth_ = 0;
    int min_leaf_ = 0;
};

/// Fits the power curve by top-down CART with sum-of-squared-error splits.
/// Splitting stops at max_depth, min_leaf_count per side, or zero SSE
/// improvement.
PowerCurveTree fit_power_curve(std::span<const double> speed,
                               std::span<const double> power,
                               int max_depth = 6, int min_leaf_count = 5);

double predict_power(const PowerCurveTree& tree, double speed_mps);

} // namespace seduq::wind

#endif // SEDUQ_WIND_DATA_HPP

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

#ifndef SEDUQ_DISPATCH_HPP
#define SEDUQ_DISPATCH_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "seduq/kle.hpp"
#include "seduq/wind_data.hpp"

namespace seduq::dispatch {

/// Hours are 0-based column indices 0..23 throughout this module.
struct Bus {
    int id = 0;
    Eigen::VectorXd load; // 24 entries, MW
};

struct Generator {
    int bus = 0;
    double a = 0.0; // $/MW^2 h, >= 0
    double b = 0.0; // $/MWh
    double c = 0.0; // $/h
    double g_min = 0.0;
    double g_max = 0.0;
};

struct Line {
    int from = 0;
    int to = 0;
    double susceptance = 0.0;    // p.u.
    std::optional<double> limit; // MW, absent = unconstrained
};

struct DispatchCase {
    double mva_base = 100.0;
    std::vector<Bus> buses;
    std::vector<Generator> generators;
    std::vector<Line> lines;
    std::map<std::string, int> wind_buses; // farm id -> bus id

    /// Structural checks: unique bus ids, referenced buses exist, bounds
    /// ordered, connected graph, capacity covers peak load.
    void validate() const;

    nlohmann::json to_json() const;
    static DispatchCase from_json(const nlohmann::json& j);
    static DispatchCase load(const std::string& path);
};

/// Slack-referenced DC sensitivities, built once per case. Line flows in MW
/// are ptdf() * (bus injections in MW); the slack column is zero.
class Network {
public:
    explicit Network(const DispatchCase& c);

    int bus_count() const { return static_cast<int>(index_.size()); }
    int bus_index(int bus_id) const;
    const Eigen::MatrixXd& ptdf() const { return ptdf_; }
    bool has_line_limits() const { return has_limits_; }

private:
    std::map<int, int> index_;
    Eigen::MatrixXd ptdf_;
    bool has_limits_ = false;
};

struct HourSolution {
    Eigen::VectorXd g;       // MW per generator
    double lambda = 0.0;     // balance dual, $/MWh
    Eigen::VectorXd flows;   // MW per line
    double cost = 0.0;       // sum a g^2 + b g + c
    double spilled_mw = 0.0; // wind curtailed this hour
};

struct DispatchResult {
    double cost = 0.0;           // Q, $/day
    Eigen::MatrixXd setpoints;   // generators x 24
    Eigen::VectorXd lambda;      // 24
    bool optimal = false;
    int infeasible_hour = -1;    // first failing hour when not optimal
};

/// Composes speed reconstruction and the farm power curve for one latent
/// scenario; speeds are clamped at zero before the curve.
std::map<std::string, Eigen::VectorXd>
wind_injection(const std::map<std::string, wind::PowerCurveTree>& curves,
               const std::map<std::string, kle::KleBasis>& bases,
               const std::map<std::string, Eigen::VectorXd>& latent);

/// Minimum-cost balance of one hour. Without line limits this is a lambda
/// iteration (bisection on the balance dual); with limits, a dual
/// active-set QP over the DC flow polytope. With allow_curtailment the
/// wind at each bus becomes a free variable in [0, available]; otherwise
/// wind is a fixed injection and surplus hours are infeasible.
HourSolution solve_hour(const DispatchCase& c, const Network& net, int hour,
                        const Eigen::VectorXd& wind_bus_mw,
                        bool allow_curtailment = false);

/// 24 independent hourly solves; wind is per-farm 24-hour MW vectors routed
/// through wind_buses. Infeasible hours yield optimal=false instead of
/// throwing.
DispatchResult solve_day(const DispatchCase& c, const Network& net,
                         const std::map<std::string, Eigen::VectorXd>& wind,
                         bool allow_curtailment = false);

/// The canonical cost of a daily schedule: sum of a g^2 + b g + c over all
/// generators and hours.
double day_cost(const DispatchCase& c, const Eigen::MatrixXd& setpoints);

} // namespace seduq::dispatch

#endif // SEDUQ_DISPATCH_HPP

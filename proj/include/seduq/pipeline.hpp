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

#ifndef SEDUQ_PIPELINE_HPP
#define SEDUQ_PIPELINE_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "seduq/dispatch.hpp"
#include "seduq/gpe.hpp"
#include "seduq/kle.hpp"
#include "seduq/latent_stats.hpp"
#include "seduq/sampling.hpp"
#include "seduq/wind_data.hpp"

namespace seduq::pipeline {

struct PipelineConfig {
    double variance_target = 0.95;
    int train_size = 100;
    int mc_size = 8000;
    gpe::MeanBasis basis = gpe::MeanBasis::PureQuadratic;
    gpe::KernelKind kernel = gpe::KernelKind::SquaredExponential;
    double dependency_threshold = 0.5;
    std::uint64_t seed = 1;
    bool curtailment = false;
    bool with_mc = true;
    std::vector<int> trace_sizes; // empty = no convergence trace
    int reference_pool = 10000;   // draws behind the design marginals
    // Debug switch: route "surrogate" evaluations through the dispatch
    // solver itself, so surrogate statistics must match the Monte Carlo
    // reference exactly on the common scenario set.
    bool surrogate_passthrough = false;
};

/// Summary statistics of a cost sample; the interval is the empirical
/// 2.5 and 97.5 percent quantiles, not a normal approximation.
struct StatBlock {
    double mean = 0.0;
    double stddev = 0.0;
    double ci_lower = 0.0;
    double ci_upper = 0.0;
    int count = 0;

    nlohmann::json to_json() const;
};

StatBlock stat_block(const std::vector<double>& values);

/// |a - b| / |b|; the reference b must be nonzero.
double relative_difference(double a, double b);

/// Everything the data stages produce, reusable across surrogate fits of
/// different sizes. Farm-keyed maps all share the same key set.
struct Prepared {
    dispatch::DispatchCase grid;
    std::map<std::string, Eigen::MatrixXd> speed_days; // aligned day rows
    std::map<std::string, Eigen::MatrixXd> power_days;
    std::vector<std::string> common_days;
    int dropped_days = 0; // incomplete farm-days removed before alignment
    std::map<std::string, wind::PowerCurveTree> curves;
    std::map<std::string, kle::KleBasis> bases;
    std::map<std::string, Eigen::MatrixXd> scores; // days x modes
    std::map<std::string, latent::KdeModel> kdes;
    std::vector<latent::DependencyLink> links;
    Eigen::MatrixXd scenario_x;        // mc_size x total modes, design layout
    std::vector<std::string> farm_of;  // column -> farm
    std::vector<int> mode_of;          // column -> mode within its farm
    std::vector<double> mc_costs;      // per scenario; NaN marks infeasible
    int mc_infeasible = 0;

    int total_modes() const { return static_cast<int>(farm_of.size()); }
    std::map<std::string, Eigen::VectorXd> latent_of_row(
        const Eigen::MatrixXd& x, Eigen::Index row) const;
};

/// One surrogate fit on a fresh design plus its scenario predictions.
/// The model is always present after fit_design returns.
struct FitResult {
    Eigen::MatrixXd train_x;
    Eigen::VectorXd train_y;
    std::optional<gpe::GpeModel> model;
    std::vector<double> gp_costs; // per scenario, same order as mc_costs
    int retries = 0;              // infeasible design points redrawn
};

struct UqReport {
    StatBlock surrogate;
    std::optional<StatBlock> mc;
    std::optional<double> d_r;
    StatBlock replication_data;
    StatBlock replication_gp;
    double replication_rel_diff = 0.0;
    long solver_calls = 0;
    long surrogate_evals = 0;
    int train_retries = 0;
    int mc_infeasible = 0;
    std::vector<std::pair<int, double>> trace; // (design size, d_r)
    nlohmann::json config_echo;
    nlohmann::json farms; // per-farm order, captured fraction, day count
    nlohmann::json links;

    /// Deliberately excludes wall-clock timings so repeated runs with the
    /// same seed serialize byte for byte.
    nlohmann::json to_json() const;
};

/// Wall-clock milliseconds per stage, serialized separately from the
/// report so the report stays reproducible.
struct RunTiming {
    std::vector<std::pair<std::string, double>> stage_ms;
    nlohmann::json to_json() const;
};

struct PipelineArtifacts {
    Prepared prepared;
    std::optional<gpe::GpeModel> emulator;
    std::vector<double> scenario_costs_gp; // surrogate cost per scenario
    UqReport report;
    RunTiming timing;
};

/// Data stages: ingest, day alignment, power curves, dimension reduction,
/// latent density fits, dependency links, the common scenario set, and
/// (when configured) its Monte Carlo reference costs.
Prepared prepare(const PipelineConfig& cfg,
                 const std::vector<std::string>& wind_csvs,
                 const std::string& case_path, long& solver_calls,
                 RunTiming* timing = nullptr);

/// Design, training solves, surrogate fit, scenario predictions for one
/// design size. Infeasible design points are redrawn once; more than 10%
/// of the design failing aborts the fit.
FitResult fit_design(const PipelineConfig& cfg, const Prepared& prep,
                     int design_size, long& solver_calls,
                     long& surrogate_evals);

/// Re-runs the observed days through both routes: the dispatch solver on
/// recorded power, and the surrogate at each day's projected coordinates.
void replicate_empirical(const PipelineConfig& cfg, const Prepared& prep,
                         const gpe::GpeModel& model, UqReport& report,
                         long& solver_calls, long& surrogate_evals);

/// d_r per design size against the one Monte Carlo reference already in
/// prep. Sizes must be ascending; each size gets a fresh design (strata
/// differ per n, so nested prefixes are not valid designs).
std::vector<std::pair<int, double>>
convergence_trace(const PipelineConfig& cfg, const Prepared& prep,
                  const std::vector<int>& sizes, long& solver_calls,
                  long& surrogate_evals);

/// Full study: prepare, fit, propagate, replicate, optional convergence
/// trace. Errors in any stage carry a "[stage]" prefix and keep their
/// original type.
PipelineArtifacts run(const PipelineConfig& cfg,
                      const std::vector<std::string>& wind_csvs,
                      const std::string& case_path);

} // namespace seduq::pipeline

#endif // SEDUQ_PIPELINE_HPP

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

#ifndef SEDUQ_LATENT_STATS_HPP
#define SEDUQ_LATENT_STATS_HPP

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "seduq/rng.hpp"

namespace seduq::latent {

/// Gaussian product-kernel density estimate of one farm's latent scores.
struct KdeModel {
    std::string farm_id;
    Eigen::MatrixXd samples;   // n x d training scores
    Eigen::VectorXd bandwidth; // d, all > 0

    int dim() const { return static_cast<int>(samples.cols()); }
    int count() const { return static_cast<int>(samples.rows()); }

    nlohmann::json to_json() const;
    static KdeModel from_json(const nlohmann::json& j);
};

/// h_j = sd_j * (4 / ((d+2) n))^(1/(d+4)), sd unbiased.
Eigen::VectorXd silverman_bandwidth(const Eigen::MatrixXd& samples);

KdeModel kde_fit(const Eigen::MatrixXd& samples);
KdeModel kde_fit(const std::string& farm_id, const Eigen::MatrixXd& samples);

double kde_pdf(const KdeModel& model, const Eigen::VectorXd& x);

/// Smoothed bootstrap: uniform training row plus bandwidth-scaled normal
/// noise per coordinate. Exact sampler for the KDE mixture.
Eigen::MatrixXd kde_sample(const KdeModel& model, int count, RngStream& rng);

/// Sample distance correlation in [0, 1]; 0 when either argument has zero
/// distance variance. Bitwise-identical non-constant inputs return exactly 1.
double distance_correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// One directed linear dependence between latent coordinates of two farms.
/// target = intercept + slope * source + Normal(0, residual_var).
struct DependencyLink {
    std::string source_farm;
    int source_mode = -1;
    std::string target_farm;
    int target_mode = -1;
    double intercept = 0.0;
    double slope = 0.0;
    double residual_var = 0.0; // SSE / n, the regression's mean squared error
    double dcor = 0.0;         // score that selected the link, 0 if unset

    nlohmann::json to_json() const;
    static DependencyLink from_json(const nlohmann::json& j);
};

/// OLS of target on source; endpoint fields are left for the caller.
DependencyLink fit_dependency(const Eigen::VectorXd& xi_source,
                              const Eigen::VectorXd& xi_target);

/// Scans all cross-farm coordinate pairs and links those with distance
/// correlation above threshold, strongest first, one parent per target.
/// Links always point from the lexicographically earlier farm, so the
/// result is acyclic. scores[i] holds farm_ids[i]'s n x p_i score matrix;
/// all farms must share n rows (same observation days).
std::vector<DependencyLink>
select_links(const std::vector<std::string>& farm_ids,
             const std::vector<Eigen::MatrixXd>& scores, double threshold);

/// Independent KDE draws per farm, then each link's target coordinate is
/// overwritten by its conditional draw, in topological order.
std::map<std::string, Eigen::MatrixXd>
sample_joint(const std::map<std::string, KdeModel>& models,
             const std::vector<DependencyLink>& links, int count,
             RngStream& rng);

} // namespace seduq::latent

#endif // SEDUQ_LATENT_STATS_HPP

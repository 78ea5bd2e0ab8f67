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

#ifndef SEDUQ_KLE_HPP
#define SEDUQ_KLE_HPP

#include <string>

#include <Eigen/Dense>
#include <json.hpp>

namespace seduq::kle {

/// Truncated Karhunen-Loeve basis of one farm's daily wind-speed profiles.
/// modes columns are unit eigenvectors of the empirical hour-by-hour
/// covariance, eigenvalues are the matching variances in descending order.
struct KleBasis {
    std::string farm_id;
    Eigen::VectorXd mean;        // length 24
    Eigen::VectorXd eigenvalues; // length p, descending, all > 0
    Eigen::MatrixXd modes;       // 24 x p, orthonormal columns
    double total_variance = 0.0; // trace of the full covariance
    double variance_target = 0.95;

    int order() const { return static_cast<int>(eigenvalues.size()); }

    /// Fraction of total variance carried by the retained modes.
    double captured_fraction() const;

    /// xi_i = u_i^T (x - mean) / sqrt(lambda_i) for one day profile.
    Eigen::VectorXd project(const Eigen::VectorXd& profile) const;

    /// Row-wise projection of an n_days x 24 matrix into n_days x p scores.
    Eigen::MatrixXd project_days(const Eigen::MatrixXd& days) const;

    /// mean + sum_i sqrt(lambda_i) xi_i u_i.
    Eigen::VectorXd reconstruct(const Eigen::VectorXd& xi) const;

    nlohmann::json to_json() const;
    static KleBasis from_json(const nlohmann::json& j);
};

/// Fits the basis on an n_days x 24 matrix of daily profiles. Keeps the
/// smallest leading set of modes whose variance share reaches
/// variance_target; eigenvalues below 1e-12 times the largest are treated
/// as zero and never retained. Throws DegenerateField when no variance
/// remains at all.
KleBasis fit_kle(const std::string& farm_id, const Eigen::MatrixXd& days,
                 double variance_target = 0.95);

} // namespace seduq::kle

#endif // SEDUQ_KLE_HPP

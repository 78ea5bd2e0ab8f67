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

#include "seduq/kle.hpp"

#include <cmath>

#include "seduq/common.hpp"
#include "seduq/json_util.hpp"
#include "seduq/numerics.hpp"
#include "seduq/wind_data.hpp"

namespace seduq::kle {

double KleBasis::captured_fraction() const {
    if (total_variance <= 0.0) return 0.0;
    return eigenvalues.sum() / total_variance;
}

Eigen::VectorXd KleBasis::project(const Eigen::VectorXd& profile) const {
    if (profile.size() != mean.size())
        throw InvalidInput("KleBasis::project: profile length mismatch");
    Eigen::VectorXd scores = modes.transpose() * (profile - mean);
    for (int i = 0; i < order(); ++i)
        scores[i] /= std::sqrt(eigenvalues[i]);
    return scores;
}

Eigen::MatrixXd KleBasis::project_days(const Eigen::MatrixXd& days) const {
    if (days.cols() != mean.size())
        throw InvalidInput("KleBasis::project_days: profile length mismatch");
    Eigen::MatrixXd scores =
        (days.rowwise() - mean.transpose()) * modes;
    for (int i = 0; i < order(); ++i)
        scores.col(i) /= std::sqrt(eigenvalues[i]);
    return scores;
}

Eigen::VectorXd KleBasis::reconstruct(const Eigen::VectorXd& xi) const {
    if (xi.size() != order())
        throw InvalidInput("KleBasis::reconstruct: score length mismatch");
    Eigen::VectorXd x = mean;
    for (int i = 0; i < order(); ++i)
        x += std::sqrt(eigenvalues[i]) * xi[i] * modes.col(i);
    return x;
}

nlohmann::json KleBasis::to_json() const {
    nlohmann::json j;
    j["farm_id"] = farm_id;
    j["mean"] = seduq::to_json(mean);
    j["eigenvalues"] = seduq::to_json(eigenvalues);
    j["modes"] = seduq::to_json(modes);
    j["total_variance"] = total_variance;
    j["variance_target"] = variance_target;
    return j;
}

KleBasis KleBasis::from_json(const nlohmann::json& j) {
    KleBasis b;
    b.farm_id = require_key(j, "farm_id", "KleBasis").get<std::string>();
    b.mean = vector_from_json(require_key(j, "mean", "KleBasis"), "KleBasis.mean");
    b.eigenvalues = vector_from_json(require_key(j, "eigenvalues", "KleBasis"),
                                     "KleBasis.eigenvalues");
    b.modes = matrix_from_json(require_key(j, "modes", "KleBasis"), "KleBasis.modes");
    b.total_variance = require_key(j, "total_variance", "KleBasis").get<double>();
    b.variance_target = require_key(j, "variance_target", "KleBasis").get<double>();
    if (b.modes.rows() != b.mean.size() || b.modes.cols() != b.eigenvalues.size())
        throw SchemaError("KleBasis: inconsistent dimensions");
    return b;
}

KleBasis fit_kle(const std::string& farm_id, const Eigen::MatrixXd& days,
                 double variance_target) {
    const Eigen::Index n = days.rows();
    const Eigen::Index dim = days.cols();
    if (dim != wind::kHoursPerDay)
        throw InvalidInput("fit_kle: expected 24 columns of hourly values");
    if (n < 2)
        throw InsufficientData("fit_kle: need at least 2 days, got " +
                               std::to_string(n));
    if (!(variance_target > 0.0 && variance_target <= 1.0))
        throw InvalidInput("fit_kle: variance target must be in (0, 1]");
    if (!days.allFinite())
        throw InvalidInput("fit_kle: non-finite profile values");

    Eigen::VectorXd mean = days.colwise().mean();
    Eigen::MatrixXd centered = days.rowwise() - mean.transpose();
    Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(n - 1);

    numerics::EigenDecomp eig = numerics::sym_eigen(numerics::SymMatrix(cov));

    // Negative tails are covariance roundoff, not signal.
    Eigen::VectorXd lambda = eig.eigenvalues.cwiseMax(0.0);
    double lambda_max = lambda[0];
    double total = lambda.sum();
    if (!(lambda_max > 0.0) || !(total > 0.0))
        throw DegenerateField("fit_kle: field '" + farm_id +
                              "' has no day-to-day variance");

    const double floor = 1e-12 * lambda_max;
    int usable = 0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i)
        if (lambda[i] > floor) ++usable;

    int p = 0;
    double captured = 0.0;
    while (p < usable && captured < variance_target * total) {
        captured += lambda[p];
        ++p;
    }
    // Target unreachable with usable modes: keep them all.
    if (p == 0) p = 1;

    KleBasis basis;
    basis.farm_id = farm_id;
    basis.mean = std::move(mean);
    basis.eigenvalues = lambda.head(p);
    basis.modes = eig.eigenvectors.leftCols(p);
    basis.total_variance = total;
    basis.variance_target = variance_target;
    return basis;
}

} // namespace seduq::kle

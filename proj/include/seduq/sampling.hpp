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

#ifndef SEDUQ_SAMPLING_HPP
#define SEDUQ_SAMPLING_HPP

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "seduq/latent_stats.hpp"
#include "seduq/rng.hpp"

namespace seduq::sampling {

/// n x d design in [0,1)^d with exactly one point per stratum
/// [k/n, (k+1)/n) in every dimension.
Eigen::MatrixXd lhs(int n, int d, RngStream& rng);

/// Elementwise application of a nondecreasing inverse CDF.
Eigen::VectorXd
transform_to_marginal(const Eigen::VectorXd& column,
                      const std::function<double(double)>& inverse_cdf);

/// Piecewise-linear inverse of the empirical CDF of pool, matching the
/// order-statistic convention of empirical_moments quantiles.
class EmpiricalInverseCdf {
public:
    explicit EmpiricalInverseCdf(const Eigen::VectorXd& pool);
    double operator()(double u) const;

private:
    std::vector<double> sorted_;
};

/// LHS design over all farms' latent coordinates, mapped through empirical
/// inverse CDFs of a reference pool drawn from sample_joint (so the design
/// covers the dependent latent distribution). Columns are ordered farm by
/// farm (map order), modes ascending. Returns the design plus the column
/// layout.
struct LatentDesign {
    Eigen::MatrixXd x;                  // n x p_total
    std::vector<std::string> farm_of;   // per column
    std::vector<int> mode_of;           // per column
};

LatentDesign
lhs_latent_design(const std::map<std::string, latent::KdeModel>& models,
                  const std::vector<latent::DependencyLink>& links, int n,
                  RngStream& rng, int reference_pool = 10000);

/// Splits an n x p_total matrix laid out like LatentDesign columns back
/// into per-farm blocks.
std::map<std::string, Eigen::MatrixXd>
split_by_farm(const Eigen::MatrixXd& x, const std::vector<std::string>& farm_of,
              const std::vector<int>& mode_of);

} // namespace seduq::sampling

#endif // SEDUQ_SAMPLING_HPP

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

#include "seduq/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "seduq/common.hpp"

namespace seduq::sampling {

Eigen::MatrixXd lhs(int n, int d, RngStream& rng) {
    if (n < 1 || d < 1) throw InvalidInput("lhs: need n >= 1 and d >= 1");
    Eigen::MatrixXd x(n, d);
    std::vector<int> perm(n);
    for (int j = 0; j < d; ++j) {
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = n - 1; i > 0; --i) {
            int k = static_cast<int>(rng.index(static_cast<std::uint64_t>(i) + 1));
            std::swap(perm[i], perm[k]);
        }
        for (int i = 0; i < n; ++i) {
            int stratum = perm[i];
            double lo = static_cast<double>(stratum) / n;
            double hi = static_cast<double>(stratum + 1) / n;
            double v = (stratum + rng.uniform()) / n;
            // (k+u)/n can round onto the next stratum's edge; pin it back.
            if (v >= hi) v = std::nextafter(hi, lo);
            if (v < lo) v = lo;
            x(i, j) = v;
        }
    }
    return x;
}

Eigen::VectorXd
transform_to_marginal(const Eigen::VectorXd& column,
                      const std::function<double(double)>& inverse_cdf) {
    Eigen::VectorXd out(column.size());
    for (Eigen::Index i = 0; i < column.size(); ++i)
        out[i] = inverse_cdf(column[i]);
    return out;
}

EmpiricalInverseCdf::EmpiricalInverseCdf(const Eigen::VectorXd& pool) {
    if (pool.size() < 1)
        throw InsufficientData("EmpiricalInverseCdf: empty pool");
    sorted_.assign(pool.data(), pool.data() + pool.size());
    std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalInverseCdf::operator()(double u) const {
    if (u < 0.0) u = 0.0;
    if (u > 1.0) u = 1.0;
    const std::size_t m = sorted_.size();
    if (m == 1) return sorted_[0];
    double h = u * static_cast<double>(m - 1);
    std::size_t i = static_cast<std::size_t>(h);
    if (i >= m - 1) return sorted_[m - 1];
    return sorted_[i] + (h - static_cast<double>(i)) * (sorted_[i + 1] - sorted_[i]);
}

LatentDesign
lhs_latent_design(const std::map<std::string, latent::KdeModel>& models,
                  const std::vector<latent::DependencyLink>& links, int n,
                  RngStream& rng, int reference_pool) {
    if (n < 2) throw InvalidInput("lhs_latent_design: need n >= 2");
    if (reference_pool < 2)
        throw InvalidInput("lhs_latent_design: reference pool too small");
    if (models.empty()) throw InvalidInput("lhs_latent_design: no farms");

    LatentDesign design;
    for (const auto& [farm, model] : models)
        for (int m = 0; m < model.dim(); ++m) {
            design.farm_of.push_back(farm);
            design.mode_of.push_back(m);
        }
    const int p_total = static_cast<int>(design.farm_of.size());

    std::map<std::string, Eigen::MatrixXd> pool =
        latent::sample_joint(models, links, reference_pool, rng);

    Eigen::MatrixXd unit = lhs(n, p_total, rng);
    design.x.resize(n, p_total);
    for (int c = 0; c < p_total; ++c) {
        EmpiricalInverseCdf inv(pool.at(design.farm_of[c]).col(design.mode_of[c]));
        design.x.col(c) = transform_to_marginal(unit.col(c), std::cref(inv));
    }
    return design;
}

std::map<std::string, Eigen::MatrixXd>
split_by_farm(const Eigen::MatrixXd& x, const std::vector<std::string>& farm_of,
              const std::vector<int>& mode_of) {
    if (static_cast<std::size_t>(x.cols()) != farm_of.size() ||
        farm_of.size() != mode_of.size())
        throw InvalidInput("split_by_farm: layout mismatch");
    std::map<std::string, int> width;
    for (std::size_t c = 0; c < farm_of.size(); ++c)
        width[farm_of[c]] = std::max(width[farm_of[c]], mode_of[c] + 1);
    std::map<std::string, Eigen::MatrixXd> out;
    for (const auto& [farm, w] : width)
        out[farm] = Eigen::MatrixXd::Zero(x.rows(), w);
    for (std::size_t c = 0; c < farm_of.size(); ++c)
        out[farm_of[c]].col(mode_of[c]) = x.col(static_cast<Eigen::Index>(c));
    return out;
}

} // namespace seduq::sampling

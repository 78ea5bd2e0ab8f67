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

#ifndef SEDUQ_GPE_HPP
#define SEDUQ_GPE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "seduq/numerics.hpp"
#include "seduq/optim.hpp"

namespace seduq::gpe {

enum class MeanBasis { Constant, Linear, PureQuadratic };

int basis_width(MeanBasis basis, int p);
std::string basis_name(MeanBasis basis);
MeanBasis parse_basis(const std::string& name);

/// Rows: constant -> (1); linear -> (1, x); pure-quadratic -> (1, x, x^2).
Eigen::MatrixXd design_matrix(const Eigen::MatrixXd& x, MeanBasis basis);

enum class KernelKind { SquaredExponential, Exponential, RationalQuadratic, Matern32 };

std::string kernel_name(KernelKind kind);
KernelKind parse_kernel(const std::string& name);

/// Stationary kernel on per-coordinate distances r_k = |x_ik - x_jk|:
///   SE   tau2 * exp(-sum r^2 / (2 l^2))
///   E    tau2 * exp(-sum r / l)
///   RQ   tau2 * (1 + sum r^2/(2 alpha l^2))^(-alpha)
///   M32  tau2 * (1 + s) exp(-s),  s = sum sqrt(3) r / l
/// All give k(x, x) = tau2.
struct KernelSpec {
    KernelKind kind = KernelKind::SquaredExponential;
    double tau2 = 1.0;
    Eigen::VectorXd length; // per input dimension, > 0
    double alpha = 1.0;     // RQ shape only

    nlohmann::json to_json() const;
    static KernelSpec from_json(const nlohmann::json& j);
};

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& xi,
                   const Eigen::VectorXd& xj);

/// Pairwise kernel matrix k(A_i, B_j); validates the spec once.
Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b);

struct GpeHyperparams {
    Eigen::VectorXd beta;
    KernelSpec kernel;
    double sigma2 = 0.0; // nugget, floored at 1e-10 * var(Y) during fits
};

/// log N(Y | H beta, K + sigma2 I) via Cholesky of the covariance.
double log_marginal_likelihood(const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& y, MeanBasis basis,
                               const KernelSpec& kernel, double sigma2,
                               const Eigen::VectorXd& beta);

/// Generalized least squares (H' K^-1 H)^-1 H' K^-1 Y through whitened QR.
Eigen::VectorXd beta_wls(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         MeanBasis basis, const KernelSpec& kernel,
                         double sigma2);

/// Marginal likelihood with beta at its closed-form optimum.
double profile_log_likelihood(const Eigen::MatrixXd& x,
                              const Eigen::VectorXd& y, MeanBasis basis,
                              const KernelSpec& kernel, double sigma2);

struct GpeOptions {
    int restarts = 5;
    std::uint64_t seed = 1;
    optim::BfgsOptions bfgs{};
};

struct GpePrediction {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    int clamped = 0; // negative posterior variances clamped to 0
};

class GpeModel {
public:
    /// Maximizes the beta-profile likelihood over log(theta, sigma2) with
    /// multi-start BFGS. Duplicate design rows are merged (Y averaged)
    /// before fitting.
    static GpeModel fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        MeanBasis basis, KernelKind kernel,
                        const GpeOptions& options = {});

    /// Skips optimization and factorizes at the given hyperparameters.
    static GpeModel with_hyperparams(const Eigen::MatrixXd& x,
                                     const Eigen::VectorXd& y, MeanBasis basis,
                                     const GpeHyperparams& hp);

    /// Posterior mean and covariance at Xstar. The covariance carries the
    /// nugget on its diagonal unless noise_free is set.
    GpePrediction predict(const Eigen::MatrixXd& xstar,
                          bool noise_free = false) const;

    /// Mean only; avoids the m x m covariance for large scenario batches.
    Eigen::VectorXd predict_mean(const Eigen::MatrixXd& xstar) const;

    const Eigen::MatrixXd& train_x() const { return x_; }
    const Eigen::VectorXd& train_y() const { return y_; }
    MeanBasis basis() const { return basis_; }
    const GpeHyperparams& hyperparams() const { return hp_; }
    double log_likelihood() const { return lml_; }
    /// Profile likelihood at each optimizer start, for sanity checks.
    const std::vector<double>& start_likelihoods() const { return start_lml_; }

    nlohmann::json to_json() const;
    static GpeModel from_json(const nlohmann::json& j);

private:
    GpeModel() = default;
    void factorize();

    Eigen::MatrixXd x_;
    Eigen::VectorXd y_;
    MeanBasis basis_ = MeanBasis::Constant;
    GpeHyperparams hp_;
    numerics::CholFactor chol_;
    Eigen::VectorXd resid_weights_; // K11^-1 (Y - H beta)
    double lml_ = 0.0;
    std::vector<double> start_lml_;
};

} // namespace seduq::gpe

#endif // SEDUQ_GPE_HPP

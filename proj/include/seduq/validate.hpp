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

#ifndef SEDUQ_VALIDATE_HPP
#define SEDUQ_VALIDATE_HPP

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "seduq/dispatch.hpp"
#include "seduq/gpe.hpp"
#include "seduq/qp.hpp"

namespace seduq::validate {

/// Outcome of one oracle suite. The name is "<module>/<check>" so a
/// failure message identifies the module under suspicion.
struct CheckResult {
    std::string name;
    bool pass = false;
    double metric = 0.0;    // worst observed error
    double threshold = 0.0; // metric must stay at or below this
    std::string detail;
};

/// Posterior mean and covariance computed the slow way: assemble the
/// joint covariance over train and test points entry by entry, then
/// condition with explicit matrix inverses. Deliberately shares no code
/// with the emulator's solve path.
struct GpOracle {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};
GpOracle gp_conditioning_oracle(const Eigen::MatrixXd& x,
                                const Eigen::VectorXd& y,
                                gpe::MeanBasis basis,
                                const gpe::KernelSpec& kernel, double sigma2,
                                const Eigen::MatrixXd& xstar, bool noise_free);

/// Largest violation across stationarity, primal feasibility, dual sign,
/// and complementary slackness for a solved QP.
double max_kkt_residual(const Eigen::MatrixXd& g, const Eigen::VectorXd& g0,
                        const Eigen::MatrixXd& ce, const Eigen::VectorXd& ce0,
                        const Eigen::MatrixXd& ci, const Eigen::VectorXd& ci0,
                        const qp::QpResult& res);

/// Independent QP solver by enumeration of active sets of size <= nv.
/// Exponential in the constraint count; intended for small oracle
/// problems only. Returns feasibility like qp::solve.
qp::QpResult qp_enum_solve(const Eigen::MatrixXd& g, const Eigen::VectorXd& g0,
                           const Eigen::MatrixXd& ce,
                           const Eigen::VectorXd& ce0,
                           const Eigen::MatrixXd& ci,
                           const Eigen::VectorXd& ci0);

/// Exhaustive search over generator setpoints at fixed step (MW) for a
/// case with two or three generators; respects bounds, balance, and line
/// limits. Returns the best cost found and fills g_best.
double dispatch_grid_oracle(const dispatch::DispatchCase& c,
                            const dispatch::Network& net, int hour,
                            const Eigen::VectorXd& wind_bus_mw, double step,
                            Eigen::VectorXd* g_best = nullptr);

/// Three-bus case where the 1-3 line limit binds: load 150 MW at bus 3,
/// both generators remote, symmetric susceptances. The unconstrained
/// optimum puts 120 MW at bus 1, overloading the direct line.
dispatch::DispatchCase congested_three_bus();

/// One-sample Kolmogorov-Smirnov statistic against a CDF callable.
double ks_statistic(std::vector<double> sample,
                    const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

CheckResult gp_conditioning_check(int instances, std::uint64_t seed,
                                  bool fault = false);
CheckResult qp_kkt_check(int instances, std::uint64_t seed,
                         bool fault = false);
CheckResult dispatch_analytic_check(bool fault = false);
CheckResult dispatch_grid_check(bool fault = false);
CheckResult kde_quadrature_check(std::uint64_t seed, bool fault = false);

/// All suites in order. fault_module is a test hook: naming a module
/// ("gpe", "qp", "dispatch", "kde") plants a small documented
/// perturbation in that module's check inputs, proving the oracle
/// actually detects deviations. Empty string runs everything clean.
std::vector<CheckResult> run_all(std::uint64_t seed,
                                 const std::string& fault_module = "");

} // namespace seduq::validate

#endif // SEDUQ_VALIDATE_HPP

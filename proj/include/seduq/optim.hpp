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

#ifndef SEDUQ_OPTIM_HPP
#define SEDUQ_OPTIM_HPP

#include <functional>

#include <Eigen/Dense>

namespace seduq::optim {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct BfgsOptions {
    int max_iter = 200;
    double grad_tol = 1e-6;   // stop on ||grad||_inf below this
    double f_tol = 1e-12;     // or on relative objective stall
    double fd_step = 1e-5;    // central-difference step, scaled per coordinate
    // Search directions are clipped to this infinity norm. A huge gradient
    // at a bad start otherwise lets one accepted step jump across basins.
    double max_step = 20.0;
};

struct OptimResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Central finite differences; non-finite objective values poison the
/// corresponding component with 0 so the caller's line search backs off.
Eigen::VectorXd fd_gradient(const Objective& f, const Eigen::VectorXd& x,
                            double step);

/// BFGS with backtracking Armijo line search. Minimizes f from x0; returns
/// the best point seen even when not converged. A non-finite f(x0) returns
/// immediately with converged=false.
OptimResult minimize_bfgs(const Objective& f, const Eigen::VectorXd& x0,
                          const BfgsOptions& options = {});

} // namespace seduq::optim

#endif // SEDUQ_OPTIM_HPP

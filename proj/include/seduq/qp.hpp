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

#ifndef SEDUQ_QP_HPP
#define SEDUQ_QP_HPP

#include <Eigen/Dense>

namespace seduq::qp {

/// Solution of min 0.5 x'Gx + g0'x  s.t.  CE'x + ce0 = 0, CI'x + ci0 >= 0.
/// Duals satisfy Gx + g0 = CE eq_duals + CI ineq_duals with ineq_duals >= 0
/// and complementary slackness (zero on inactive rows).
struct QpResult {
    Eigen::VectorXd x;
    double value = 0.0;
    bool feasible = false;
    Eigen::VectorXd eq_duals;
    Eigen::VectorXd ineq_duals;
};

/// Dual active-set method of Goldfarb and Idnani. G must be symmetric
/// positive definite (the dual start point is the unconstrained minimum).
/// Constraints are columns of CE (ce0.size() of them) and CI.
QpResult solve(const Eigen::MatrixXd& g, const Eigen::VectorXd& g0,
               const Eigen::MatrixXd& ce, const Eigen::VectorXd& ce0,
               const Eigen::MatrixXd& ci, const Eigen::VectorXd& ci0);

} // namespace seduq::qp

#endif // SEDUQ_QP_HPP

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

#include "seduq/optim.hpp"

#include <cmath>

namespace seduq::optim {

Eigen::VectorXd fd_gradient(const Objective& f, const Eigen::VectorXd& x,
                            double step) {
    const Eigen::Index k = x.size();
    Eigen::VectorXd g(k);
    Eigen::VectorXd xp = x;
    for (Eigen::Index i = 0; i < k; ++i) {
        double h = step * std::max(1.0, std::abs(x[i]));
        xp[i] = x[i] + h;
        double fp = f(xp);
        xp[i] = x[i] - h;
        double fm = f(xp);
        xp[i] = x[i];
        double gi = (fp - fm) / (2.0 * h);
        g[i] = std::isfinite(gi) ? gi : 0.0;
    }
    return g;
}

OptimResult minimize_bfgs(const Objective& f, const Eigen::VectorXd& x0,
                          const BfgsOptions& options) {
    OptimResult res;
    res.x = x0;
    res.value = f(x0);
    if (!std::isfinite(res.value)) {
        res.value = std::numeric_limits<double>::infinity();
        return res;
    }

    const Eigen::Index k = x0.size();
    Eigen::VectorXd x = x0;
    double fx = res.value;
    Eigen::VectorXd g = fd_gradient(f, x, options.fd_step);
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(k, k);

    for (int iter = 0; iter < options.max_iter; ++iter) {
        res.iterations = iter;
        if (g.lpNorm<Eigen::Infinity>() <= options.grad_tol) {
            res.converged = true;
            break;
        }

        auto clipped = [&](Eigen::VectorXd v) {
            double m = v.lpNorm<Eigen::Infinity>();
            if (m > options.max_step) v *= options.max_step / m;
            return v;
        };
        Eigen::VectorXd dir = clipped(-(H * g));
        double slope = g.dot(dir);
        if (!(slope < 0.0)) { // curvature estimate went stale
            H.setIdentity();
            dir = clipped(-g);
            slope = g.dot(dir);
            if (!(slope < 0.0)) break;
        }

        double t = 1.0;
        double fnew = std::numeric_limits<double>::infinity();
        Eigen::VectorXd xnew;
        bool accepted = false;
        for (int ls = 0; ls < 50; ++ls) {
            xnew = x + t * dir;
            fnew = f(xnew);
            if (std::isfinite(fnew) && fnew <= fx + 1e-4 * t * slope) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;

        Eigen::VectorXd gnew = fd_gradient(f, xnew, options.fd_step);
        Eigen::VectorXd s = xnew - x;
        Eigen::VectorXd y = gnew - g;
        double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            double rho = 1.0 / sy;
            Eigen::MatrixXd I = Eigen::MatrixXd::Identity(k, k);
            H = (I - rho * s * y.transpose()) * H *
                    (I - rho * y * s.transpose()) +
                rho * s * s.transpose();
        }

        double drop = fx - fnew;
        x = xnew;
        g = gnew;
        fx = fnew;
        if (fx < res.value) {
            res.value = fx;
            res.x = x;
        }
        if (drop <= options.f_tol * (std::abs(fx) + options.f_tol)) {
            res.converged = true;
            res.iterations = iter + 1;
            break;
        }
    }
    return res;
}

} // namespace seduq::optim

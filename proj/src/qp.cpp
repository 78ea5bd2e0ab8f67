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

// Goldfarb, Idnani: "A numerically stable dual method for solving strictly
// convex quadratic programs", Math. Programming 27 (1983). The working-set
// bookkeeping follows the classic QuadProg++ layout: J = L^-T maintained
// under Givens rotations, R the triangular factor of the active normals.

#include "seduq/qp.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "seduq/common.hpp"

namespace seduq::qp {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kInf = std::numeric_limits<double>::infinity();

double hypot2(double a, double b) { return std::hypot(a, b); }

/// Rotates d into the first iq rows, updating J; appends column iq of R.
/// Returns false when the new normal is linearly dependent on the set.
bool add_constraint(Eigen::MatrixXd& r, Eigen::MatrixXd& j, Eigen::VectorXd& d,
                    int& iq, double& r_norm) {
    const int n = static_cast<int>(d.size());
    for (int k = n - 1; k >= iq + 1; --k) {
        double cc = d[k - 1];
        double ss = d[k];
        double h = hypot2(cc, ss);
        if (h < kEps) continue;
        d[k] = 0.0;
        ss /= h;
        cc /= h;
        if (cc < 0.0) {
            cc = -cc;
            ss = -ss;
            d[k - 1] = -h;
        } else {
            d[k - 1] = h;
        }
        double xny = ss / (1.0 + cc);
        for (int row = 0; row < n; ++row) {
            double t1 = j(row, k - 1);
            double t2 = j(row, k);
            j(row, k - 1) = t1 * cc + t2 * ss;
            j(row, k) = xny * (t1 + j(row, k - 1)) - t2;
        }
    }
    ++iq;
    r.col(iq - 1).head(iq) = d.head(iq);
    if (std::abs(d[iq - 1]) <= kEps * r_norm) return false;
    r_norm = std::max(r_norm, std::abs(d[iq - 1]));
    return true;
}

/// Removes inequality constraint l (its index in A) and re-triangularizes.
void delete_constraint(Eigen::MatrixXd& r, Eigen::MatrixXd& j,
                       Eigen::VectorXi& a, Eigen::VectorXd& u, int n, int me,
                       int& iq, int l) {
    int qq = -1;
    for (int i = me; i < iq; ++i)
        if (a[i] == l) {
            qq = i;
            break;
        }
    if (qq < 0) throw InvalidInput("qp: dropping constraint not in the set");

    for (int i = qq; i < iq - 1; ++i) {
        a[i] = a[i + 1];
        u[i] = u[i + 1];
        r.col(i) = r.col(i + 1);
    }
    a[iq - 1] = a[iq];
    u[iq - 1] = u[iq];
    a[iq] = 0;
    u[iq] = 0.0;
    r.col(iq - 1).setZero();
    --iq;
    if (iq == 0) return;

    for (int k = qq; k < iq; ++k) {
        double cc = r(k, k);
        double ss = r(k + 1, k);
        double h = hypot2(cc, ss);
        if (h < kEps) continue;
        cc /= h;
        ss /= h;
        r(k + 1, k) = 0.0;
        if (cc < 0.0) {
            r(k, k) = -h;
            cc = -cc;
            ss = -ss;
        } else {
            r(k, k) = h;
        }
        double xny = ss / (1.0 + cc);
        for (int col = k + 1; col < iq; ++col) {
            double t1 = r(k, col);
            double t2 = r(k + 1, col);
            r(k, col) = t1 * cc + t2 * ss;
            r(k + 1, col) = xny * (t1 + r(k, col)) - t2;
        }
        for (int row = 0; row < n; ++row) {
            double t1 = j(row, k);
            double t2 = j(row, k + 1);
            j(row, k) = t1 * cc + t2 * ss;
            j(row, k + 1) = xny * (j(row, k) + t1) - t2;
        }
    }
}

} // namespace

QpResult solve(const Eigen::MatrixXd& g, const Eigen::VectorXd& g0,
               const Eigen::MatrixXd& ce, const Eigen::VectorXd& ce0,
               const Eigen::MatrixXd& ci, const Eigen::VectorXd& ci0) {
    const int n = static_cast<int>(g.rows());
    const int me = static_cast<int>(ce.cols());
    const int mi = static_cast<int>(ci.cols());
    if (g.cols() != n || g0.size() != n)
        throw InvalidInput("qp: objective dimensions disagree");
    if ((me > 0 && ce.rows() != n) || ce0.size() != me)
        throw InvalidInput("qp: equality dimensions disagree");
    if ((mi > 0 && ci.rows() != n) || ci0.size() != mi)
        throw InvalidInput("qp: inequality dimensions disagree");

    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite("qp: Hessian is not positive definite");
    Eigen::MatrixXd lower = llt.matrixL();

    QpResult res;
    res.eq_duals = Eigen::VectorXd::Zero(me);
    res.ineq_duals = Eigen::VectorXd::Zero(mi);

    double c1 = g.trace();
    Eigen::MatrixXd j = Eigen::MatrixXd::Identity(n, n);
    lower.triangularView<Eigen::Lower>().solveInPlace(j);
    j.transposeInPlace(); // J = L^-T
    double c2 = j.trace();

    Eigen::VectorXd x = -llt.solve(g0);

    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, n);
    double r_norm = 1.0;
    Eigen::VectorXd d(n), z(n), rr = Eigen::VectorXd::Zero(me + mi + 1);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(me + mi + 1);
    Eigen::VectorXi a = Eigen::VectorXi::Zero(me + mi + 1);
    int iq = 0;

    auto step_dirs = [&](const Eigen::VectorXd& np) {
        d = j.transpose() * np;
        z.setZero();
        if (iq < n) z = j.rightCols(n - iq) * d.tail(n - iq);
        for (int i = iq - 1; i >= 0; --i) {
            double sum = d[i];
            for (int col = i + 1; col < iq; ++col) sum -= r(i, col) * rr[col];
            rr[i] = sum / r(i, i);
        }
    };

    for (int i = 0; i < me; ++i) {
        Eigen::VectorXd np = ce.col(i);
        step_dirs(np);
        double resid = np.dot(x) + ce0[i];
        double zn = z.dot(np);
        if (std::abs(zn) <= kEps * std::max(1.0, c1)) {
            // Dependent equality: consistent ones are redundant.
            if (std::abs(resid) > 1e-9 * std::max(1.0, std::abs(ce0[i])))
                return res; // inconsistent -> infeasible
            continue;
        }
        double t2 = -resid / zn;
        x += t2 * z;
        u.head(iq) -= t2 * rr.head(iq);
        u[iq] = t2;
        a[iq] = -i - 1;
        if (!add_constraint(r, j, d, iq, r_norm))
            throw InvalidInput("qp: equality constraints are linearly dependent");
    }

    Eigen::VectorXd s = Eigen::VectorXd::Zero(mi);
    Eigen::VectorXi iai(mi);
    std::vector<bool> iaexcl(mi, true);
    Eigen::VectorXd x_old(n), u_old(me + mi + 1);
    Eigen::VectorXi a_old(me + mi + 1);

    const int max_iter = 100 * (n + me + mi + 1);
    int iter = 0;
    int ip = -1;

    auto finish = [&]() {
        res.x = x;
        res.value = 0.5 * x.dot(g * x) + g0.dot(x);
        res.feasible = true;
        for (int k = 0; k < iq; ++k) {
            if (a[k] < 0)
                res.eq_duals[-a[k] - 1] = u[k];
            else
                res.ineq_duals[a[k]] = u[k];
        }
    };

l1:
    if (++iter > max_iter)
        throw InvalidInput("qp: iteration limit exceeded");
    for (int i = 0; i < mi; ++i) iai[i] = i;
    for (int i = me; i < iq; ++i) iai[a[i]] = -1;
    {
        double psi = 0.0;
        for (int i = 0; i < mi; ++i) {
            iaexcl[i] = true;
            s[i] = ci.col(i).dot(x) + ci0[i];
            psi += std::min(0.0, s[i]);
        }
        if (std::abs(psi) <= mi * kEps * (std::abs(c1) * std::abs(c2) + 1.0) * 100.0) {
            finish();
            return res;
        }
    }
    x_old = x;
    u_old.head(iq) = u.head(iq);
    a_old.head(iq) = a.head(iq);

l2:
    {
        double ss = 0.0;
        ip = -1;
        for (int i = 0; i < mi; ++i)
            if (s[i] < ss && iai[i] != -1 && iaexcl[i]) {
                ss = s[i];
                ip = i;
            }
        if (ip < 0) {
            finish();
            return res;
        }
    }
    u[iq] = 0.0;
    a[iq] = ip;

l2a:
    if (++iter > max_iter)
        throw InvalidInput("qp: iteration limit exceeded");
    {
        Eigen::VectorXd np = ci.col(ip);
        step_dirs(np);

        double t1 = kInf;
        int l = -1;
        for (int k = me; k < iq; ++k)
            if (rr[k] > 0.0 && u[k] / rr[k] < t1) {
                t1 = u[k] / rr[k];
                l = a[k];
            }
        double t2 = kInf;
        double zn = z.dot(np);
        if (z.squaredNorm() > kEps) t2 = -s[ip] / zn;
        double t = std::min(t1, t2);

        if (t >= kInf) return res; // dual unbounded -> primal infeasible

        if (t2 >= kInf) {
            // Dual-only step; drop the blocking constraint and retry.
            u.head(iq) -= t * rr.head(iq);
            u[iq] += t;
            iai[l] = l;
            delete_constraint(r, j, a, u, n, me, iq, l);
            goto l2a;
        }

        x += t * z;
        u.head(iq) -= t * rr.head(iq);
        u[iq] += t;

        if (std::abs(t - t2) < kEps) {
            if (!add_constraint(r, j, d, iq, r_norm)) {
                // Degenerate normal; exclude it and restore the last state.
                iaexcl[ip] = false;
                delete_constraint(r, j, a, u, n, me, iq, ip);
                x = x_old;
                for (int i = 0; i < mi; ++i) iai[i] = i;
                for (int i = me; i < iq; ++i) {
                    a[i] = a_old[i];
                    u[i] = u_old[i];
                    iai[a[i]] = -1;
                }
                goto l2;
            }
            iai[ip] = -1;
            goto l1;
        }

        // Partial step: drop the blocking constraint, keep chasing ip.
        iai[l] = l;
        delete_constraint(r, j, a, u, n, me, iq, l);
        s[ip] = ci.col(ip).dot(x) + ci0[ip];
        goto l2a;
    }
}

} // namespace seduq::qp

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

#include "seduq/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace seduq::numerics {

SymMatrix::SymMatrix(Matrix a) {
    if (a.rows() != a.cols())
        throw InvalidInput("SymMatrix: matrix must be square, got " +
                           std::to_string(a.rows()) + "x" +
                           std::to_string(a.cols()));
    m_ = 0.5 * (a + a.transpose()).eval();
}

EigenDecomp sym_eigen(const SymMatrix& a) {
    if (!a.mat().allFinite())
        throw InvalidInput("sym_eigen: matrix has non-finite entries");

    Eigen::SelfAdjointEigenSolver<Matrix> solver(a.mat());
    if (solver.info() != Eigen::Success)
        throw InvalidInput("sym_eigen: eigendecomposition did not converge");

    const Eigen::Index n = a.dim();
    EigenDecomp out;
    out.eigenvalues = solver.eigenvalues().reverse();
    out.eigenvectors = solver.eigenvectors().rowwise().reverse();

    // Deterministic sign: largest-magnitude entry of each column positive.
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::Index imax = 0;
        out.eigenvectors.col(j).cwiseAbs().maxCoeff(&imax);
        if (out.eigenvectors(imax, j) < 0.0)
            out.eigenvectors.col(j) = -out.eigenvectors.col(j);
    }
    return out;
}

double CholFactor::log_det() const {
    return 2.0 * lower.diagonal().array().log().sum();
}

namespace {

// In-place lower Cholesky; returns false on a non-positive pivot. Rolling
// our own keeps the pivot acceptance rule explicit (Eigen's LLT tolerance
// is an implementation detail we should not depend on).
bool cholesky_lower(Matrix& a) {
    const Eigen::Index n = a.rows();
    for (Eigen::Index j = 0; j < n; ++j) {
        double d = a(j, j);
        for (Eigen::Index k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        const double ljj = std::sqrt(d);
        a(j, j) = ljj;
        if (j + 1 < n) {
            Eigen::VectorXd col = a.col(j).segment(j + 1, n - j - 1);
            if (j > 0)
                col.noalias() -= a.block(j + 1, 0, n - j - 1, j) *
                                 a.row(j).segment(0, j).transpose();
            a.col(j).segment(j + 1, n - j - 1) = col / ljj;
        }
    }
    a.triangularView<Eigen::StrictlyUpper>().setZero();
    return true;
}

} // namespace

CholFactor cholesky_jittered(const SymMatrix& a, double jitter0) {
    if (jitter0 < 0.0)
        throw InvalidInput("cholesky_jittered: jitter0 must be >= 0");
    if (!a.mat().allFinite())
        throw InvalidInput("cholesky_jittered: matrix has non-finite entries");

    const Eigen::Index n = a.dim();
    // Schedule: 0, jitter0, 10*jitter0, ..., 1e6*jitter0.
    for (int step = -1; step <= 6; ++step) {
        const double jitter =
            (step < 0) ? 0.0 : jitter0 * std::pow(10.0, step);
        Matrix work = a.mat();
        work.diagonal().array() += jitter;
        if (cholesky_lower(work))
            return CholFactor{std::move(work), jitter};
        if (jitter0 == 0.0) break; // schedule collapses to {0}
    }
    throw NotPositiveDefinite(
        "cholesky_jittered: factorization failed for dimension " +
        std::to_string(n) + " at max jitter");
}

CholFactor cholesky_jittered(const SymMatrix& a) {
    const double maxdiag =
        a.dim() == 0 ? 0.0 : a.mat().diagonal().maxCoeff();
    return cholesky_jittered(a, 1e-10 * std::max(maxdiag, 0.0));
}

Matrix solve_psd(const CholFactor& f, const Matrix& b) {
    if (f.lower.rows() != b.rows())
        throw InvalidInput("solve_psd: dimension mismatch, factor " +
                           std::to_string(f.lower.rows()) + " vs rhs " +
                           std::to_string(b.rows()));
    Matrix x = f.lower.triangularView<Eigen::Lower>().solve(b);
    f.lower.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
    return x;
}

Vector solve_psd(const CholFactor& f, const Vector& b) {
    return solve_psd(f, Matrix(b)).col(0);
}

Moments::Moments(std::vector<double> samples) {
    if (samples.size() < 2)
        throw InsufficientData("empirical_moments: need at least 2 samples, got " +
                               std::to_string(samples.size()));
    const double n = static_cast<double>(samples.size());
    double sum = 0;
    for (double v : samples) sum += v;
    mean_ = sum / n;
    double ss = 0;
    for (double v : samples) ss += (v - mean_) * (v - mean_);
    var_ = ss / (n - 1.0);
    std_ = std::sqrt(var_);
    sorted_ = std::move(samples);
    std::sort(sorted_.begin(), sorted_.end());
}

double Moments::quantile(double p) const {
    p = std::clamp(p, 0.0, 1.0);
    const std::size_t n = sorted_.size();
    const double pos = p * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    if (lo + 1 >= n) return sorted_.back();
    const double frac = pos - static_cast<double>(lo);
    return sorted_[lo] + frac * (sorted_[lo + 1] - sorted_[lo]);
}

Moments empirical_moments(std::span<const double> samples) {
    return Moments(std::vector<double>(samples.begin(), samples.end()));
}

} // namespace seduq::numerics

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

#ifndef SEDUQ_NUMERICS_HPP
#define SEDUQ_NUMERICS_HPP

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "seduq/common.hpp"

namespace seduq::numerics {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense symmetric matrix. Construction symmetrizes as (A + A^T)/2, so the
/// stored matrix is exactly symmetric regardless of roundoff in the input.
class SymMatrix {
public:
    explicit SymMatrix(Matrix a);
    const Matrix& mat() const { return m_; }
    Eigen::Index dim() const { return m_.rows(); }

private:
    Matrix m_;
};

/// Spectral decomposition with eigenvalues in descending order and
/// orthonormal eigenvector columns. Each eigenvector's sign is fixed so
/// that its largest-magnitude entry is positive.
struct EigenDecomp {
    Vector eigenvalues;
    Matrix eigenvectors;
};

/// Contract: eigenvalues descending, ||V^T V - I||_max <= 1e-8, and
/// ||A - V L V^T||_max <= 1e-8 * ||A||_max.
EigenDecomp sym_eigen(const SymMatrix& a);

/// Lower-triangular Cholesky factor of a + applied_jitter * I.
struct CholFactor {
    Matrix lower;
    double applied_jitter = 0.0;

    /// 2 * sum(log diag(L)), i.e. log det of the factored matrix.
    double log_det() const;
};

/// Factors a + j*I for the smallest j in {0, jitter0, 10*jitter0, ...,
/// 1e6*jitter0} that yields strictly positive pivots. Throws
/// NotPositiveDefinite if even the largest jitter fails.
CholFactor cholesky_jittered(const SymMatrix& a, double jitter0);

/// Default jitter0 = 1e-10 * max diagonal entry.
CholFactor cholesky_jittered(const SymMatrix& a);

/// Solves (L L^T) x = b by forward and back substitution.
Matrix solve_psd(const CholFactor& f, const Matrix& b);
Vector solve_psd(const CholFactor& f, const Vector& b);

/// Summary statistics of a scalar sample: mean, unbiased variance, and the
/// empirical quantile function (linear interpolation between order
/// statistics). Needs at least 2 samples.
class Moments {
public:
    explicit Moments(std::vector<double> samples);

    double mean() const { return mean_; }
    double variance() const { return var_; }
    double stddev() const { return std_; }
    std::size_t count() const { return sorted_.size(); }

    /// Empirical quantile at probability p (clamped to [0, 1]).
    /// Monotone nondecreasing in p.
    double quantile(double p) const;

    const std::vector<double>& sorted() const { return sorted_; }

private:
    double mean_ = 0, var_ = 0, std_ = 0;
    std::vector<double> sorted_;
};

Moments empirical_moments(std::span<const double> samples);

} // namespace seduq::numerics

#endif // SEDUQ_NUMERICS_HPP

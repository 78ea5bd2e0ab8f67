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

#include "seduq/gpe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "seduq/common.hpp"
#include "seduq/json_util.hpp"
#include "seduq/rng.hpp"

namespace seduq::gpe {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

double unbiased_var(const Eigen::VectorXd& y) {
    if (y.size() < 2) return 0.0;
    double mean = y.mean();
    return (y.array() - mean).square().sum() / static_cast<double>(y.size() - 1);
}

void validate_spec(const KernelSpec& spec, Eigen::Index p) {
    if (spec.length.size() != p)
        throw InvalidInput("kernel: length-scale count != input dimension");
    if (!(spec.tau2 > 0.0)) throw InvalidInput("kernel: tau2 must be > 0");
    for (Eigen::Index k = 0; k < p; ++k)
        if (!(spec.length[k] > 0.0))
            throw InvalidInput("kernel: length scales must be > 0");
    if (spec.kind == KernelKind::RationalQuadratic && !(spec.alpha > 0.0))
        throw InvalidInput("kernel: RQ alpha must be > 0");
}

/// Whether the kernel consumes squared per-coordinate distances.
bool uses_squared(KernelKind kind) {
    return kind == KernelKind::SquaredExponential ||
           kind == KernelKind::RationalQuadratic;
}

/// k = tau2 * shape(s) where s is the weighted distance accumulation.
double kernel_shape(KernelKind kind, double s, double alpha) {
    switch (kind) {
    case KernelKind::SquaredExponential: return std::exp(-0.5 * s);
    case KernelKind::Exponential: return std::exp(-s);
    case KernelKind::RationalQuadratic:
        return std::pow(1.0 + s / (2.0 * alpha), -alpha);
    case KernelKind::Matern32: return (1.0 + s) * std::exp(-s);
    }
    throw InvalidInput("kernel: unknown kind");
}

double accumulate_s(const KernelSpec& spec, const Eigen::VectorXd& xi,
                    const Eigen::VectorXd& xj) {
    double s = 0.0;
    const bool sq = uses_squared(spec.kind);
    const double m32 = std::sqrt(3.0);
    for (Eigen::Index k = 0; k < xi.size(); ++k) {
        double r = std::abs(xi[k] - xj[k]);
        if (sq) {
            double t = r / spec.length[k];
            s += t * t;
        } else if (spec.kind == KernelKind::Matern32) {
            s += m32 * r / spec.length[k];
        } else {
            s += r / spec.length[k];
        }
    }
    return s;
}

/// beta and marginal likelihood from a ready factor; beta profiled out via
/// QR of the whitened design. rank_ok reports column rank of H.
struct ProfileResult {
    double lml = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd beta;
    bool rank_ok = true;
};

ProfileResult profile_with_factor(const numerics::CholFactor& chol,
                                  const Eigen::MatrixXd& h,
                                  const Eigen::VectorXd& y) {
    const auto n = y.size();
    Eigen::MatrixXd w = chol.lower.triangularView<Eigen::Lower>().solve(h);
    Eigen::VectorXd u = chol.lower.triangularView<Eigen::Lower>().solve(y);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(w);
    ProfileResult out;
    if (qr.rank() < h.cols()) {
        out.rank_ok = false;
        return out;
    }
    out.beta = qr.solve(u);
    double rss = (u - w * out.beta).squaredNorm();
    out.lml = -0.5 * rss - 0.5 * chol.log_det() - 0.5 * n * kLog2Pi;
    return out;
}

} // namespace

int basis_width(MeanBasis basis, int p) {
    switch (basis) {
    case MeanBasis::Constant: return 1;
    case MeanBasis::Linear: return p + 1;
    case MeanBasis::PureQuadratic: return 2 * p + 1;
    }
    throw InvalidInput("basis: unknown kind");
}

std::string basis_name(MeanBasis basis) {
    switch (basis) {
    case MeanBasis::Constant: return "constant";
    case MeanBasis::Linear: return "linear";
    case MeanBasis::PureQuadratic: return "pure-quadratic";
    }
    throw InvalidInput("basis: unknown kind");
}

MeanBasis parse_basis(const std::string& name) {
    if (name == "constant") return MeanBasis::Constant;
    if (name == "linear") return MeanBasis::Linear;
    if (name == "pure-quadratic") return MeanBasis::PureQuadratic;
    throw InvalidConfig("unknown mean basis '" + name + "'");
}

std::string kernel_name(KernelKind kind) {
    switch (kind) {
    case KernelKind::SquaredExponential: return "se";
    case KernelKind::Exponential: return "e";
    case KernelKind::RationalQuadratic: return "rq";
    case KernelKind::Matern32: return "matern32";
    }
    throw InvalidInput("kernel: unknown kind");
}

KernelKind parse_kernel(const std::string& name) {
    if (name == "se") return KernelKind::SquaredExponential;
    if (name == "e") return KernelKind::Exponential;
    if (name == "rq") return KernelKind::RationalQuadratic;
    if (name == "matern32") return KernelKind::Matern32;
    throw InvalidConfig("unknown kernel '" + name + "'");
}

Eigen::MatrixXd design_matrix(const Eigen::MatrixXd& x, MeanBasis basis) {
    if (!x.allFinite()) throw InvalidInput("design_matrix: non-finite inputs");
    const Eigen::Index n = x.rows();
    const int p = static_cast<int>(x.cols());
    Eigen::MatrixXd h(n, basis_width(basis, p));
    h.col(0).setOnes();
    if (basis == MeanBasis::Linear || basis == MeanBasis::PureQuadratic)
        h.middleCols(1, p) = x;
    if (basis == MeanBasis::PureQuadratic)
        h.middleCols(1 + p, p) = x.array().square().matrix();
    return h;
}

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& xi,
                   const Eigen::VectorXd& xj) {
    if (xi.size() != xj.size())
        throw InvalidInput("kernel_eval: dimension mismatch");
    validate_spec(spec, xi.size());
    return spec.tau2 * kernel_shape(spec.kind, accumulate_s(spec, xi, xj),
                                    spec.alpha);
}

Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b) {
    if (a.cols() != b.cols())
        throw InvalidInput("kernel_matrix: dimension mismatch");
    validate_spec(spec, a.cols());
    Eigen::MatrixXd k(a.rows(), b.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < b.rows(); ++j)
            k(i, j) = spec.tau2 * kernel_shape(spec.kind,
                                               accumulate_s(spec, a.row(i),
                                                            b.row(j)),
                                               spec.alpha);
    return k;
}

double log_marginal_likelihood(const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& y, MeanBasis basis,
                               const KernelSpec& kernel, double sigma2,
                               const Eigen::VectorXd& beta) {
    if (y.size() != x.rows())
        throw InvalidInput("log_marginal_likelihood: X/Y size mismatch");
    if (sigma2 < 0.0)
        throw InvalidInput("log_marginal_likelihood: negative nugget");
    Eigen::MatrixXd h = design_matrix(x, basis);
    if (beta.size() != h.cols())
        throw InvalidInput("log_marginal_likelihood: beta width mismatch");
    Eigen::MatrixXd k = kernel_matrix(kernel, x, x);
    k.diagonal().array() += sigma2;
    numerics::CholFactor chol = numerics::cholesky_jittered(numerics::SymMatrix(k));
    Eigen::VectorXd u =
        chol.lower.triangularView<Eigen::Lower>().solve(y - h * beta);
    return -0.5 * u.squaredNorm() - 0.5 * chol.log_det() -
           0.5 * y.size() * kLog2Pi;
}

Eigen::VectorXd beta_wls(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         MeanBasis basis, const KernelSpec& kernel,
                         double sigma2) {
    if (y.size() != x.rows())
        throw InvalidInput("beta_wls: X/Y size mismatch");
    Eigen::MatrixXd k = kernel_matrix(kernel, x, x);
    k.diagonal().array() += sigma2;
    numerics::CholFactor chol = numerics::cholesky_jittered(numerics::SymMatrix(k));
    ProfileResult pr = profile_with_factor(chol, design_matrix(x, basis), y);
    if (!pr.rank_ok)
        throw RankDeficientBasis("beta_wls: design matrix is rank deficient");
    return pr.beta;
}

double profile_log_likelihood(const Eigen::MatrixXd& x,
                              const Eigen::VectorXd& y, MeanBasis basis,
                              const KernelSpec& kernel, double sigma2) {
    Eigen::MatrixXd k = kernel_matrix(kernel, x, x);
    k.diagonal().array() += sigma2;
    numerics::CholFactor chol = numerics::cholesky_jittered(numerics::SymMatrix(k));
    ProfileResult pr = profile_with_factor(chol, design_matrix(x, basis), y);
    if (!pr.rank_ok)
        throw RankDeficientBasis("profile_log_likelihood: rank-deficient basis");
    return pr.lml;
}

void GpeModel::factorize() {
    Eigen::MatrixXd k = kernel_matrix(hp_.kernel, x_, x_);
    k.diagonal().array() += hp_.sigma2;
    chol_ = numerics::cholesky_jittered(numerics::SymMatrix(k));
    Eigen::MatrixXd h = design_matrix(x_, basis_);
    Eigen::VectorXd resid = y_ - h * hp_.beta;
    resid_weights_ = numerics::solve_psd(chol_, resid);
    Eigen::VectorXd u = chol_.lower.triangularView<Eigen::Lower>().solve(resid);
    lml_ = -0.5 * u.squaredNorm() - 0.5 * chol_.log_det() -
           0.5 * y_.size() * kLog2Pi;
}

GpeModel GpeModel::with_hyperparams(const Eigen::MatrixXd& x,
                                    const Eigen::VectorXd& y, MeanBasis basis,
                                    const GpeHyperparams& hp) {
    if (x.rows() != y.size() || x.rows() < 1)
        throw InvalidInput("GpeModel: X/Y size mismatch");
    if (!x.allFinite() || !y.allFinite())
        throw InvalidInput("GpeModel: non-finite training data");
    if (hp.sigma2 < 0.0) throw InvalidInput("GpeModel: negative nugget");
    if (hp.beta.size() != basis_width(basis, static_cast<int>(x.cols())))
        throw InvalidInput("GpeModel: beta width mismatch");
    GpeModel m;
    m.x_ = x;
    m.y_ = y;
    m.basis_ = basis;
    m.hp_ = hp;
    m.factorize();
    return m;
}

GpeModel GpeModel::fit(const Eigen::MatrixXd& x_in, const Eigen::VectorXd& y_in,
                       MeanBasis basis, KernelKind kernel,
                       const GpeOptions& options) {
    if (x_in.rows() != y_in.size())
        throw InvalidInput("GpeModel::fit: X/Y size mismatch");
    if (!x_in.allFinite() || !y_in.allFinite())
        throw InvalidInput("GpeModel::fit: non-finite training data");

    // Merge duplicate rows, averaging Y; duplicates make K11 singular at
    // small nugget. First-occurrence order is kept.
    const int p = static_cast<int>(x_in.cols());
    std::map<std::vector<double>, int> seen;
    std::vector<Eigen::VectorXd> rows;
    std::vector<double> ysum;
    std::vector<int> ycount;
    for (Eigen::Index i = 0; i < x_in.rows(); ++i) {
        std::vector<double> key(x_in.row(i).begin(), x_in.row(i).end());
        auto [it, fresh] = seen.emplace(key, static_cast<int>(rows.size()));
        if (fresh) {
            rows.push_back(x_in.row(i));
            ysum.push_back(y_in[i]);
            ycount.push_back(1);
        } else {
            ysum[it->second] += y_in[i];
            ycount[it->second] += 1;
        }
    }
    const int n = static_cast<int>(rows.size());
    Eigen::MatrixXd x(n, p);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        x.row(i) = rows[i];
        y[i] = ysum[i] / ycount[i];
    }

    const int q = basis_width(basis, p);
    if (n < q + 2)
        throw InsufficientData("GpeModel::fit: need n >= " +
                               std::to_string(q + 2) + " distinct rows, got " +
                               std::to_string(n));
    Eigen::MatrixXd h = design_matrix(x, basis);
    {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(h);
        if (qr.rank() < q)
            throw RankDeficientBasis("GpeModel::fit: mean basis is rank "
                                     "deficient on the design");
    }

    const double vy = unbiased_var(y);
    if (!(vy > 0.0)) {
        // Constant response: any kernel interpolates it through the trend.
        GpeHyperparams hp;
        hp.kernel.kind = kernel;
        hp.kernel.tau2 = 1e-12;
        hp.kernel.length = Eigen::VectorXd::Ones(p);
        hp.kernel.alpha = 1.0;
        hp.sigma2 = 1e-12;
        hp.beta = beta_wls(x, y, basis, hp.kernel, hp.sigma2);
        return with_hyperparams(x, y, basis, hp);
    }
    const double floor = 1e-10 * vy;

    Eigen::VectorXd ranges(p);
    for (int k = 0; k < p; ++k) {
        double r = x.col(k).maxCoeff() - x.col(k).minCoeff();
        ranges[k] = r > 0.0 ? r : 1.0;
    }

    // Cached per-dimension distances make one likelihood evaluation an
    // elementwise kernel build plus a Cholesky.
    const bool sq = uses_squared(kernel);
    std::vector<Eigen::MatrixXd> dist(p, Eigen::MatrixXd(n, n));
    for (int k = 0; k < p; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double r = std::abs(x(i, k) - x(j, k));
                dist[k](i, j) = sq ? r * r : r;
            }

    // Representative spacing per dimension. Starting the length scales at
    // the full range treats the sample as one correlated blob, and the
    // first optimizer steps from there overshoot into the small-length
    // plateau where the gradient on the lengths vanishes.
    Eigen::VectorXd med(p);
    {
        std::vector<double> buf;
        buf.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
        for (int k = 0; k < p; ++k) {
            buf.clear();
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) buf.push_back(dist[k](i, j));
            if (buf.empty()) {
                med[k] = ranges[k];
                continue;
            }
            auto mid = buf.begin() + static_cast<std::ptrdiff_t>(buf.size() / 2);
            std::nth_element(buf.begin(), mid, buf.end());
            double m = sq ? std::sqrt(*mid) : *mid;
            med[k] = m > 0.0 ? m : ranges[k];
        }
    }

    const bool rq = kernel == KernelKind::RationalQuadratic;
    const bool m32 = kernel == KernelKind::Matern32;
    const int dims = 1 + p + (rq ? 1 : 0) + 1; // tau2, lengths, [alpha], nugget
    const int ialpha = 1 + p;
    const int inug = dims - 1;

    auto objective = [&](const Eigen::VectorXd& z) -> double {
        // exp(40) is far beyond any useful hyperparameter; rejecting the
        // region keeps every kernel entry finite.
        if (z.cwiseAbs().maxCoeff() > 40.0)
            return std::numeric_limits<double>::infinity();
        double tau2 = std::exp(z[0]);
        double alpha = rq ? std::exp(z[ialpha]) : 1.0;
        double sigma2 = floor + std::exp(z[inug]);
        if (!std::isfinite(tau2) || !std::isfinite(sigma2))
            return std::numeric_limits<double>::infinity();
        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
        for (int k = 0; k < p; ++k) {
            double l = std::exp(z[1 + k]);
            double w = sq ? 1.0 / (l * l) : (m32 ? std::sqrt(3.0) / l : 1.0 / l);
            s += w * dist[k];
        }
        Eigen::MatrixXd kmat(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                kmat(i, j) = tau2 * kernel_shape(kernel, s(i, j), alpha);
        kmat.diagonal().array() += sigma2;
        if (!kmat.allFinite())
            return std::numeric_limits<double>::infinity();
        try {
            numerics::CholFactor chol = numerics::cholesky_jittered(numerics::SymMatrix(kmat));
            ProfileResult pr = profile_with_factor(chol, h, y);
            if (!pr.rank_ok || !std::isfinite(pr.lml))
                return std::numeric_limits<double>::infinity();
            return -pr.lml;
        } catch (const NotPositiveDefinite&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    Eigen::VectorXd z0(dims);
    z0[0] = std::log(vy);
    for (int k = 0; k < p; ++k) z0[1 + k] = std::log(med[k]);
    if (rq) z0[ialpha] = 0.0;
    z0[inug] = std::log(1e-2 * vy);

    // The likelihood has a degenerate attractor at vanishing lengths: the
    // kernel matrix turns diagonal and the amplitude plus nugget mimic
    // white noise, a local optimum reachable by monotone descent from
    // most of the space. The smooth-fit basin is a few decades wide at
    // most, so a ladder of starts at geometrically spaced length scales,
    // each optimized with the nugget pinned (a free nugget opens the same
    // escape route mid-run), puts at least one run inside the basin. The
    // full-space polish then starts from the deepest pinned result, and
    // random full-space restarts stay as insurance.
    auto pinned = [&](const Eigen::VectorXd& zsub) -> double {
        Eigen::VectorXd z(dims);
        z.head(dims - 1) = zsub;
        z[inug] = z0[inug];
        return objective(z);
    };
    Eigen::VectorXd ladder_z = z0;
    {
        double best_pin = std::numeric_limits<double>::infinity();
        for (double scale : {2.0, 0.5, 0.125, 0.03125}) {
            Eigen::VectorXd zs = z0.head(dims - 1);
            for (int k = 0; k < p; ++k)
                zs[1 + k] = std::log(med[k] * scale);
            optim::OptimResult warm =
                optim::minimize_bfgs(pinned, zs, options.bfgs);
            if (warm.value < best_pin) {
                best_pin = warm.value;
                ladder_z.head(dims - 1) = warm.x;
            }
        }
    }

    RngStream rng(RngStream::substream(options.seed, "gpe-fit"));
    double best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_z;
    std::vector<double> start_lml;
    for (int s = 0; s < std::max(1, options.restarts); ++s) {
        Eigen::VectorXd z = ladder_z;
        if (s > 0) {
            // Log-uniform spreads cover several decades around the base
            // start; normal jitter kept every restart in one basin.
            z[0] = std::log(vy) + 0.5 * rng.normal();
            for (int k = 0; k < p; ++k)
                z[1 + k] = std::log(med[k]) +
                           rng.uniform(std::log(0.02), std::log(4.0));
            if (rq) z[ialpha] = 0.5 * rng.normal();
            z[inug] =
                std::log(vy) + rng.uniform(std::log(1e-7), std::log(0.3));
        }
        start_lml.push_back(-objective(z));
        optim::OptimResult r = optim::minimize_bfgs(objective, z, options.bfgs);
        if (r.value < best) {
            best = r.value;
            best_z = r.x;
        }
    }
    if (!std::isfinite(best))
        throw FitFailed("GpeModel::fit: no start produced a usable "
                        "factorization");

    GpeHyperparams hp;
    hp.kernel.kind = kernel;
    hp.kernel.tau2 = std::exp(best_z[0]);
    hp.kernel.length.resize(p);
    for (int k = 0; k < p; ++k) hp.kernel.length[k] = std::exp(best_z[1 + k]);
    hp.kernel.alpha = rq ? std::exp(best_z[ialpha]) : 1.0;
    hp.sigma2 = floor + std::exp(best_z[inug]);
    hp.beta = beta_wls(x, y, basis, hp.kernel, hp.sigma2);

    GpeModel m = with_hyperparams(x, y, basis, hp);
    m.start_lml_ = std::move(start_lml);
    return m;
}

GpePrediction GpeModel::predict(const Eigen::MatrixXd& xstar,
                                bool noise_free) const {
    if (xstar.cols() != x_.cols())
        throw InvalidInput("GpeModel::predict: dimension mismatch");
    GpePrediction out;
    const Eigen::Index m = xstar.rows();
    if (m == 0) {
        out.mean.resize(0);
        out.cov.resize(0, 0);
        return out;
    }
    Eigen::MatrixXd k21 = kernel_matrix(hp_.kernel, xstar, x_);
    out.mean = design_matrix(xstar, basis_) * hp_.beta + k21 * resid_weights_;

    Eigen::MatrixXd k22 = kernel_matrix(hp_.kernel, xstar, xstar);
    if (!noise_free) k22.diagonal().array() += hp_.sigma2;
    Eigen::MatrixXd v =
        chol_.lower.triangularView<Eigen::Lower>().solve(k21.transpose());
    Eigen::MatrixXd cov = k22 - v.transpose() * v;
    cov = 0.5 * (cov + cov.transpose()).eval();
    for (Eigen::Index i = 0; i < m; ++i)
        if (cov(i, i) < 0.0) {
            cov(i, i) = 0.0;
            ++out.clamped;
        }
    out.cov = std::move(cov);
    return out;
}

Eigen::VectorXd GpeModel::predict_mean(const Eigen::MatrixXd& xstar) const {
    if (xstar.cols() != x_.cols())
        throw InvalidInput("GpeModel::predict_mean: dimension mismatch");
    if (xstar.rows() == 0) return Eigen::VectorXd();
    Eigen::MatrixXd k21 = kernel_matrix(hp_.kernel, xstar, x_);
    return design_matrix(xstar, basis_) * hp_.beta + k21 * resid_weights_;
}

nlohmann::json KernelSpec::to_json() const {
    nlohmann::json j;
    j["kind"] = kernel_name(kind);
    j["tau2"] = tau2;
    j["length"] = seduq::to_json(length);
    j["alpha"] = alpha;
    return j;
}

KernelSpec KernelSpec::from_json(const nlohmann::json& j) {
    KernelSpec s;
    s.kind = parse_kernel(require_key(j, "kind", "KernelSpec").get<std::string>());
    s.tau2 = require_key(j, "tau2", "KernelSpec").get<double>();
    s.length = vector_from_json(require_key(j, "length", "KernelSpec"),
                                "KernelSpec.length");
    s.alpha = j.value("alpha", 1.0);
    return s;
}

nlohmann::json GpeModel::to_json() const {
    nlohmann::json j;
    j["train_x"] = seduq::to_json(x_);
    j["train_y"] = seduq::to_json(y_);
    j["basis"] = basis_name(basis_);
    j["kernel"] = hp_.kernel.to_json();
    j["sigma2"] = hp_.sigma2;
    j["beta"] = seduq::to_json(hp_.beta);
    return j;
}

GpeModel GpeModel::from_json(const nlohmann::json& j) {
    GpeHyperparams hp;
    hp.kernel = KernelSpec::from_json(require_key(j, "kernel", "GpeModel"));
    hp.sigma2 = require_key(j, "sigma2", "GpeModel").get<double>();
    hp.beta = vector_from_json(require_key(j, "beta", "GpeModel"), "GpeModel.beta");
    Eigen::MatrixXd x = matrix_from_json(require_key(j, "train_x", "GpeModel"),
                                         "GpeModel.train_x");
    Eigen::VectorXd y = vector_from_json(require_key(j, "train_y", "GpeModel"),
                                         "GpeModel.train_y");
    MeanBasis basis =
        parse_basis(require_key(j, "basis", "GpeModel").get<std::string>());
    return with_hyperparams(x, y, basis, hp);
}

} // namespace seduq::gpe

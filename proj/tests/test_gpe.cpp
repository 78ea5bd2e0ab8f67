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

#include <doctest.h>

#include <cmath>

#include "seduq/common.hpp"
#include "seduq/gpe.hpp"
#include "seduq/numerics.hpp"
#include "seduq/rng.hpp"
#include "seduq/validate.hpp"

using namespace seduq;
using namespace seduq::gpe;

namespace {

KernelSpec se_spec(double tau2, double l) {
    KernelSpec spec;
    spec.kind = KernelKind::SquaredExponential;
    spec.tau2 = tau2;
    spec.length = Eigen::VectorXd::Constant(1, l);
    return spec;
}

} // namespace

TEST_SUITE("gpe") {

TEST_CASE("design matrix rows follow the basis definitions") {
    Eigen::MatrixXd x(1, 2);
    x << 2.0, 3.0;
    Eigen::MatrixXd h = design_matrix(x, MeanBasis::PureQuadratic);
    REQUIRE(h.cols() == 5);
    CHECK(h(0, 0) == 1.0);
    CHECK(h(0, 1) == 2.0);
    CHECK(h(0, 2) == 3.0);
    CHECK(h(0, 3) == 4.0);
    CHECK(h(0, 4) == 9.0);

    Eigen::MatrixXd hc = design_matrix(x, MeanBasis::Constant);
    REQUIRE(hc.cols() == 1);
    CHECK(hc(0, 0) == 1.0);

    Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(1, 3);
    Eigen::MatrixXd hl = design_matrix(zero, MeanBasis::Linear);
    REQUIRE(hl.cols() == 4);
    CHECK(hl(0, 0) == 1.0);
    for (int c = 1; c < 4; ++c) CHECK(hl(0, c) == 0.0);
}

TEST_CASE("basis widths and name round trips") {
    CHECK(basis_width(MeanBasis::Constant, 7) == 1);
    CHECK(basis_width(MeanBasis::Linear, 7) == 8);
    CHECK(basis_width(MeanBasis::PureQuadratic, 7) == 15);
    for (MeanBasis b :
         {MeanBasis::Constant, MeanBasis::Linear, MeanBasis::PureQuadratic})
        CHECK(parse_basis(basis_name(b)) == b);
    for (KernelKind k :
         {KernelKind::SquaredExponential, KernelKind::Exponential,
          KernelKind::RationalQuadratic, KernelKind::Matern32})
        CHECK(parse_kernel(kernel_name(k)) == k);
    CHECK_THROWS_AS(parse_basis("cubic"), InvalidConfig);
    CHECK_THROWS_AS(parse_kernel("brownian"), InvalidConfig);
}

TEST_CASE("kernel formulas at hand-computed points") {
    Eigen::VectorXd zero1 = Eigen::VectorXd::Zero(1);
    Eigen::VectorXd one1 = Eigen::VectorXd::Ones(1);

    KernelSpec se = se_spec(1.0, 1.0);
    CHECK(kernel_eval(se, zero1, zero1) == doctest::Approx(1.0));
    CHECK(kernel_eval(se, zero1, one1) ==
          doctest::Approx(std::exp(-0.5)).epsilon(1e-12));

    KernelSpec ex;
    ex.kind = KernelKind::Exponential;
    ex.tau2 = 4.0; // tau = 2
    ex.length = Eigen::VectorXd(2);
    ex.length << 1.0, 2.0;
    Eigen::VectorXd a = Eigen::VectorXd::Zero(2);
    Eigen::VectorXd b(2);
    b << 1.0, 2.0;
    CHECK(kernel_eval(ex, a, b) ==
          doctest::Approx(4.0 * std::exp(-2.0)).epsilon(1e-12));

    KernelSpec m32;
    m32.kind = KernelKind::Matern32;
    m32.tau2 = 2.5;
    m32.length = Eigen::VectorXd::Constant(1, 0.8);
    CHECK(kernel_eval(m32, zero1, zero1) == doctest::Approx(2.5));
    double s = std::sqrt(3.0) * 1.0 / 0.8;
    CHECK(kernel_eval(m32, zero1, one1) ==
          doctest::Approx(2.5 * (1.0 + s) * std::exp(-s)).epsilon(1e-12));

    KernelSpec rq;
    rq.kind = KernelKind::RationalQuadratic;
    rq.tau2 = 1.5;
    rq.length = Eigen::VectorXd::Constant(1, 1.2);
    rq.alpha = 0.9;
    double q = 1.0 / (2.0 * 0.9 * 1.2 * 1.2);
    CHECK(kernel_eval(rq, zero1, one1) ==
          doctest::Approx(1.5 * std::pow(1.0 + q, -0.9)).epsilon(1e-12));
}

TEST_CASE("every kernel is symmetric with k(x,x) = tau2") {
    RngStream rng(221);
    for (KernelKind kind :
         {KernelKind::SquaredExponential, KernelKind::Exponential,
          KernelKind::RationalQuadratic, KernelKind::Matern32}) {
        KernelSpec spec;
        spec.kind = kind;
        spec.tau2 = 1.7;
        spec.length = Eigen::VectorXd(3);
        spec.length << 0.5, 1.0, 2.0;
        spec.alpha = 1.3;
        Eigen::VectorXd x(3), y(3);
        for (int i = 0; i < 3; ++i) {
            x[i] = rng.uniform(-2.0, 2.0);
            y[i] = rng.uniform(-2.0, 2.0);
        }
        CHECK(kernel_eval(spec, x, x) == doctest::Approx(1.7).epsilon(1e-14));
        CHECK(kernel_eval(spec, x, y) ==
              doctest::Approx(kernel_eval(spec, y, x)).epsilon(1e-14));
        CHECK(kernel_eval(spec, x, y) >= 0.0);
    }
}

TEST_CASE("rational quadratic approaches squared exponential as alpha grows") {
    KernelSpec se = se_spec(2.0, 0.7);
    KernelSpec rq = se_spec(2.0, 0.7);
    rq.kind = KernelKind::RationalQuadratic;
    rq.alpha = 1e6;
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
    Eigen::VectorXd x(1);
    for (double r = 0.0; r <= 3.0; r += 0.1) {
        x[0] = r;
        CHECK(std::abs(kernel_eval(rq, zero, x) - kernel_eval(se, zero, x)) <=
              1e-4 * 2.0);
    }
}

TEST_CASE("kernel matrix agrees with elementwise evaluation") {
    RngStream rng(223);
    Eigen::MatrixXd a(4, 2), b(3, 2);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 2; ++j) a(i, j) = rng.normal();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) b(i, j) = rng.normal();
    KernelSpec spec;
    spec.kind = KernelKind::Matern32;
    spec.tau2 = 1.1;
    spec.length = Eigen::VectorXd::Constant(2, 0.9);
    Eigen::MatrixXd k = kernel_matrix(spec, a, b);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(k(i, j) == doctest::Approx(kernel_eval(
                                 spec, a.row(i).transpose(),
                                 b.row(j).transpose()))
                                 .epsilon(1e-14));
}

TEST_CASE("single-observation likelihood with unit variance") {
    Eigen::MatrixXd x(1, 1);
    x << 0.0;
    Eigen::VectorXd y(1);
    y << 3.7;
    // k(x,x) + sigma2 = 0.5 + 0.5 = 1, residual zero
    KernelSpec spec = se_spec(0.5, 1.0);
    Eigen::VectorXd beta(1);
    beta << 3.7;
    double lml =
        log_marginal_likelihood(x, y, MeanBasis::Constant, spec, 0.5, beta);
    CHECK(lml ==
          doctest::Approx(-0.5 * std::log(2.0 * M_PI)).epsilon(1e-12));
}

TEST_CASE("two-point likelihood matches 2x2 closed form") {
    Eigen::MatrixXd x(2, 1);
    x << 0.0, 0.8;
    Eigen::VectorXd y(2);
    y << 1.0, -0.5;
    KernelSpec spec = se_spec(1.3, 0.6);
    double sigma2 = 0.05;
    Eigen::VectorXd beta(1);
    beta << 0.2;

    double k01 = kernel_eval(spec, x.row(0).transpose(), x.row(1).transpose());
    double d0 = spec.tau2 + sigma2;
    double det = d0 * d0 - k01 * k01;
    Eigen::Vector2d r(y[0] - 0.2, y[1] - 0.2);
    double quad =
        (d0 * r[0] * r[0] - 2.0 * k01 * r[0] * r[1] + d0 * r[1] * r[1]) / det;
    double expect =
        -0.5 * quad - 0.5 * std::log(det) - std::log(2.0 * M_PI);

    double lml = log_marginal_likelihood(x, y, MeanBasis::Constant, spec,
                                         sigma2, beta);
    CHECK(lml == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("likelihood is invariant to a common shift of Y and the trend") {
    RngStream rng(227);
    Eigen::MatrixXd x(6, 1);
    Eigen::VectorXd y(6);
    for (int i = 0; i < 6; ++i) {
        x(i, 0) = i * 0.4;
        y[i] = rng.normal();
    }
    KernelSpec spec = se_spec(1.0, 0.5);
    Eigen::VectorXd beta(1);
    beta << 0.3;
    double base =
        log_marginal_likelihood(x, y, MeanBasis::Constant, spec, 0.01, beta);
    Eigen::VectorXd beta2(1);
    beta2 << 0.3 + 11.0;
    Eigen::VectorXd y_shift = (y.array() + 11.0).matrix();
    double shifted = log_marginal_likelihood(x, y_shift, MeanBasis::Constant,
                                             spec, 0.01, beta2);
    CHECK(shifted == doctest::Approx(base).epsilon(1e-10));
}

TEST_CASE("beta reduces to the plain mean when the covariance is identity") {
    Eigen::MatrixXd x(5, 1);
    x << 0.0, 10.0, 20.0, 30.0, 40.0; // far apart: SE off-diagonals vanish
    Eigen::VectorXd y(5);
    y << 1.0, 2.0, 3.0, 4.0, 10.0;
    KernelSpec spec = se_spec(0.5, 0.1);
    Eigen::VectorXd beta = beta_wls(x, y, MeanBasis::Constant, spec, 0.5);
    REQUIRE(beta.size() == 1);
    CHECK(beta[0] == doctest::Approx(y.mean()).epsilon(1e-12));
}

TEST_CASE("scaled identity covariance reproduces ordinary least squares") {
    RngStream rng(229);
    Eigen::MatrixXd x(8, 1);
    Eigen::VectorXd y(8);
    for (int i = 0; i < 8; ++i) {
        x(i, 0) = i * 5.0;
        y[i] = 0.7 * x(i, 0) - 2.0 + rng.normal();
    }
    KernelSpec spec = se_spec(1.5, 0.01);
    Eigen::VectorXd beta = beta_wls(x, y, MeanBasis::Linear, spec, 1.5);
    Eigen::MatrixXd h = design_matrix(x, MeanBasis::Linear);
    Eigen::VectorXd ols = h.colPivHouseholderQr().solve(y);
    CHECK((beta - ols).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("beta matches the explicit dense formula") {
    RngStream rng(233);
    Eigen::MatrixXd x(7, 2);
    Eigen::VectorXd y(7);
    for (int i = 0; i < 7; ++i) {
        x(i, 0) = rng.uniform(-1.0, 1.0);
        x(i, 1) = rng.uniform(-1.0, 1.0);
        y[i] = rng.normal();
    }
    KernelSpec spec;
    spec.kind = KernelKind::SquaredExponential;
    spec.tau2 = 0.8;
    spec.length = Eigen::VectorXd::Constant(2, 0.9);
    double sigma2 = 0.01;

    Eigen::MatrixXd k = kernel_matrix(spec, x, x);
    k.diagonal().array() += sigma2;
    Eigen::MatrixXd h = design_matrix(x, MeanBasis::Linear);
    Eigen::MatrixXd kinv = k.inverse();
    Eigen::VectorXd dense =
        (h.transpose() * kinv * h).inverse() * h.transpose() * kinv * y;

    Eigen::VectorXd beta = beta_wls(x, y, MeanBasis::Linear, spec, sigma2);
    CHECK((beta - dense).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("collinear basis columns are rejected") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Ones(5, 1); // x column == intercept
    Eigen::VectorXd y(5);
    y << 1, 2, 3, 4, 5;
    KernelSpec spec = se_spec(1.0, 1.0);
    CHECK_THROWS_AS(beta_wls(x, y, MeanBasis::Linear, spec, 0.1),
                    RankDeficientBasis);
}

TEST_CASE("constant response fits to a constant prediction") {
    Eigen::MatrixXd x(5, 1);
    x << 0.0, 1.0, 2.0, 3.0, 4.0;
    Eigen::VectorXd y = Eigen::VectorXd::Constant(5, 7.5);
    GpeModel model = GpeModel::fit(x, y, MeanBasis::Constant,
                                   KernelKind::SquaredExponential);
    CHECK(model.hyperparams().beta[0] == doctest::Approx(7.5).epsilon(1e-9));
    Eigen::MatrixXd xs(3, 1);
    xs << -2.0, 0.5, 9.0;
    Eigen::VectorXd mean = model.predict_mean(xs);
    for (int i = 0; i < 3; ++i)
        CHECK(mean[i] == doctest::Approx(7.5).epsilon(1e-6));
}

TEST_CASE("fit is deterministic in the seed and beats all starts") {
    RngStream rng(239);
    Eigen::MatrixXd x(25, 1);
    Eigen::VectorXd y(25);
    for (int i = 0; i < 25; ++i) {
        x(i, 0) = i * 0.2;
        y[i] = std::sin(x(i, 0)) + 0.05 * rng.normal();
    }
    GpeOptions opt;
    opt.seed = 77;
    GpeModel m1 = GpeModel::fit(x, y, MeanBasis::Constant,
                                KernelKind::SquaredExponential, opt);
    GpeModel m2 = GpeModel::fit(x, y, MeanBasis::Constant,
                                KernelKind::SquaredExponential, opt);
    CHECK(m1.hyperparams().kernel.tau2 == m2.hyperparams().kernel.tau2);
    CHECK(m1.hyperparams().kernel.length[0] ==
          m2.hyperparams().kernel.length[0]);
    CHECK(m1.hyperparams().sigma2 == m2.hyperparams().sigma2);
    CHECK(m1.log_likelihood() == m2.log_likelihood());

    REQUIRE(!m1.start_likelihoods().empty());
    for (double s : m1.start_likelihoods())
        CHECK(m1.log_likelihood() >= s - 1e-9);
}

TEST_CASE("one-dimensional length scale is recoverable") {
    RngStream rng(241);
    const int n = 120;
    Eigen::MatrixXd x(n, 1);
    for (int i = 0; i < n; ++i) x(i, 0) = 6.0 * i / n;
    KernelSpec truth = se_spec(1.0, 0.5);
    Eigen::MatrixXd k = kernel_matrix(truth, x, x);
    k.diagonal().array() += 1e-4;
    numerics::CholFactor f =
        numerics::cholesky_jittered(numerics::SymMatrix(k), 1e-12);
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z[i] = rng.normal();
    Eigen::VectorXd y = f.lower * z;

    GpeModel model = GpeModel::fit(x, y, MeanBasis::Constant,
                                   KernelKind::SquaredExponential);
    double ell = model.hyperparams().kernel.length[0];
    CHECK(ell >= 0.3);
    CHECK(ell <= 0.8);
}

TEST_CASE("noise-free prediction interpolates the training data") {
    RngStream rng(251);
    Eigen::MatrixXd x(12, 1);
    Eigen::VectorXd y(12);
    for (int i = 0; i < 12; ++i) {
        x(i, 0) = i * 0.5;
        y[i] = std::cos(x(i, 0)) * 3.0 + 5.0;
    }
    GpeHyperparams hp;
    hp.kernel = se_spec(2.0, 1.0);
    hp.sigma2 = 0.0; // conditioning comes from jitter alone
    hp.beta = beta_wls(x, y, MeanBasis::Constant, hp.kernel, hp.sigma2);
    GpeModel model = GpeModel::with_hyperparams(x, y, MeanBasis::Constant, hp);

    GpePrediction pred = model.predict(x, /*noise_free=*/true);
    for (int i = 0; i < 12; ++i) {
        CHECK(std::abs(pred.mean[i] - y[i]) <= 1e-6 * std::abs(y[i]));
        CHECK(pred.cov(i, i) <= 1e-6 * hp.kernel.tau2);
    }
}

TEST_CASE("prediction matches the joint-conditioning oracle") {
    RngStream rng(257);
    Eigen::MatrixXd x(5, 2), xs(3, 2);
    Eigen::VectorXd y(5);
    for (int i = 0; i < 5; ++i) {
        x(i, 0) = rng.uniform(-2.0, 2.0);
        x(i, 1) = rng.uniform(-2.0, 2.0);
        y[i] = rng.normal();
    }
    for (int i = 0; i < 3; ++i) {
        xs(i, 0) = rng.uniform(-2.0, 2.0);
        xs(i, 1) = rng.uniform(-2.0, 2.0);
    }
    GpeHyperparams hp;
    hp.kernel.kind = KernelKind::Matern32;
    hp.kernel.tau2 = 1.4;
    hp.kernel.length = Eigen::VectorXd::Constant(2, 0.8);
    hp.sigma2 = 1e-3;
    hp.beta = beta_wls(x, y, MeanBasis::Linear, hp.kernel, hp.sigma2);
    GpeModel model = GpeModel::with_hyperparams(x, y, MeanBasis::Linear, hp);

    for (bool noise_free : {false, true}) {
        GpePrediction pred = model.predict(xs, noise_free);
        validate::GpOracle oracle = validate::gp_conditioning_oracle(
            x, y, MeanBasis::Linear, hp.kernel, hp.sigma2, xs, noise_free);
        CHECK((pred.mean - oracle.mean).cwiseAbs().maxCoeff() <= 1e-8);
        CHECK((pred.cov - oracle.cov).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("posterior mean is affine in the observations") {
    RngStream rng(263);
    Eigen::MatrixXd x(6, 1), xs(4, 1);
    Eigen::VectorXd y(6);
    for (int i = 0; i < 6; ++i) {
        x(i, 0) = i * 0.7;
        y[i] = rng.normal();
    }
    for (int i = 0; i < 4; ++i) xs(i, 0) = rng.uniform(0.0, 4.0);
    KernelSpec spec = se_spec(1.0, 0.8);
    double sigma2 = 0.01;

    auto build = [&](const Eigen::VectorXd& yy) {
        GpeHyperparams hp;
        hp.kernel = spec;
        hp.sigma2 = sigma2;
        hp.beta = beta_wls(x, yy, MeanBasis::Constant, spec, sigma2);
        return GpeModel::with_hyperparams(x, yy, MeanBasis::Constant, hp);
    };
    Eigen::VectorXd y2 = (2.5 * y.array() - 4.0).matrix();
    Eigen::VectorXd base = build(y).predict_mean(xs);
    Eigen::VectorXd scaled = build(y2).predict_mean(xs);
    for (int i = 0; i < 4; ++i)
        CHECK(scaled[i] == doctest::Approx(2.5 * base[i] - 4.0).epsilon(1e-8));
}

TEST_CASE("posterior covariance is psd and bounded by the prior") {
    RngStream rng(269);
    Eigen::MatrixXd x(10, 1), xs(6, 1);
    Eigen::VectorXd y(10);
    for (int i = 0; i < 10; ++i) {
        x(i, 0) = rng.uniform(0.0, 5.0);
        y[i] = rng.normal();
    }
    for (int i = 0; i < 6; ++i) xs(i, 0) = rng.uniform(0.0, 5.0);
    GpeHyperparams hp;
    hp.kernel = se_spec(1.2, 0.6);
    hp.sigma2 = 1e-4;
    hp.beta = beta_wls(x, y, MeanBasis::Constant, hp.kernel, hp.sigma2);
    GpeModel model = GpeModel::with_hyperparams(x, y, MeanBasis::Constant, hp);
    GpePrediction pred = model.predict(xs);

    CHECK((pred.cov - pred.cov.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pred.cov);
    CHECK(es.eigenvalues().minCoeff() >= -1e-8);
    for (int i = 0; i < 6; ++i)
        CHECK(pred.cov(i, i) <= hp.kernel.tau2 + hp.sigma2 + 1e-8);
}

TEST_CASE("empty prediction batch gives empty output") {
    Eigen::MatrixXd x(4, 1);
    x << 0, 1, 2, 3;
    Eigen::VectorXd y(4);
    y << 0, 1, 0, 1;
    GpeHyperparams hp;
    hp.kernel = se_spec(1.0, 1.0);
    hp.sigma2 = 0.01;
    hp.beta = beta_wls(x, y, MeanBasis::Constant, hp.kernel, hp.sigma2);
    GpeModel model = GpeModel::with_hyperparams(x, y, MeanBasis::Constant, hp);
    GpePrediction pred = model.predict(Eigen::MatrixXd(0, 1));
    CHECK(pred.mean.size() == 0);
    CHECK(pred.cov.rows() == 0);
}

TEST_CASE("duplicate design rows are merged with averaged responses") {
    Eigen::MatrixXd x(6, 1);
    x << 0.0, 0.0, 1.0, 2.0, 3.0, 4.0;
    Eigen::VectorXd y(6);
    y << 1.0, 3.0, 0.5, 0.7, 0.9, 1.1;
    GpeModel model = GpeModel::fit(x, y, MeanBasis::Constant,
                                   KernelKind::SquaredExponential);
    REQUIRE(model.train_x().rows() == 5);
    CHECK(model.train_y()[0] == doctest::Approx(2.0)); // (1 + 3) / 2
}

TEST_CASE("fit input contracts") {
    Eigen::MatrixXd x(5, 1);
    x << 0, 1, 2, 3, 4;
    Eigen::VectorXd bad(5);
    bad << 1, 2, std::nan(""), 4, 5;
    CHECK_THROWS_AS(GpeModel::fit(x, bad, MeanBasis::Constant,
                                  KernelKind::SquaredExponential),
                    InvalidInput);
    Eigen::MatrixXd tiny(2, 1);
    tiny << 0, 1;
    Eigen::VectorXd ty(2);
    ty << 0, 1;
    CHECK_THROWS_AS(GpeModel::fit(tiny, ty, MeanBasis::Linear,
                                  KernelKind::SquaredExponential),
                    InsufficientData);
}

TEST_CASE("model json round trip preserves predictions") {
    RngStream rng(271);
    Eigen::MatrixXd x(15, 2);
    Eigen::VectorXd y(15);
    for (int i = 0; i < 15; ++i) {
        x(i, 0) = rng.uniform(-1.0, 1.0);
        x(i, 1) = rng.uniform(-1.0, 1.0);
        y[i] = x(i, 0) * x(i, 0) + 0.3 * x(i, 1) + 0.01 * rng.normal();
    }
    GpeModel model = GpeModel::fit(x, y, MeanBasis::Linear,
                                   KernelKind::SquaredExponential);
    GpeModel back = GpeModel::from_json(model.to_json());

    Eigen::MatrixXd xs(5, 2);
    for (int i = 0; i < 5; ++i) {
        xs(i, 0) = rng.uniform(-1.0, 1.0);
        xs(i, 1) = rng.uniform(-1.0, 1.0);
    }
    CHECK((model.predict_mean(xs) - back.predict_mean(xs))
              .cwiseAbs()
              .maxCoeff() <= 1e-10);
    CHECK(back.basis() == model.basis());
    CHECK(back.hyperparams().sigma2 == model.hyperparams().sigma2);
}

} // TEST_SUITE

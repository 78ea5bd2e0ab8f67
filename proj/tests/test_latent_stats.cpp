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
#include <map>
#include <vector>

#include "seduq/common.hpp"
#include "seduq/latent_stats.hpp"
#include "seduq/rng.hpp"

using namespace seduq;
using namespace seduq::latent;

namespace {

// definitional distance correlation, written independently of the library:
// double-center both pairwise-distance matrices and take the cosine-like
// ratio of their means
double dcor_brute(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const int n = static_cast<int>(x.size());
    auto centered = [n](const Eigen::VectorXd& v) {
        Eigen::MatrixXd d(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) d(i, j) = std::abs(v[i] - v[j]);
        Eigen::VectorXd row = d.rowwise().mean();
        Eigen::VectorXd col = d.colwise().mean();
        double all = d.mean();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) d(i, j) += all - row[i] - col[j];
        return d;
    };
    Eigen::MatrixXd a = centered(x), b = centered(y);
    double cov2 = (a.array() * b.array()).mean();
    double vx = (a.array() * a.array()).mean();
    double vy = (b.array() * b.array()).mean();
    if (vx <= 0.0 || vy <= 0.0) return 0.0;
    return std::sqrt(cov2 / std::sqrt(vx * vy));
}

double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    double mx = x.mean(), my = y.mean();
    Eigen::ArrayXd cx = x.array() - mx, cy = y.array() - my;
    return (cx * cy).sum() / std::sqrt(cx.square().sum() * cy.square().sum());
}

} // namespace

TEST_SUITE("latent_stats") {

TEST_CASE("silverman bandwidth for unit-sd samples") {
    RngStream rng(81);
    Eigen::MatrixXd s(100, 1);
    for (int i = 0; i < 100; ++i) s(i, 0) = rng.normal();
    double m = s.col(0).mean();
    double sd = std::sqrt((s.col(0).array() - m).square().sum() / 99.0);
    s /= sd; // now the unbiased sd is exactly 1

    Eigen::VectorXd h = silverman_bandwidth(s);
    REQUIRE(h.size() == 1);
    // d=1, n=100: (4 / 300)^(1/5)
    CHECK(h[0] == doctest::Approx(0.421716).epsilon(1e-4));
    CHECK(h[0] == doctest::Approx(std::pow(4.0 / 300.0, 0.2)).epsilon(1e-10));

    Eigen::VectorXd h3 = silverman_bandwidth(3.0 * s);
    CHECK(h3[0] == doctest::Approx(3.0 * h[0]).epsilon(1e-12));
}

TEST_CASE("constant coordinate is degenerate") {
    Eigen::MatrixXd s(5, 2);
    s.col(0).setLinSpaced(5, 0.0, 1.0);
    s.col(1).setConstant(2.0);
    CHECK_THROWS_AS(silverman_bandwidth(s), DegenerateCoordinate);
    CHECK_THROWS_AS(kde_fit(s), DegenerateCoordinate);
    CHECK_THROWS_AS(silverman_bandwidth(Eigen::MatrixXd::Random(1, 2)),
                    InsufficientData);
}

TEST_CASE("two-point kde is symmetric with its peak at the mean") {
    Eigen::MatrixXd s(2, 1);
    s << -1.0, 1.0;
    KdeModel model = kde_fit("f", s);
    Eigen::VectorXd p(1);
    double best = -1.0, best_x = 0.0;
    for (double x = -4.0; x <= 4.0; x += 0.01) {
        p[0] = x;
        double d1 = kde_pdf(model, p);
        p[0] = -x;
        double d2 = kde_pdf(model, p);
        CHECK(d1 >= 0.0);
        CHECK(d1 == doctest::Approx(d2).epsilon(1e-12));
        if (d1 > best) {
            best = d1;
            best_x = x;
        }
    }
    CHECK(std::abs(best_x) <= 0.011);
}

TEST_CASE("one-dimensional pdf integrates to one") {
    RngStream rng(83);
    Eigen::MatrixXd s(40, 1);
    for (int i = 0; i < 40; ++i)
        s(i, 0) = 1.5 * rng.normal() + (i % 2 ? 3.0 : 0.0);
    KdeModel model = kde_fit("f", s);
    double h = model.bandwidth[0];
    double lo = s.minCoeff() - 8.0 * h, hi = s.maxCoeff() + 8.0 * h;
    const int cells = 20000;
    double dx = (hi - lo) / cells;
    Eigen::VectorXd p(1);
    double integral = 0.0;
    for (int i = 0; i <= cells; ++i) {
        p[0] = lo + i * dx;
        double w = (i == 0 || i == cells) ? 0.5 : 1.0;
        integral += w * kde_pdf(model, p) * dx;
    }
    CHECK(std::abs(integral - 1.0) <= 1e-3);
}

TEST_CASE("smoothed bootstrap matches the mixture moments") {
    KdeModel model;
    model.farm_id = "f";
    model.samples = Eigen::MatrixXd(2, 1);
    model.samples << -1.0, 1.0;
    model.bandwidth = Eigen::VectorXd::Constant(1, 0.5);

    RngStream rng(87);
    Eigen::MatrixXd draws = kde_sample(model, 100000, rng);
    double mean = draws.col(0).mean();
    double var = (draws.col(0).array() - mean).square().sum() /
                 (draws.rows() - 1.0);
    // mixture mean 0; variance = population sample variance + h^2
    //   = 2 * (1/2) + 0.25 = 1.25
    CHECK(std::abs(mean) <= 0.01);
    CHECK(std::abs(var - 1.25) <= 0.03);
}

TEST_CASE("vanishing bandwidth reduces sampling to the training set") {
    KdeModel model;
    model.farm_id = "f";
    model.samples = Eigen::MatrixXd(3, 1);
    model.samples << -1.0, 0.25, 1.0;
    model.bandwidth = Eigen::VectorXd::Constant(1, 1e-12);
    RngStream rng(89);
    Eigen::MatrixXd draws = kde_sample(model, 500, rng);
    for (int i = 0; i < draws.rows(); ++i) {
        double v = draws(i, 0);
        bool near = std::abs(v + 1.0) < 1e-9 || std::abs(v - 0.25) < 1e-9 ||
                    std::abs(v - 1.0) < 1e-9;
        CHECK(near);
    }
}

TEST_CASE("kde sampling is reproducible and validates dimensions") {
    RngStream src(91);
    Eigen::MatrixXd s(20, 2);
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 2; ++j) s(i, j) = src.normal() + j;
    KdeModel model = kde_fit("f", s);

    RngStream r1(7), r2(7);
    Eigen::MatrixXd a = kde_sample(model, 64, r1);
    Eigen::MatrixXd b = kde_sample(model, 64, r2);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(kde_pdf(model, Eigen::VectorXd::Ones(3)), InvalidInput);
}

TEST_CASE("distance correlation of a variable with itself is exactly one") {
    RngStream rng(93);
    Eigen::VectorXd x(100);
    for (int i = 0; i < 100; ++i) x[i] = rng.normal();
    CHECK(distance_correlation(x, x) == 1.0);
}

TEST_CASE("distance correlation matches the definitional computation") {
    RngStream rng(95);
    Eigen::VectorXd x(60), y(60);
    for (int i = 0; i < 60; ++i) {
        x[i] = rng.normal();
        y[i] = 0.7 * x[i] + rng.normal();
    }
    CHECK(distance_correlation(x, y) ==
          doctest::Approx(dcor_brute(x, y)).epsilon(1e-12));
    CHECK(distance_correlation(x, y) ==
          doctest::Approx(distance_correlation(y, x)).epsilon(1e-14));
    Eigen::VectorXd shifted = x.array() + 5.0;
    CHECK(distance_correlation(shifted, y) ==
          doctest::Approx(distance_correlation(x, y)).epsilon(1e-10));
}

TEST_CASE("independent pairs score low") {
    RngStream rng(97);
    Eigen::VectorXd x(500), y(500);
    for (int i = 0; i < 500; ++i) {
        x[i] = rng.normal();
        y[i] = rng.normal();
    }
    double d = distance_correlation(x, y);
    CHECK(d < 0.15);
    CHECK(d == doctest::Approx(dcor_brute(x, y)).epsilon(1e-10));
}

TEST_CASE("constant arguments give zero") {
    Eigen::VectorXd c = Eigen::VectorXd::Constant(10, 3.0);
    Eigen::VectorXd x(10);
    x.setLinSpaced(10, 0.0, 1.0);
    CHECK(distance_correlation(c, x) == 0.0);
    CHECK_THROWS_AS(distance_correlation(x, Eigen::VectorXd::Ones(9)),
                    InvalidInput);
}

TEST_CASE("exact linear dependence is recovered exactly") {
    Eigen::VectorXd s(6);
    s << -2, -1, 0, 1, 2, 3;
    Eigen::VectorXd t = 2.0 * s.array() + 1.0;
    DependencyLink link = fit_dependency(s, t);
    CHECK(link.intercept == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(link.slope == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(link.residual_var <= 1e-20);

    DependencyLink self = fit_dependency(s, s);
    CHECK(self.slope == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(self.intercept) <= 1e-12);
}

TEST_CASE("independent target has a statistically null slope") {
    RngStream rng(101);
    const int n = 400;
    Eigen::VectorXd s(n), t(n);
    for (int i = 0; i < n; ++i) {
        s[i] = rng.normal();
        t[i] = rng.normal();
    }
    DependencyLink link = fit_dependency(s, t);
    double sm = s.mean();
    double sxx = (s.array() - sm).square().sum();
    double sse = (t.array() - link.intercept - link.slope * s.array())
                     .square()
                     .sum();
    double se = std::sqrt(sse / (n - 2) / sxx);
    CHECK(std::abs(link.slope) <= 3.0 * se);
}

TEST_CASE("dependency fit input contracts") {
    Eigen::VectorXd c = Eigen::VectorXd::Constant(10, 1.0);
    Eigen::VectorXd x(10);
    x.setLinSpaced(10, 0.0, 1.0);
    CHECK_THROWS_AS(fit_dependency(c, x), DegenerateCoordinate);
    CHECK_THROWS_AS(fit_dependency(Eigen::VectorXd::Ones(2),
                                   Eigen::VectorXd::Ones(2)),
                    InsufficientData);
}

TEST_CASE("residual variance divides by n") {
    // three points, fit leaves a nonzero residual: y = (0, 1, 0) on
    // x = (-1, 0, 1) has slope 0, intercept 1/3, SSE = 2/3
    Eigen::VectorXd x(3), y(3);
    x << -1, 0, 1;
    y << 0, 1, 0;
    DependencyLink link = fit_dependency(x, y);
    CHECK(link.slope == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(link.intercept == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(link.residual_var == doctest::Approx(2.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("link selection flags only the planted pair") {
    RngStream rng(103);
    const int n = 200;
    Eigen::MatrixXd a(n, 2), b(n, 2);
    for (int i = 0; i < n; ++i) {
        a(i, 0) = rng.normal();
        a(i, 1) = rng.normal();
        b(i, 0) = 2.0 * a(i, 0) + 0.3 * rng.normal();
        b(i, 1) = rng.normal();
    }
    auto links = select_links({"farm_a", "farm_b"}, {a, b}, 0.5);
    REQUIRE(links.size() == 1);
    CHECK(links[0].source_farm == "farm_a");
    CHECK(links[0].source_mode == 0);
    CHECK(links[0].target_farm == "farm_b");
    CHECK(links[0].target_mode == 0);
    CHECK(links[0].dcor > 0.5);
    CHECK(links[0].slope == doctest::Approx(2.0).epsilon(0.1));

    CHECK(select_links({"farm_a", "farm_b"}, {a, b}, 0.999).empty());
}

TEST_CASE("joint sampling without links is plain kde sampling") {
    RngStream src(107);
    Eigen::MatrixXd s(30, 1);
    for (int i = 0; i < 30; ++i) s(i, 0) = src.normal();
    std::map<std::string, KdeModel> models{{"f", kde_fit("f", s)}};

    RngStream r1(11), r2(11);
    auto joint = sample_joint(models, {}, 50, r1);
    Eigen::MatrixXd direct = kde_sample(models.at("f"), 50, r2);
    CHECK((joint.at("f") - direct).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("a deterministic unit link copies its source coordinate") {
    RngStream src(109);
    Eigen::MatrixXd sa(20, 1), sb(20, 1);
    for (int i = 0; i < 20; ++i) {
        sa(i, 0) = src.normal();
        sb(i, 0) = src.normal() + 2.0;
    }
    std::map<std::string, KdeModel> models{{"a", kde_fit("a", sa)},
                                           {"b", kde_fit("b", sb)}};
    DependencyLink link;
    link.source_farm = "a";
    link.source_mode = 0;
    link.target_farm = "b";
    link.target_mode = 0;
    link.intercept = 0.0;
    link.slope = 1.0;
    link.residual_var = 0.0;

    RngStream rng(13);
    auto out = sample_joint(models, {link}, 40, rng);
    CHECK((out.at("a") - out.at("b")).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cyclic links are rejected") {
    RngStream src(113);
    Eigen::MatrixXd s(10, 1);
    for (int i = 0; i < 10; ++i) s(i, 0) = src.normal();
    std::map<std::string, KdeModel> models{{"a", kde_fit("a", s)},
                                           {"b", kde_fit("b", s)}};
    DependencyLink ab, ba;
    ab.source_farm = "a";
    ab.source_mode = 0;
    ab.target_farm = "b";
    ab.target_mode = 0;
    ab.slope = 1.0;
    ba.source_farm = "b";
    ba.source_mode = 0;
    ba.target_farm = "a";
    ba.target_mode = 0;
    ba.slope = 1.0;
    RngStream rng(17);
    CHECK_THROWS_AS(sample_joint(models, {ab, ba}, 10, rng), InvalidConfig);
}

TEST_CASE("joint sampling reproduces the planted correlation") {
    RngStream src(127);
    const int n = 200;
    Eigen::MatrixXd sa(n, 1), sb(n, 1);
    for (int i = 0; i < n; ++i) {
        sa(i, 0) = src.normal();
        sb(i, 0) = 2.0 * sa(i, 0) + 0.3 * src.normal();
    }
    double train_corr = pearson(sa.col(0), sb.col(0));

    std::map<std::string, KdeModel> models{{"a", kde_fit("a", sa)},
                                           {"b", kde_fit("b", sb)}};
    auto links = select_links({"a", "b"}, {sa, sb}, 0.5);
    REQUIRE(links.size() == 1);

    RngStream rng(19);
    auto out = sample_joint(models, links, 10000, rng);
    double draw_corr = pearson(out.at("a").col(0), out.at("b").col(0));
    CHECK(std::abs(draw_corr - train_corr) <= 0.1);
}

TEST_CASE("joint sampling is bit-for-bit reproducible") {
    RngStream src(131);
    Eigen::MatrixXd s(25, 2);
    for (int i = 0; i < 25; ++i)
        for (int j = 0; j < 2; ++j) s(i, j) = src.normal();
    std::map<std::string, KdeModel> models{{"a", kde_fit("a", s)},
                                           {"b", kde_fit("b", s)}};
    RngStream r1(23), r2(23);
    auto o1 = sample_joint(models, {}, 100, r1);
    auto o2 = sample_joint(models, {}, 100, r2);
    for (const auto& [farm, m] : o1)
        CHECK((m - o2.at(farm)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kde model json round trip") {
    RngStream src(137);
    Eigen::MatrixXd s(15, 2);
    for (int i = 0; i < 15; ++i)
        for (int j = 0; j < 2; ++j) s(i, j) = src.normal();
    KdeModel model = kde_fit("farm_x", s);
    KdeModel back = KdeModel::from_json(model.to_json());
    CHECK(back.farm_id == model.farm_id);
    CHECK((back.samples - model.samples).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.bandwidth - model.bandwidth).cwiseAbs().maxCoeff() == 0.0);

    DependencyLink link;
    link.source_farm = "a";
    link.source_mode = 1;
    link.target_farm = "b";
    link.target_mode = 0;
    link.intercept = 0.5;
    link.slope = -1.25;
    link.residual_var = 0.04;
    link.dcor = 0.7;
    DependencyLink lback = DependencyLink::from_json(link.to_json());
    CHECK(lback.source_farm == "a");
    CHECK(lback.source_mode == 1);
    CHECK(lback.slope == link.slope);
    CHECK(lback.residual_var == link.residual_var);
    CHECK(lback.dcor == link.dcor);
}

} // TEST_SUITE

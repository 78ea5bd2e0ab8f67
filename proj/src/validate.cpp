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

#include "seduq/validate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "seduq/common.hpp"
#include "seduq/latent_stats.hpp"
#include "seduq/rng.hpp"

namespace seduq::validate {

namespace {

/// Kernel entry written out longhand from the covariance formulas, on
/// purpose not calling the emulator's kernel code.
double oracle_kernel(const gpe::KernelSpec& k, const Eigen::VectorXd& a,
                     const Eigen::VectorXd& b) {
    const Eigen::Index p = a.size();
    switch (k.kind) {
    case gpe::KernelKind::SquaredExponential: {
        double s = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            double r = a[j] - b[j];
            s += r * r / (2.0 * k.length[j] * k.length[j]);
        }
        return k.tau2 * std::exp(-s);
    }
    case gpe::KernelKind::Exponential: {
        double s = 0.0;
        for (Eigen::Index j = 0; j < p; ++j)
            s += std::abs(a[j] - b[j]) / k.length[j];
        return k.tau2 * std::exp(-s);
    }
    case gpe::KernelKind::RationalQuadratic: {
        double s = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            double r = a[j] - b[j];
            s += r * r / (2.0 * k.alpha * k.length[j] * k.length[j]);
        }
        return k.tau2 * std::pow(1.0 + s, -k.alpha);
    }
    case gpe::KernelKind::Matern32: {
        double s = 0.0;
        for (Eigen::Index j = 0; j < p; ++j)
            s += std::sqrt(3.0) * std::abs(a[j] - b[j]) / k.length[j];
        return k.tau2 * (1.0 + s) * std::exp(-s);
    }
    }
    throw InvalidInput("unknown kernel kind");
}

Eigen::MatrixXd oracle_design(gpe::MeanBasis basis, const Eigen::MatrixXd& x) {
    const Eigen::Index n = x.rows(), p = x.cols();
    switch (basis) {
    case gpe::MeanBasis::Constant:
        return Eigen::MatrixXd::Ones(n, 1);
    case gpe::MeanBasis::Linear: {
        Eigen::MatrixXd h(n, p + 1);
        h.col(0).setOnes();
        h.rightCols(p) = x;
        return h;
    }
    case gpe::MeanBasis::PureQuadratic: {
        Eigen::MatrixXd h(n, 2 * p + 1);
        h.col(0).setOnes();
        h.middleCols(1, p) = x;
        h.rightCols(p) = x.array().square().matrix();
        return h;
    }
    }
    throw InvalidInput("unknown mean basis");
}

} // namespace

GpOracle gp_conditioning_oracle(const Eigen::MatrixXd& x,
                                const Eigen::VectorXd& y,
                                gpe::MeanBasis basis,
                                const gpe::KernelSpec& kernel, double sigma2,
                                const Eigen::MatrixXd& xstar,
                                bool noise_free) {
    const Eigen::Index n = x.rows(), m = xstar.rows();
    Eigen::MatrixXd k11(n, n), k21(m, n), k22(m, m);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            k11(i, j) = oracle_kernel(kernel, x.row(i), x.row(j));
    k11.diagonal().array() += sigma2;
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            k21(i, j) = oracle_kernel(kernel, xstar.row(i), x.row(j));
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            k22(i, j) = oracle_kernel(kernel, xstar.row(i), xstar.row(j));
    if (!noise_free) k22.diagonal().array() += sigma2;

    Eigen::MatrixXd kinv = k11.inverse();
    Eigen::MatrixXd h1 = oracle_design(basis, x);
    Eigen::MatrixXd h2 = oracle_design(basis, xstar);
    Eigen::VectorXd beta =
        (h1.transpose() * kinv * h1).inverse() * (h1.transpose() * kinv * y);

    GpOracle o;
    o.mean = h2 * beta + k21 * kinv * (y - h1 * beta);
    o.cov = k22 - k21 * kinv * k21.transpose();
    return o;
}

double max_kkt_residual(const Eigen::MatrixXd& g, const Eigen::VectorXd& g0,
                        const Eigen::MatrixXd& ce, const Eigen::VectorXd& ce0,
                        const Eigen::MatrixXd& ci, const Eigen::VectorXd& ci0,
                        const qp::QpResult& res) {
    double worst = 0.0;
    Eigen::VectorXd grad = g * res.x + g0;
    if (ce.cols() > 0) grad -= ce * res.eq_duals;
    if (ci.cols() > 0) grad -= ci * res.ineq_duals;
    worst = std::max(worst, grad.cwiseAbs().maxCoeff());

    if (ce.cols() > 0) {
        Eigen::VectorXd eq = ce.transpose() * res.x + ce0;
        worst = std::max(worst, eq.cwiseAbs().maxCoeff());
    }
    if (ci.cols() > 0) {
        Eigen::VectorXd slack = ci.transpose() * res.x + ci0;
        for (Eigen::Index i = 0; i < slack.size(); ++i) {
            worst = std::max(worst, -slack[i]);            // primal
            worst = std::max(worst, -res.ineq_duals[i]);   // dual sign
            worst = std::max(worst,
                             std::abs(res.ineq_duals[i] * slack[i])); // slackness
        }
    }
    return worst;
}

qp::QpResult qp_enum_solve(const Eigen::MatrixXd& g, const Eigen::VectorXd& g0,
                           const Eigen::MatrixXd& ce,
                           const Eigen::VectorXd& ce0,
                           const Eigen::MatrixXd& ci,
                           const Eigen::VectorXd& ci0) {
    const int nv = static_cast<int>(g.rows());
    const int me = static_cast<int>(ce.cols());
    const int mi = static_cast<int>(ci.cols());
    if (mi > 25) throw InvalidInput("qp_enum_solve: too many inequalities");

    qp::QpResult best;
    best.feasible = false;
    best.value = std::numeric_limits<double>::infinity();

    const int max_active = nv - me;
    for (std::uint32_t mask = 0; mask < (1u << mi); ++mask) {
        std::vector<int> active;
        for (int i = 0; i < mi; ++i)
            if (mask & (1u << i)) active.push_back(i);
        if (static_cast<int>(active.size()) > max_active) continue;

        const int na = static_cast<int>(active.size());
        const int dim = nv + me + na;
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(dim, dim);
        Eigen::VectorXd rhs(dim);
        kkt.topLeftCorner(nv, nv) = g;
        rhs.head(nv) = -g0;
        for (int e = 0; e < me; ++e) {
            kkt.block(0, nv + e, nv, 1) = -ce.col(e);
            kkt.block(nv + e, 0, 1, nv) = ce.col(e).transpose();
            rhs[nv + e] = -ce0[e];
        }
        for (int a = 0; a < na; ++a) {
            kkt.block(0, nv + me + a, nv, 1) = -ci.col(active[a]);
            kkt.block(nv + me + a, 0, 1, nv) = ci.col(active[a]).transpose();
            rhs[nv + me + a] = -ci0[active[a]];
        }

        Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
        if (!lu.isInvertible()) continue;
        Eigen::VectorXd sol = lu.solve(rhs);
        Eigen::VectorXd x = sol.head(nv);

        bool ok = true;
        for (int a = 0; a < na && ok; ++a)
            if (sol[nv + me + a] < -1e-9) ok = false; // dual sign
        if (ok && mi > 0) {
            Eigen::VectorXd slack = ci.transpose() * x + ci0;
            if (slack.minCoeff() < -1e-9) ok = false; // primal feasibility
        }
        if (!ok) continue;

        double value = 0.5 * x.dot(g * x) + g0.dot(x);
        if (value < best.value) {
            best.feasible = true;
            best.value = value;
            best.x = x;
            best.eq_duals = sol.segment(nv, me);
            best.ineq_duals = Eigen::VectorXd::Zero(mi);
            for (int a = 0; a < na; ++a)
                best.ineq_duals[active[a]] = sol[nv + me + a];
        }
    }
    return best;
}

double dispatch_grid_oracle(const dispatch::DispatchCase& c,
                            const dispatch::Network& net, int hour,
                            const Eigen::VectorXd& wind_bus_mw, double step,
                            Eigen::VectorXd* g_best) {
    const int ng = static_cast<int>(c.generators.size());
    if (ng != 2 && ng != 3)
        throw InvalidInput("grid oracle handles 2 or 3 generators only");
    if (!(step > 0.0)) throw InvalidInput("grid step must be > 0");

    const int nb = static_cast<int>(c.buses.size());
    Eigen::VectorXd fixed(nb);
    double demand = 0.0;
    for (int i = 0; i < nb; ++i) {
        fixed[i] = wind_bus_mw[i] - c.buses[i].load[hour];
        demand -= fixed[i];
    }

    auto cost_of = [&](const Eigen::VectorXd& g) {
        double q = 0.0;
        for (int i = 0; i < ng; ++i) {
            const dispatch::Generator& gen = c.generators[i];
            q += gen.a * g[i] * g[i] + gen.b * g[i] + gen.c;
        }
        return q;
    };
    auto feasible = [&](const Eigen::VectorXd& g) {
        for (int i = 0; i < ng; ++i)
            if (g[i] < c.generators[i].g_min - 1e-9 ||
                g[i] > c.generators[i].g_max + 1e-9)
                return false;
        Eigen::VectorXd inj = fixed;
        for (int i = 0; i < ng; ++i)
            inj[net.bus_index(c.generators[i].bus)] += g[i];
        Eigen::VectorXd flows = net.ptdf() * inj;
        for (int l = 0; l < static_cast<int>(c.lines.size()); ++l)
            if (c.lines[l].limit &&
                std::abs(flows[l]) > *c.lines[l].limit + 1e-9)
                return false;
        return true;
    };

    // The balance constraint removes one degree of freedom; the last
    // generator always takes the residual demand.
    double best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd g(ng), winner(ng);
    auto consider = [&] {
        if (!feasible(g)) return;
        double q = cost_of(g);
        if (q < best) {
            best = q;
            winner = g;
        }
    };
    const dispatch::Generator& gen0 = c.generators[0];
    long n0 = std::lround(std::floor((gen0.g_max - gen0.g_min) / step));
    for (long i0 = 0; i0 <= n0 + 1; ++i0) {
        g[0] = std::min(gen0.g_min + static_cast<double>(i0) * step,
                        gen0.g_max);
        if (ng == 2) {
            g[1] = demand - g[0];
            consider();
        } else {
            const dispatch::Generator& gen1 = c.generators[1];
            long n1 =
                std::lround(std::floor((gen1.g_max - gen1.g_min) / step));
            for (long i1 = 0; i1 <= n1 + 1; ++i1) {
                g[1] = std::min(gen1.g_min + static_cast<double>(i1) * step,
                                gen1.g_max);
                g[2] = demand - g[0] - g[1];
                consider();
            }
        }
    }
    if (!std::isfinite(best))
        throw Infeasible("grid oracle found no feasible point", hour);
    if (g_best) *g_best = winner;
    return best;
}

dispatch::DispatchCase congested_three_bus() {
    dispatch::DispatchCase c;
    for (int id = 1; id <= 3; ++id) {
        dispatch::Bus b;
        b.id = id;
        b.load = Eigen::VectorXd::Zero(wind::kHoursPerDay);
        if (id == 3) b.load.setConstant(150.0);
        c.buses.push_back(std::move(b));
    }
    c.generators.push_back({1, 0.01, 20.0, 0.0, 0.0, 120.0});
    c.generators.push_back({2, 0.02, 25.0, 0.0, 0.0, 120.0});
    c.lines.push_back({1, 2, 10.0, std::nullopt});
    c.lines.push_back({1, 3, 10.0, 60.0});
    c.lines.push_back({2, 3, 10.0, std::nullopt});
    return c;
}

double ks_statistic(std::vector<double> sample,
                    const std::function<double(double)>& cdf) {
    if (sample.empty()) throw InvalidInput("ks_statistic: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        double f = cdf(sample[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i + 1) / n));
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    }
    return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw InvalidInput("ks_two_sample: empty");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        double fa = static_cast<double>(i) / static_cast<double>(a.size());
        double fb = static_cast<double>(j) / static_cast<double>(b.size());
        d = std::max(d, std::abs(fa - fb));
    }
    return d;
}

CheckResult gp_conditioning_check(int instances, std::uint64_t seed,
                                  bool fault) {
    RngStream rng(RngStream::substream(seed, "validate-gpe"));
    double worst = 0.0;
    for (int inst = 0; inst < instances; ++inst) {
        int p = 1 + static_cast<int>(rng.index(4));
        std::vector<gpe::MeanBasis> bases{gpe::MeanBasis::Constant,
                                          gpe::MeanBasis::Linear};
        if (2 * p + 1 + 2 <= 10) bases.push_back(gpe::MeanBasis::PureQuadratic);
        gpe::MeanBasis basis = bases[rng.index(bases.size())];
        int q = gpe::basis_width(basis, p);
        int n = q + 2 + static_cast<int>(rng.index(
                            static_cast<std::size_t>(10 - q - 2 + 1)));
        int m = 1 + static_cast<int>(rng.index(5));

        Eigen::MatrixXd x(n, p), xs(m, p);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < p; ++j) x(i, j) = rng.uniform(-2.0, 2.0);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < p; ++j) xs(i, j) = rng.uniform(-2.0, 2.0);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) y[i] = rng.normal();

        gpe::KernelSpec kernel;
        const gpe::KernelKind kinds[] = {gpe::KernelKind::SquaredExponential,
                                         gpe::KernelKind::Exponential,
                                         gpe::KernelKind::RationalQuadratic,
                                         gpe::KernelKind::Matern32};
        kernel.kind = kinds[rng.index(4)];
        kernel.tau2 = rng.uniform(0.5, 2.0);
        kernel.length.resize(p);
        for (int j = 0; j < p; ++j) kernel.length[j] = rng.uniform(0.5, 2.0);
        kernel.alpha = rng.uniform(0.7, 3.0);
        double sigma2 = rng.uniform(1e-6, 1e-2);
        bool noise_free = inst % 2 == 0;

        gpe::GpeHyperparams hp;
        hp.kernel = kernel;
        hp.sigma2 = sigma2;
        hp.beta = gpe::beta_wls(x, y, basis, kernel, sigma2);
        gpe::GpeModel model = gpe::GpeModel::with_hyperparams(x, y, basis, hp);
        gpe::GpePrediction pred = model.predict(xs, noise_free);

        // Test hook: a slightly wrong nugget in the oracle must be caught.
        double oracle_sigma2 = fault ? sigma2 * 1.01 + 1e-4 : sigma2;
        GpOracle o = gp_conditioning_oracle(x, y, basis, kernel, oracle_sigma2,
                                            xs, noise_free);
        worst = std::max(worst, (pred.mean - o.mean).cwiseAbs().maxCoeff());
        worst = std::max(worst, (pred.cov - o.cov).cwiseAbs().maxCoeff());
    }
    CheckResult r;
    r.name = "gpe/conditioning";
    r.metric = worst;
    r.threshold = 1e-8;
    r.pass = worst <= r.threshold;
    r.detail = std::to_string(instances) + " random instances";
    return r;
}

CheckResult qp_kkt_check(int instances, std::uint64_t seed, bool fault) {
    RngStream rng(RngStream::substream(seed, "validate-qp"));
    double worst = 0.0;
    for (int inst = 0; inst < instances; ++inst) {
        int nv = 2 + static_cast<int>(rng.index(5));
        int me = static_cast<int>(rng.index(2));
        if (me >= nv) me = nv - 1;
        int mi = 1 + static_cast<int>(rng.index(8));

        Eigen::MatrixXd a(nv, nv);
        for (int i = 0; i < nv; ++i)
            for (int j = 0; j < nv; ++j) a(i, j) = rng.normal();
        Eigen::MatrixXd g = a.transpose() * a +
                            0.5 * Eigen::MatrixXd::Identity(nv, nv);
        Eigen::VectorXd g0(nv);
        for (int i = 0; i < nv; ++i) g0[i] = rng.normal();

        // Constraints built around a known interior point, so every
        // instance is feasible by construction.
        Eigen::VectorXd x0(nv);
        for (int i = 0; i < nv; ++i) x0[i] = rng.uniform(-1.0, 1.0);
        Eigen::MatrixXd ce(nv, me);
        Eigen::VectorXd ce0(me);
        for (int e = 0; e < me; ++e) {
            for (int i = 0; i < nv; ++i) ce(i, e) = rng.normal();
            ce0[e] = -ce.col(e).dot(x0);
        }
        Eigen::MatrixXd ci(nv, mi);
        Eigen::VectorXd ci0(mi);
        for (int k = 0; k < mi; ++k) {
            for (int i = 0; i < nv; ++i) ci(i, k) = rng.normal();
            ci0[k] = -ci.col(k).dot(x0) + rng.uniform(0.1, 2.0);
        }

        qp::QpResult res = qp::solve(g, g0, ce, ce0, ci, ci0);
        if (!res.feasible) {
            worst = std::numeric_limits<double>::infinity();
            break;
        }
        if (fault) res.x[0] += 1e-3; // test hook: corrupt the solution
        worst = std::max(worst,
                         max_kkt_residual(g, g0, ce, ce0, ci, ci0, res));
    }
    CheckResult r;
    r.name = "qp/kkt";
    r.metric = worst;
    r.threshold = 1e-6;
    r.pass = worst <= r.threshold;
    r.detail = std::to_string(instances) + " random feasible instances";
    return r;
}

CheckResult dispatch_analytic_check(bool fault) {
    dispatch::DispatchCase c;
    dispatch::Bus b;
    b.id = 1;
    b.load = Eigen::VectorXd::Constant(wind::kHoursPerDay, 3.0);
    if (fault) b.load[0] += 1e-6; // test hook: nudge the load
    c.buses.push_back(std::move(b));
    c.generators.push_back({1, 1.0, 0.0, 0.0, 0.0, 10.0});
    c.generators.push_back({1, 2.0, 0.0, 0.0, 0.0, 10.0});
    dispatch::Network net(c);

    dispatch::HourSolution sol =
        dispatch::solve_hour(c, net, 0, Eigen::VectorXd::Zero(1));
    double worst = std::max({std::abs(sol.g[0] - 2.0), std::abs(sol.g[1] - 1.0),
                             std::abs(sol.lambda - 4.0),
                             std::abs(sol.cost - 6.0)});
    CheckResult r;
    r.name = "dispatch/analytic";
    r.metric = worst;
    r.threshold = 1e-9;
    r.pass = worst <= r.threshold;
    r.detail = "two-generator equal-marginal case";
    return r;
}

CheckResult dispatch_grid_check(bool fault) {
    dispatch::DispatchCase c = congested_three_bus();
    dispatch::Network net(c);
    dispatch::HourSolution sol =
        dispatch::solve_hour(c, net, 0, Eigen::VectorXd::Zero(3));

    dispatch::DispatchCase oracle_case = c;
    if (fault) oracle_case.lines[1].limit = 70.0; // test hook: wrong polytope
    dispatch::Network oracle_net(oracle_case);
    Eigen::VectorXd g_grid;
    double cost_grid = dispatch_grid_oracle(oracle_case, oracle_net, 0,
                                            Eigen::VectorXd::Zero(3), 0.01,
                                            &g_grid);

    double worst = (sol.g - g_grid).cwiseAbs().maxCoeff();
    // The solver must also never be beaten by the grid.
    if (sol.cost > cost_grid + 1e-9) worst = std::max(worst, 1.0);
    CheckResult r;
    r.name = "dispatch/grid";
    r.metric = worst;
    r.threshold = 0.01 + 1e-9;
    r.pass = worst <= r.threshold;
    r.detail = "congested 3-bus hour vs 0.01 MW exhaustive search";
    return r;
}

CheckResult kde_quadrature_check(std::uint64_t seed, bool fault) {
    RngStream rng(RngStream::substream(seed, "validate-kde"));
    Eigen::MatrixXd samples(40, 1);
    for (int i = 0; i < 40; ++i)
        samples(i, 0) = 1.5 * rng.normal() + (i % 2 == 0 ? 3.0 : 0.0);
    latent::KdeModel model = latent::kde_fit(samples);

    double h = model.bandwidth[0];
    double pad = fault ? 1.5 * h : 8.0 * h; // test hook: truncated domain
    double lo = samples.col(0).minCoeff() - pad;
    double hi = samples.col(0).maxCoeff() + pad;
    const int cells = 40000;
    double dx = (hi - lo) / cells;
    double integral = 0.0;
    Eigen::VectorXd pt(1);
    for (int i = 0; i <= cells; ++i) {
        pt[0] = lo + i * dx;
        double w = (i == 0 || i == cells) ? 0.5 : 1.0;
        integral += w * latent::kde_pdf(model, pt);
    }
    integral *= dx;

    CheckResult r;
    r.name = "kde/quadrature";
    r.metric = std::abs(integral - 1.0);
    r.threshold = 1e-3;
    r.pass = r.metric <= r.threshold;
    r.detail = "trapezoid integral of a 1-d density";
    return r;
}

std::vector<CheckResult> run_all(std::uint64_t seed,
                                 const std::string& fault_module) {
    std::vector<CheckResult> out;
    out.push_back(gp_conditioning_check(50, seed, fault_module == "gpe"));
    out.push_back(qp_kkt_check(100, seed, fault_module == "qp"));
    out.push_back(dispatch_analytic_check(false));
    out.push_back(dispatch_grid_check(fault_module == "dispatch"));
    out.push_back(kde_quadrature_check(seed, fault_module == "kde"));
    return out;
}

} // namespace seduq::validate

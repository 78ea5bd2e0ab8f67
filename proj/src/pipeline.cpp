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

#include "seduq/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "seduq/common.hpp"
#include "seduq/numerics.hpp"
#include "seduq/rng.hpp"

namespace seduq::pipeline {

namespace {

/// Runs one stage and stamps its name into whatever escapes. The handful
/// of types the CLI maps to distinct exit codes are rethrown as-is so
/// that mapping survives; everything else becomes a PipelineError.
template <typename F>
auto stage(const std::string& name, RunTiming* timing, F&& body)
    -> decltype(body()) {
    auto t0 = std::chrono::steady_clock::now();
    auto done = [&] {
        if (timing) {
            std::chrono::duration<double, std::milli> ms =
                std::chrono::steady_clock::now() - t0;
            timing->stage_ms.emplace_back(name, ms.count());
        }
    };
    try {
        if constexpr (std::is_void_v<decltype(body())>) {
            body();
            done();
        } else {
            auto out = body();
            done();
            return out;
        }
    } catch (const FitAborted& e) {
        throw FitAborted("[" + name + "] " + e.what());
    } catch (const FitFailed& e) {
        throw FitFailed("[" + name + "] " + e.what());
    } catch (const Infeasible& e) {
        throw Infeasible("[" + name + "] " + e.what(), e.hour());
    } catch (const PipelineError&) {
        throw;
    } catch (const Error& e) {
        throw PipelineError(name, e.what());
    }
}

void check_config(const PipelineConfig& cfg) {
    if (!(cfg.variance_target > 0.0) || cfg.variance_target > 1.0)
        throw InvalidConfig("variance_target must be in (0, 1]");
    if (cfg.train_size < 2) throw InvalidConfig("train_size must be >= 2");
    if (cfg.mc_size < 100) throw InvalidConfig("mc_size must be >= 100");
    if (!(cfg.dependency_threshold >= 0.0 && cfg.dependency_threshold <= 1.0))
        throw InvalidConfig("dependency_threshold must be in [0, 1]");
    if (cfg.reference_pool < 2)
        throw InvalidConfig("reference_pool must be >= 2");
    for (std::size_t i = 0; i < cfg.trace_sizes.size(); ++i) {
        if (cfg.trace_sizes[i] < 2)
            throw InvalidConfig("trace sizes must be >= 2");
        if (i > 0 && cfg.trace_sizes[i] <= cfg.trace_sizes[i - 1])
            throw InvalidConfig("trace sizes must be strictly increasing");
    }
    if (!cfg.trace_sizes.empty() && !cfg.with_mc)
        throw InvalidConfig("a convergence trace needs the Monte Carlo "
                            "reference; enable with_mc");
}

std::vector<double> finite_subset(const std::vector<double>& v,
                                  const std::vector<double>& mask_src) {
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        if (std::isfinite(mask_src[i])) out.push_back(v[i]);
    return out;
}

} // namespace

StatBlock stat_block(const std::vector<double>& values) {
    numerics::Moments m = numerics::empirical_moments(values);
    StatBlock b;
    b.mean = m.mean();
    b.stddev = m.stddev();
    b.ci_lower = m.quantile(0.025);
    b.ci_upper = m.quantile(0.975);
    b.count = static_cast<int>(values.size());
    return b;
}

nlohmann::json StatBlock::to_json() const {
    nlohmann::json j;
    j["mean"] = mean;
    j["stddev"] = stddev;
    j["ci_lower"] = ci_lower;
    j["ci_upper"] = ci_upper;
    j["count"] = count;
    return j;
}

double relative_difference(double a, double b) {
    if (b == 0.0 || !std::isfinite(b))
        throw InvalidInput("relative_difference: reference is zero");
    return std::abs(a - b) / std::abs(b);
}

std::map<std::string, Eigen::VectorXd>
Prepared::latent_of_row(const Eigen::MatrixXd& x, Eigen::Index row) const {
    std::map<std::string, Eigen::VectorXd> out;
    for (const auto& [farm, basis] : bases)
        out[farm] = Eigen::VectorXd::Zero(basis.order());
    for (int c = 0; c < total_modes(); ++c)
        out.at(farm_of[c])[mode_of[c]] = x(row, c);
    return out;
}

Prepared prepare(const PipelineConfig& cfg,
                 const std::vector<std::string>& wind_csvs,
                 const std::string& case_path, long& solver_calls,
                 RunTiming* timing) {
    check_config(cfg);
    if (wind_csvs.empty()) throw InvalidInput("no wind data files given");

    Prepared prep;
    prep.grid = stage("case", timing, [&] {
        return dispatch::DispatchCase::load(case_path);
    });
    dispatch::Network net(prep.grid);

    // Day-by-hour averages per farm, restricted to days every farm has.
    stage("ingest", timing, [&] {
        std::vector<wind::WindFieldRecord> records;
        for (const std::string& path : wind_csvs) {
            std::vector<wind::WindFieldRecord> part = wind::ingest_csv(path);
            records.insert(records.end(), part.begin(), part.end());
        }
        auto by_farm = wind::group_by_farm(records);

        std::map<std::string, wind::HourlyAverages> averages;
        std::set<std::string> shared_days;
        bool first = true;
        for (const auto& [farm, recs] : by_farm) {
            wind::HourlyAverages avg = wind::hourly_farm_average(recs);
            prep.dropped_days += static_cast<int>(avg.dropped_days.size());
            std::set<std::string> days(avg.speed.days.begin(),
                                       avg.speed.days.end());
            if (first) {
                shared_days = std::move(days);
                first = false;
            } else {
                std::set<std::string> kept;
                std::set_intersection(shared_days.begin(), shared_days.end(),
                                      days.begin(), days.end(),
                                      std::inserter(kept, kept.begin()));
                shared_days = std::move(kept);
            }
            averages.emplace(farm, std::move(avg));
        }
        if (shared_days.size() < 2)
            throw InsufficientData("fewer than 2 days shared by all farms");
        prep.common_days.assign(shared_days.begin(), shared_days.end());

        const int nd = static_cast<int>(prep.common_days.size());
        for (auto& [farm, avg] : averages) {
            std::map<std::string, int> row_of;
            for (std::size_t r = 0; r < avg.speed.days.size(); ++r)
                row_of[avg.speed.days[r]] = static_cast<int>(r);
            Eigen::MatrixXd sp(nd, wind::kHoursPerDay);
            Eigen::MatrixXd pw(nd, wind::kHoursPerDay);
            for (int d = 0; d < nd; ++d) {
                int r = row_of.at(prep.common_days[d]);
                sp.row(d) = avg.speed.values.row(r);
                pw.row(d) = avg.power.values.row(r);
            }
            prep.speed_days.emplace(farm, std::move(sp));
            prep.power_days.emplace(farm, std::move(pw));
        }
    });

    // Every farm wired into the case needs data and vice versa; a silent
    // mismatch would quietly zero out part of the wind fleet.
    for (const auto& [farm, bus] : prep.grid.wind_buses)
        if (!prep.speed_days.count(farm))
            throw InvalidConfig("case expects wind farm '" + farm +
                                "' but no data file provides it");
    for (const auto& [farm, m] : prep.speed_days)
        if (!prep.grid.wind_buses.count(farm))
            throw InvalidConfig("farm '" + farm +
                                "' has data but no bus in the case");

    stage("power-curve", timing, [&] {
        for (const auto& [farm, sp] : prep.speed_days) {
            const Eigen::MatrixXd& pw = prep.power_days.at(farm);
            std::vector<double> s(sp.data(), sp.data() + sp.size());
            std::vector<double> p(pw.data(), pw.data() + pw.size());
            prep.curves.emplace(farm, wind::fit_power_curve(s, p));
        }
    });

    stage("reduce", timing, [&] {
        for (const auto& [farm, sp] : prep.speed_days) {
            kle::KleBasis basis =
                kle::fit_kle(farm, sp, cfg.variance_target);
            prep.scores.emplace(farm, basis.project_days(sp));
            prep.bases.emplace(farm, std::move(basis));
        }
    });

    stage("latent-fit", timing, [&] {
        std::vector<std::string> farm_ids;
        std::vector<Eigen::MatrixXd> score_list;
        for (const auto& [farm, sc] : prep.scores) {
            prep.kdes.emplace(farm, latent::kde_fit(farm, sc));
            farm_ids.push_back(farm);
            score_list.push_back(sc);
        }
        prep.links = latent::select_links(farm_ids, score_list,
                                          cfg.dependency_threshold);
    });

    stage("scenarios", timing, [&] {
        RngStream rng(RngStream::substream(cfg.seed, "scenarios"));
        std::map<std::string, Eigen::MatrixXd> draws =
            latent::sample_joint(prep.kdes, prep.links, cfg.mc_size, rng);

        // Column layout must match lhs_latent_design: farms in map order,
        // modes ascending, so design points and scenarios share one space.
        int p_total = 0;
        for (const auto& [farm, basis] : prep.bases) p_total += basis.order();
        prep.scenario_x.resize(cfg.mc_size, p_total);
        int col = 0;
        for (const auto& [farm, basis] : prep.bases) {
            const Eigen::MatrixXd& d = draws.at(farm);
            for (int m = 0; m < basis.order(); ++m, ++col) {
                prep.scenario_x.col(col) = d.col(m);
                prep.farm_of.push_back(farm);
                prep.mode_of.push_back(m);
            }
        }
    });

    if (cfg.with_mc) {
        stage("mc-reference", timing, [&] {
            prep.mc_costs.resize(cfg.mc_size);
            for (int i = 0; i < cfg.mc_size; ++i) {
                auto latent = prep.latent_of_row(prep.scenario_x, i);
                auto windmw =
                    dispatch::wind_injection(prep.curves, prep.bases, latent);
                dispatch::DispatchResult r = dispatch::solve_day(
                    prep.grid, net, windmw, cfg.curtailment);
                ++solver_calls;
                if (r.optimal) {
                    prep.mc_costs[i] = r.cost;
                } else {
                    prep.mc_costs[i] =
                        std::numeric_limits<double>::quiet_NaN();
                    ++prep.mc_infeasible;
                }
            }
            int feasible = cfg.mc_size - prep.mc_infeasible;
            if (feasible < 2)
                throw FitAborted("Monte Carlo reference has fewer than 2 "
                                 "feasible scenarios");
        });
    }

    return prep;
}

FitResult fit_design(const PipelineConfig& cfg, const Prepared& prep,
                     int design_size, long& solver_calls,
                     long& surrogate_evals) {
    dispatch::Network net(prep.grid);
    const std::string tag = "design-" + std::to_string(design_size);
    RngStream rng(RngStream::substream(cfg.seed, tag));

    sampling::LatentDesign design = sampling::lhs_latent_design(
        prep.kdes, prep.links, design_size, rng, cfg.reference_pool);

    FitResult fit;
    fit.train_x = design.x;
    fit.train_y.resize(design_size);

    // One fresh draw replaces an infeasible design point; a second failure
    // marks the row dead. More than 10% dead rows aborts the fit.
    RngStream retry_rng(
        RngStream::substream(cfg.seed, "retry-" + std::to_string(design_size)));
    int dead = 0;
    for (int i = 0; i < design_size; ++i) {
        bool solved = false;
        for (int attempt = 0; attempt < 2 && !solved; ++attempt) {
            if (attempt == 1) {
                // sample_joint returns per-farm blocks; stitch them into
                // the design layout for this row.
                auto draws =
                    latent::sample_joint(prep.kdes, prep.links, 1, retry_rng);
                for (int c = 0; c < prep.total_modes(); ++c)
                    fit.train_x(i, c) =
                        draws.at(prep.farm_of[c])(0, prep.mode_of[c]);
                ++fit.retries;
            }
            auto latent = prep.latent_of_row(fit.train_x, i);
            auto windmw =
                dispatch::wind_injection(prep.curves, prep.bases, latent);
            dispatch::DispatchResult r =
                dispatch::solve_day(prep.grid, net, windmw, cfg.curtailment);
            ++solver_calls;
            if (r.optimal) {
                fit.train_y[i] = r.cost;
                solved = true;
            }
        }
        if (!solved) {
            fit.train_y[i] = std::numeric_limits<double>::quiet_NaN();
            ++dead;
        }
    }
    if (dead > design_size / 10)
        throw FitAborted(std::to_string(dead) + " of " +
                         std::to_string(design_size) +
                         " design points infeasible after retries");
    if (dead > 0) {
        Eigen::MatrixXd x(design_size - dead, prep.total_modes());
        Eigen::VectorXd y(design_size - dead);
        int r = 0;
        for (int i = 0; i < design_size; ++i)
            if (std::isfinite(fit.train_y[i])) {
                x.row(r) = fit.train_x.row(i);
                y[r] = fit.train_y[i];
                ++r;
            }
        fit.train_x = std::move(x);
        fit.train_y = std::move(y);
    }

    gpe::GpeOptions opt;
    opt.seed = RngStream::substream(cfg.seed, "gpe-" + tag);
    fit.model = gpe::GpeModel::fit(fit.train_x, fit.train_y, cfg.basis,
                                   cfg.kernel, opt);

    fit.gp_costs.resize(prep.scenario_x.rows());
    if (cfg.surrogate_passthrough) {
        for (Eigen::Index i = 0; i < prep.scenario_x.rows(); ++i) {
            auto latent = prep.latent_of_row(prep.scenario_x, i);
            auto windmw =
                dispatch::wind_injection(prep.curves, prep.bases, latent);
            dispatch::DispatchResult r =
                dispatch::solve_day(prep.grid, net, windmw, cfg.curtailment);
            ++solver_calls;
            fit.gp_costs[static_cast<std::size_t>(i)] =
                r.optimal ? r.cost : std::numeric_limits<double>::quiet_NaN();
        }
    } else {
        Eigen::VectorXd mean = fit.model->predict_mean(prep.scenario_x);
        surrogate_evals += prep.scenario_x.rows();
        for (Eigen::Index i = 0; i < mean.size(); ++i)
            fit.gp_costs[static_cast<std::size_t>(i)] = mean[i];
    }
    return fit;
}

void replicate_empirical(const PipelineConfig& cfg, const Prepared& prep,
                         const gpe::GpeModel& model, UqReport& report,
                         long& solver_calls, long& surrogate_evals) {
    const int nd = static_cast<int>(prep.common_days.size());
    if (nd == 0) throw InsufficientData("no observed days to replicate");
    dispatch::Network net(prep.grid);

    // Route one: the recorded farm power straight into the solver.
    std::vector<double> q_data;
    q_data.reserve(nd);
    for (int d = 0; d < nd; ++d) {
        std::map<std::string, Eigen::VectorXd> windmw;
        for (const auto& [farm, pw] : prep.power_days)
            windmw[farm] = pw.row(d).transpose();
        dispatch::DispatchResult r =
            dispatch::solve_day(prep.grid, net, windmw, cfg.curtailment);
        ++solver_calls;
        if (!r.optimal)
            throw Infeasible("observed day " + prep.common_days[d] +
                                 " is infeasible",
                             r.infeasible_hour);
        q_data.push_back(r.cost);
    }

    // Route two: each day's speed profile projected to latent coordinates
    // and read back through the surrogate.
    Eigen::MatrixXd xs(nd, prep.total_modes());
    for (const auto& [farm, basis] : prep.bases) {
        Eigen::MatrixXd sc = basis.project_days(prep.speed_days.at(farm));
        for (int c = 0; c < prep.total_modes(); ++c)
            if (prep.farm_of[c] == farm) xs.col(c) = sc.col(prep.mode_of[c]);
    }
    Eigen::VectorXd q_gp = model.predict_mean(xs);
    surrogate_evals += nd;

    report.replication_data = stat_block(q_data);
    report.replication_gp = stat_block(
        std::vector<double>(q_gp.data(), q_gp.data() + q_gp.size()));
    report.replication_rel_diff = relative_difference(
        report.replication_gp.mean, report.replication_data.mean);
}

std::vector<std::pair<int, double>>
convergence_trace(const PipelineConfig& cfg, const Prepared& prep,
                  const std::vector<int>& sizes, long& solver_calls,
                  long& surrogate_evals) {
    if (prep.mc_costs.empty())
        throw InvalidConfig("convergence trace needs a Monte Carlo reference");
    for (std::size_t i = 1; i < sizes.size(); ++i)
        if (sizes[i] <= sizes[i - 1])
            throw InvalidConfig("trace sizes must be strictly increasing");

    std::vector<double> mc = finite_subset(prep.mc_costs, prep.mc_costs);
    double mc_mean = stat_block(mc).mean;

    std::vector<std::pair<int, double>> out;
    for (int n : sizes) {
        FitResult f = fit_design(cfg, prep, n, solver_calls, surrogate_evals);
        std::vector<double> gp = finite_subset(f.gp_costs, prep.mc_costs);
        out.emplace_back(n, relative_difference(stat_block(gp).mean, mc_mean));
    }
    return out;
}

nlohmann::json UqReport::to_json() const {
    nlohmann::json j;
    j["config"] = config_echo;
    j["farms"] = farms;
    j["links"] = links;
    j["surrogate"] = surrogate.to_json();
    j["mc"] = mc ? mc->to_json() : nlohmann::json();
    j["d_r"] = d_r ? nlohmann::json(*d_r) : nlohmann::json();
    j["replication"]["data"] = replication_data.to_json();
    j["replication"]["surrogate"] = replication_gp.to_json();
    j["replication"]["relative_difference"] = replication_rel_diff;
    j["counts"]["solver_calls"] = solver_calls;
    j["counts"]["surrogate_evals"] = surrogate_evals;
    j["counts"]["train_retries"] = train_retries;
    j["counts"]["mc_infeasible"] = mc_infeasible;
    j["trace"] = nlohmann::json::array();
    for (const auto& [n, dr] : trace)
        j["trace"].push_back(nlohmann::json::array({n, dr}));
    return j;
}

nlohmann::json RunTiming::to_json() const {
    nlohmann::json j;
    j["stage_ms"] = nlohmann::json::array();
    for (const auto& [name, ms] : stage_ms) {
        nlohmann::json e;
        e["stage"] = name;
        e["ms"] = ms;
        j["stage_ms"].push_back(std::move(e));
    }
    return j;
}

PipelineArtifacts run(const PipelineConfig& cfg,
                      const std::vector<std::string>& wind_csvs,
                      const std::string& case_path) {
    PipelineArtifacts art;
    long solver_calls = 0;
    long surrogate_evals = 0;

    art.prepared =
        prepare(cfg, wind_csvs, case_path, solver_calls, &art.timing);
    const Prepared& prep = art.prepared;

    FitResult fit = stage("train", &art.timing, [&] {
        return fit_design(cfg, prep, cfg.train_size, solver_calls,
                          surrogate_evals);
    });

    UqReport& rep = art.report;
    rep.train_retries = fit.retries;
    rep.mc_infeasible = prep.mc_infeasible;

    stage("propagate", &art.timing, [&] {
        if (cfg.with_mc) {
            // Statistics compare the two routes on the common feasible
            // scenarios; dropping a scenario from one side only would
            // bias the comparison.
            std::vector<double> gp = finite_subset(fit.gp_costs, prep.mc_costs);
            std::vector<double> mc =
                finite_subset(prep.mc_costs, prep.mc_costs);
            rep.surrogate = stat_block(gp);
            rep.mc = stat_block(mc);
            rep.d_r = relative_difference(rep.surrogate.mean, rep.mc->mean);
        } else {
            rep.surrogate = stat_block(fit.gp_costs);
        }
    });

    stage("replicate", &art.timing, [&] {
        replicate_empirical(cfg, prep, *fit.model, rep, solver_calls,
                            surrogate_evals);
    });

    if (!cfg.trace_sizes.empty()) {
        stage("trace", &art.timing, [&] {
            rep.trace = convergence_trace(cfg, prep, cfg.trace_sizes,
                                          solver_calls, surrogate_evals);
        });
    }

    rep.solver_calls = solver_calls;
    rep.surrogate_evals = surrogate_evals;

    nlohmann::json echo;
    echo["variance_target"] = cfg.variance_target;
    echo["train_size"] = cfg.train_size;
    echo["mc_size"] = cfg.mc_size;
    echo["basis"] = gpe::basis_name(cfg.basis);
    echo["kernel"] = gpe::kernel_name(cfg.kernel);
    echo["dependency_threshold"] = cfg.dependency_threshold;
    echo["seed"] = cfg.seed;
    echo["curtailment"] = cfg.curtailment;
    echo["with_mc"] = cfg.with_mc;
    echo["reference_pool"] = cfg.reference_pool;
    echo["surrogate_passthrough"] = cfg.surrogate_passthrough;
    rep.config_echo = std::move(echo);

    rep.farms = nlohmann::json::object();
    for (const auto& [farm, basis] : prep.bases) {
        nlohmann::json f;
        f["kle_order"] = basis.order();
        f["captured_fraction"] = basis.captured_fraction();
        f["days"] = static_cast<int>(prep.common_days.size());
        rep.farms[farm] = std::move(f);
    }
    rep.links = nlohmann::json::array();
    for (const latent::DependencyLink& l : prep.links)
        rep.links.push_back(l.to_json());

    art.scenario_costs_gp = std::move(fit.gp_costs);
    art.emulator = std::move(fit.model);
    return art;
}

} // namespace seduq::pipeline

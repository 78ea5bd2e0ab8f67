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

// Exit codes: 0 success, 2 input error, 3 fit aborted, 4 infeasible case.
// Everything meant for humans goes to stderr; files and stdout carry only
// machine-readable artifacts.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "seduq/cli_config.hpp"
#include "seduq/common.hpp"
#include "seduq/pipeline.hpp"
#include "seduq/synthetic.hpp"
#include "seduq/validate.hpp"
#include "seduq/wind_data.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitFitAborted = 3;
constexpr int kExitInfeasible = 4;

void write_text(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw seduq::InvalidInput("cannot write " + path.string());
    os << content;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
    write_text(path, j.dump(2) + "\n");
}

/// Shortest round-trip decimal form, so re-runs produce identical bytes.
std::string fmt_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, p);
}

int cmd_preprocess(const std::vector<std::string>& wind,
                   const std::string& out, int max_depth, int min_leaf) {
    std::vector<seduq::wind::WindFieldRecord> records;
    for (const std::string& path : wind) {
        auto part = seduq::wind::ingest_csv(path);
        records.insert(records.end(), part.begin(), part.end());
    }
    auto by_farm = seduq::wind::group_by_farm(records);
    for (const auto& [farm, recs] : by_farm) {
        seduq::wind::HourlyAverages avg = seduq::wind::hourly_farm_average(recs);
        std::vector<double> s(avg.speed.values.data(),
                              avg.speed.values.data() + avg.speed.values.size());
        std::vector<double> p(avg.power.values.data(),
                              avg.power.values.data() + avg.power.values.size());
        seduq::wind::PowerCurveTree tree =
            seduq::wind::fit_power_curve(s, p, max_depth, min_leaf);

        nlohmann::json j;
        j["farm_id"] = farm;
        j["speed"] = avg.speed.to_json();
        j["power"] = avg.power.to_json();
        j["dropped_days"] = avg.dropped_days;
        j["power_curve"] = tree.to_json();
        fs::path file = fs::path(out) / "artifacts" / ("wind_" + farm + ".json");
        write_json(file, j);
        std::fprintf(stderr, "[preprocess] %s: %ld days, %d leaves -> %s\n",
                     farm.c_str(), static_cast<long>(avg.speed.values.rows()),
                     tree.leaf_count(), file.string().c_str());
    }
    return kExitOk;
}

int cmd_run(seduq::cli::CliConfig cfg) {
    seduq::pipeline::PipelineArtifacts art =
        seduq::pipeline::run(cfg.pipe, cfg.wind_paths, cfg.case_path);
    const seduq::pipeline::UqReport& rep = art.report;

    fs::path out(cfg.out_dir);
    write_json(out / "reports" / "report.json", rep.to_json());
    // Wall-clock numbers live in a sidecar so report.json stays
    // byte-identical across reruns with the same seeds.
    write_json(out / "reports" / "timing.json", art.timing.to_json());

    {
        std::string csv = "scenario,q_gp";
        bool with_mc = !art.prepared.mc_costs.empty();
        if (with_mc) csv += ",q_mc";
        csv += "\n";
        for (std::size_t i = 0; i < art.scenario_costs_gp.size(); ++i) {
            csv += std::to_string(i);
            csv += ',';
            csv += fmt_double(art.scenario_costs_gp[i]);
            if (with_mc) {
                csv += ',';
                csv += fmt_double(art.prepared.mc_costs[i]);
            }
            csv += '\n';
        }
        write_text(out / "reports" / "costs.csv", csv);
    }

    if (!rep.trace.empty()) {
        std::string csv = "n,d_r\n";
        for (const auto& [n, dr] : rep.trace) {
            csv += std::to_string(n);
            csv += ',';
            csv += fmt_double(dr);
            csv += '\n';
        }
        write_text(out / "traces" / "trace.csv", csv);
    }

    {
        nlohmann::json model;
        model["emulator"] = art.emulator->to_json();
        model["links"] = rep.links;
        nlohmann::json bases = nlohmann::json::object();
        nlohmann::json curves = nlohmann::json::object();
        for (const auto& [farm, b] : art.prepared.bases)
            bases[farm] = b.to_json();
        for (const auto& [farm, t] : art.prepared.curves)
            curves[farm] = t.to_json();
        model["kle_bases"] = std::move(bases);
        model["power_curves"] = std::move(curves);
        write_json(out / "artifacts" / "model.json", model);
    }

    std::fprintf(stderr, "[run] surrogate mean %s, sd %s, 95%% CI [%s, %s]\n",
                 fmt_double(rep.surrogate.mean).c_str(),
                 fmt_double(rep.surrogate.stddev).c_str(),
                 fmt_double(rep.surrogate.ci_lower).c_str(),
                 fmt_double(rep.surrogate.ci_upper).c_str());
    if (rep.d_r)
        std::fprintf(stderr, "[run] d_r vs Monte Carlo reference: %s\n",
                     fmt_double(*rep.d_r).c_str());
    std::fprintf(stderr,
                 "[run] replication: data mean %s, surrogate mean %s "
                 "(rel diff %s)\n",
                 fmt_double(rep.replication_data.mean).c_str(),
                 fmt_double(rep.replication_gp.mean).c_str(),
                 fmt_double(rep.replication_rel_diff).c_str());
    std::fprintf(stderr, "[run] wrote %s\n",
                 (out / "reports" / "report.json").string().c_str());
    return kExitOk;
}

int cmd_validate(std::uint64_t seed, const std::string& fault) {
    bool all = true;
    for (const seduq::validate::CheckResult& r :
         seduq::validate::run_all(seed, fault)) {
        std::fprintf(stderr, "%-20s %s  metric %.3e (threshold %.3e)  %s\n",
                     r.name.c_str(), r.pass ? "pass" : "FAIL", r.metric,
                     r.threshold, r.detail.c_str());
        all = all && r.pass;
    }
    return all ? kExitOk : kExitInput;
}

int cmd_gen_fixture(std::uint64_t seed, const std::string& out) {
    auto data = seduq::wind::make_fixture(seed);
    auto paths = seduq::wind::write_fixture_csv(data, out);
    for (const auto& p : paths)
        std::fprintf(stderr, "[gen-fixture] wrote %s\n", p.string().c_str());
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wind-dispatch cost uncertainty via a Gaussian-process "
                 "surrogate over reduced wind-field coordinates"};
    app.require_subcommand(1);

    // preprocess
    auto* pre = app.add_subcommand(
        "preprocess", "Average raw turbine CSVs and fit farm power curves");
    std::vector<std::string> pre_wind;
    std::string pre_out = "out";
    int pre_depth = 6, pre_leaf = 5;
    pre->add_option("--wind", pre_wind, "wind CSV file(s)")
        ->required()
        ->check(CLI::ExistingFile);
    pre->add_option("--out", pre_out, "output directory");
    pre->add_option("--max-depth", pre_depth, "power-curve tree depth cap")
        ->check(CLI::PositiveNumber);
    pre->add_option("--min-leaf", pre_leaf, "minimum samples per leaf")
        ->check(CLI::PositiveNumber);

    // run
    auto* run = app.add_subcommand(
        "run", "Full study: reduce, fit the surrogate, propagate, report");
    std::string run_config;
    int run_train = 0, run_mc = 0, run_jobs = 0;
    std::uint64_t run_seed = 0;
    bool run_with_mc = false, run_no_mc = false, run_passthrough = false;
    std::string run_trace, run_out;
    run->add_option("--config", run_config, "config file")
        ->required()
        ->check(CLI::ExistingFile);
    run->add_option("--train-size", run_train, "LHS design size override");
    run->add_option("--mc-size", run_mc, "scenario count override");
    run->add_option("--seed", run_seed, "seed override");
    run->add_flag("--with-mc", run_with_mc,
                  "force the Monte Carlo reference on");
    run->add_flag("--no-mc", run_no_mc, "skip the Monte Carlo reference");
    run->add_flag("--passthrough", run_passthrough,
                  "debug: answer surrogate queries with the real solver");
    run->add_option("--trace", run_trace,
                    "comma-separated design sizes for a convergence trace");
    run->add_option("--out", run_out, "output directory override");
    run->add_option("--jobs", run_jobs,
                    "worker cap for scenario stages (runs are reduced in "
                    "scenario order, so results do not depend on it)");

    // validate
    auto* val = app.add_subcommand(
        "validate", "Run the oracle suites and report pass/fail");
    std::uint64_t val_seed = 7;
    std::string val_fault;
    val->add_option("--seed", val_seed, "seed for randomized oracle checks");
    val->add_option("--fault", val_fault,
                    "test hook: plant a perturbation in one module "
                    "(gpe, qp, dispatch, kde) to prove detection")
        ->check(CLI::IsMember({"gpe", "qp", "dispatch", "kde"}));

    // gen-fixture
    auto* gen = app.add_subcommand(
        "gen-fixture", "Write the bundled synthetic wind CSVs");
    std::uint64_t gen_seed = 1;
    std::string gen_out = "data";
    gen->add_option("--seed", gen_seed, "fixture seed");
    gen->add_option("--out", gen_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // CLI11 prints its own message; --help lands here with exit 0.
        return app.exit(e) == 0 ? kExitOk : kExitInput;
    }

    try {
        if (pre->parsed())
            return cmd_preprocess(pre_wind, pre_out, pre_depth, pre_leaf);
        if (run->parsed()) {
            seduq::cli::CliConfig cfg = seduq::cli::load_config(run_config);
            auto log_override = [](const char* flag, const std::string& from,
                                   const std::string& to) {
                std::fprintf(stderr, "[config] %s overrides %s -> %s\n", flag,
                             from.c_str(), to.c_str());
            };
            if (run->count("--train-size")) {
                log_override("--train-size",
                             std::to_string(cfg.pipe.train_size),
                             std::to_string(run_train));
                cfg.pipe.train_size = run_train;
            }
            if (run->count("--mc-size")) {
                log_override("--mc-size", std::to_string(cfg.pipe.mc_size),
                             std::to_string(run_mc));
                cfg.pipe.mc_size = run_mc;
            }
            if (run->count("--seed")) {
                log_override("--seed", std::to_string(cfg.pipe.seed),
                             std::to_string(run_seed));
                cfg.pipe.seed = run_seed;
            }
            if (run_with_mc && run_no_mc)
                throw seduq::InvalidConfig(
                    "--with-mc and --no-mc are mutually exclusive");
            if (run_with_mc) cfg.pipe.with_mc = true;
            if (run_no_mc) cfg.pipe.with_mc = false;
            if (run_passthrough) cfg.pipe.surrogate_passthrough = true;
            if (run->count("--trace")) {
                cfg.pipe.trace_sizes.clear();
                std::string tok;
                std::istringstream ts(run_trace);
                while (std::getline(ts, tok, ','))
                    cfg.pipe.trace_sizes.push_back(std::stoi(tok));
            }
            if (run->count("--out")) cfg.out_dir = run_out;
            if (run->count("--jobs") && run_jobs < 1)
                throw seduq::InvalidConfig("--jobs must be positive");
            return cmd_run(std::move(cfg));
        }
        if (val->parsed()) return cmd_validate(val_seed, val_fault);
        if (gen->parsed()) return cmd_gen_fixture(gen_seed, gen_out);
    } catch (const seduq::FitAborted& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitFitAborted;
    } catch (const seduq::FitFailed& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitFitAborted;
    } catch (const seduq::Infeasible& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInfeasible;
    } catch (const seduq::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    }
    return kExitOk;
}

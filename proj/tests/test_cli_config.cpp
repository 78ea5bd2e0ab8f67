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

#include <filesystem>
#include <fstream>
#include <string>

#include "seduq/cli_config.hpp"
#include "seduq/common.hpp"

using namespace seduq;
using namespace seduq::cli;

namespace fs = std::filesystem;

TEST_SUITE("cli_config") {

TEST_CASE("a complete config populates every field") {
    std::string text = R"(# run configuration
[paths]
wind = ["a.csv", "b.csv"]
case = "grid.json"
out = "results"

[kle]
variance_target = 0.9

[latent]
dependency_threshold = 0.6

[sampling]
reference_pool = 5000

[gpe]
basis = "linear"
kernel = "matern32"

[pipeline]
train_size = 60
mc_size = 4000
seed = 11
with_mc = false
curtailment = true
surrogate_passthrough = true
trace = [20, 40, 60]
)";
    CliConfig cfg = parse_config_text(text);
    REQUIRE(cfg.wind_paths.size() == 2);
    CHECK(cfg.wind_paths[0] == "a.csv");
    CHECK(cfg.wind_paths[1] == "b.csv");
    CHECK(cfg.case_path == "grid.json");
    CHECK(cfg.out_dir == "results");
    CHECK(cfg.pipe.variance_target == 0.9);
    CHECK(cfg.pipe.dependency_threshold == 0.6);
    CHECK(cfg.pipe.reference_pool == 5000);
    CHECK(cfg.pipe.basis == gpe::MeanBasis::Linear);
    CHECK(cfg.pipe.kernel == gpe::KernelKind::Matern32);
    CHECK(cfg.pipe.train_size == 60);
    CHECK(cfg.pipe.mc_size == 4000);
    CHECK(cfg.pipe.seed == 11);
    CHECK(!cfg.pipe.with_mc);
    CHECK(cfg.pipe.curtailment);
    CHECK(cfg.pipe.surrogate_passthrough);
    REQUIRE(cfg.pipe.trace_sizes.size() == 3);
    CHECK(cfg.pipe.trace_sizes[1] == 40);
}

TEST_CASE("empty text keeps the documented defaults") {
    CliConfig cfg = parse_config_text("");
    CHECK(cfg.wind_paths.empty());
    CHECK(cfg.case_path.empty());
    CHECK(cfg.out_dir == "out");
    CHECK(cfg.pipe.train_size == 100);
    CHECK(cfg.pipe.mc_size == 8000);
    CHECK(cfg.pipe.variance_target == 0.95);
    CHECK(cfg.pipe.dependency_threshold == 0.5);
    CHECK(cfg.pipe.basis == gpe::MeanBasis::PureQuadratic);
    CHECK(cfg.pipe.kernel == gpe::KernelKind::SquaredExponential);
    CHECK(cfg.pipe.seed == 1);
    CHECK(cfg.pipe.with_mc);
    CHECK(!cfg.pipe.curtailment);
    CHECK(cfg.pipe.trace_sizes.empty());
}

TEST_CASE("unknown keys and sections are rejected with location info") {
    try {
        parse_config_text("[pipeline]\nworkers = 4\n");
        FAIL("expected InvalidConfig");
    } catch (const InvalidConfig& e) {
        std::string msg = e.what();
        CHECK(msg.find("pipeline.workers") != std::string::npos);
        CHECK(msg.find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config_text("[mystery]\n"), InvalidConfig);
    CHECK_THROWS_AS(parse_config_text("stray = 1\n"), InvalidConfig);
}

TEST_CASE("malformed values carry the 1-based line number") {
    try {
        parse_config_text("[pipeline]\n\ntrain_size = sixty\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(parse_config_text("[pipeline]\ntrain_size 60\n"),
                    ParseError);
    CHECK_THROWS_AS(parse_config_text("[paths]\ncase = \"open\n"), ParseError);
    CHECK_THROWS_AS(parse_config_text("[pipeline]\ntrace = [20, 40\n"),
                    ParseError);
    CHECK_THROWS_AS(parse_config_text("[kle\n"), ParseError);
    CHECK_THROWS_AS(parse_config_text("[pipeline]\n= 3\n"), ParseError);
}

TEST_CASE("type mismatches are parse errors, not silent coercions") {
    CHECK_THROWS_AS(parse_config_text("[pipeline]\nwith_mc = 1\n"),
                    ParseError);
    CHECK_THROWS_AS(parse_config_text("[pipeline]\ntrain_size = 60.5\n"),
                    ParseError);
    CHECK_THROWS_AS(parse_config_text("[paths]\ncase = grid.json\n"),
                    ParseError);
    CHECK_THROWS_AS(parse_config_text("[gpe]\nbasis = \"cubic\"\n"),
                    InvalidConfig);
}

TEST_CASE("comments and quoted hash marks are handled") {
    std::string text =
        "[paths] # section\n"
        "case = \"dir#1/grid.json\" # a '#' inside quotes is literal\n"
        "out = \"o\"\n";
    CliConfig cfg = parse_config_text(text);
    CHECK(cfg.case_path == "dir#1/grid.json");
    CHECK(cfg.out_dir == "o");
}

TEST_CASE("integer values are accepted where floats are expected") {
    CliConfig cfg = parse_config_text("[kle]\nvariance_target = 1\n");
    CHECK(cfg.pipe.variance_target == 1.0);
}

TEST_CASE("load_config verifies the referenced paths") {
    fs::path dir = fs::temp_directory_path() / "seduq_cfg_test";
    fs::create_directories(dir);
    std::string root(SEDUQ_SOURCE_DIR);

    SUBCASE("missing config file") {
        CHECK_THROWS_AS(load_config((dir / "nope.conf").string()),
                        InvalidInput);
    }
    SUBCASE("missing wind file is named in the error") {
        fs::path p = dir / "bad_wind.conf";
        std::ofstream(p) << "[paths]\nwind = [\"" << (dir / "ghost.csv").string()
                         << "\"]\ncase = \"" << root
                         << "/cases/case5.json\"\n";
        try {
            load_config(p.string());
            FAIL("expected InvalidInput");
        } catch (const InvalidInput& e) {
            CHECK(std::string(e.what()).find("ghost.csv") !=
                  std::string::npos);
        }
    }
    SUBCASE("config without wind files is incomplete") {
        fs::path p = dir / "no_wind.conf";
        std::ofstream(p) << "[paths]\ncase = \"" << root
                         << "/cases/case5.json\"\n";
        CHECK_THROWS_AS(load_config(p.string()), InvalidConfig);
    }
    SUBCASE("existing fixture paths load cleanly") {
        fs::path p = dir / "good.conf";
        std::ofstream(p) << "[paths]\nwind = [\"" << root
                         << "/data/wind_farm_a.csv\"]\ncase = \"" << root
                         << "/cases/case5.json\"\n";
        CliConfig cfg = load_config(p.string());
        CHECK(cfg.wind_paths.size() == 1);
    }
    fs::remove_all(dir);
}

} // TEST_SUITE

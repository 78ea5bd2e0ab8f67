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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "seduq/common.hpp"
#include "seduq/wind_data.hpp"

using namespace seduq;
using namespace seduq::wind;

namespace {

std::filesystem::path write_tmp(const std::string& name,
                                const std::string& body) {
    auto p = std::filesystem::temp_directory_path() / name;
    std::ofstream os(p);
    os << body;
    return p;
}

WindFieldRecord rec(const std::string& day, int hour, const std::string& farm,
                    const std::string& turbine, double speed, double power) {
    WindFieldRecord r;
    r.timestamp = day + "T" + (hour < 10 ? "0" : "") + std::to_string(hour) +
                  ":00:00";
    r.day = day;
    r.hour = hour;
    r.farm_id = farm;
    r.turbine_id = turbine;
    r.speed_mps = speed;
    r.power_mw = power;
    return r;
}

} // namespace

TEST_SUITE("wind_data") {

TEST_CASE("well formed csv parses every row") {
    auto p = write_tmp("wd_ok.csv",
                       "timestamp,farm_id,turbine_id,speed_mps,power_mw\n"
                       "2024-01-01T00:10:00,f1,t1,5.0,10.0\n"
                       "2024-01-01T01:10:00,f1,t1,6.0,12.0\n"
                       "2024-01-01T02:10:00,f1,t2,7.5,15.5\n");
    auto records = ingest_csv(p);
    REQUIRE(records.size() == 3);
    CHECK(records[0].farm_id == "f1");
    CHECK(records[0].hour == 1);
    CHECK(records[2].speed_mps == doctest::Approx(7.5));
    CHECK(records[2].day == "2024-01-01");
}

TEST_CASE("columns may come in any order") {
    auto p = write_tmp("wd_reorder.csv",
                       "power_mw,speed_mps,turbine_id,farm_id,timestamp\n"
                       "10.0,5.0,t1,f1,2024-01-01T00:10:00\n");
    auto records = ingest_csv(p);
    REQUIRE(records.size() == 1);
    CHECK(records[0].power_mw == doctest::Approx(10.0));
    CHECK(records[0].speed_mps == doctest::Approx(5.0));
}

TEST_CASE("negative speed is a parse error carrying its line") {
    auto p = write_tmp("wd_neg.csv",
                       "timestamp,farm_id,turbine_id,speed_mps,power_mw\n"
                       "2024-01-01T00:10:00,f1,t1,5.0,10.0\n"
                       "2024-01-01T01:10:00,f1,t1,-2.0,10.0\n");
    try {
        ingest_csv(p);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("unparseable number is a parse error carrying its line") {
    auto p = write_tmp("wd_bad.csv",
                       "timestamp,farm_id,turbine_id,speed_mps,power_mw\n"
                       "2024-01-01T00:10:00,f1,t1,abc,10.0\n");
    try {
        ingest_csv(p);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("missing and extra columns are schema errors") {
    auto missing = write_tmp("wd_missing.csv",
                             "timestamp,farm_id,turbine_id,speed_mps\n"
                             "2024-01-01T00:10:00,f1,t1,5.0\n");
    CHECK_THROWS_AS(ingest_csv(missing), SchemaError);

    auto extra = write_tmp(
        "wd_extra.csv",
        "timestamp,farm_id,turbine_id,speed_mps,power_mw,notes\n"
        "2024-01-01T00:10:00,f1,t1,5.0,10.0,x\n");
    CHECK_THROWS_AS(ingest_csv(extra), SchemaError);
}

TEST_CASE("missing file") {
    CHECK_THROWS_AS(ingest_csv("/nonexistent/wind.csv"), InvalidInput);
}

TEST_CASE("bundled fixture file has the expected record count") {
    auto records =
        ingest_csv(std::string(SEDUQ_SOURCE_DIR) + "/data/wind_farm_a.csv");
    CHECK(records.size() == 93u * 24u * 3u);
}

TEST_CASE("hourly average of one constant turbine-day") {
    std::vector<WindFieldRecord> rs;
    for (int h = 1; h <= 24; ++h)
        rs.push_back(rec("2024-01-01", h, "f1", "t1", 5.0, 2.5));
    HourlyAverages avg = hourly_farm_average(rs);
    REQUIRE(avg.speed.values.rows() == 1);
    REQUIRE(avg.speed.values.cols() == 24);
    for (int h = 0; h < 24; ++h) {
        CHECK(avg.speed.values(0, h) == doctest::Approx(5.0));
        CHECK(avg.power.values(0, h) == doctest::Approx(2.5));
    }
    CHECK(avg.dropped_days.empty());
}

TEST_CASE("two turbines average to the midpoint") {
    std::vector<WindFieldRecord> rs;
    for (int h = 1; h <= 24; ++h) {
        rs.push_back(rec("2024-01-01", h, "f1", "t1", 4.0, 8.0));
        rs.push_back(rec("2024-01-01", h, "f1", "t2", 6.0, 12.0));
    }
    HourlyAverages avg = hourly_farm_average(rs);
    for (int h = 0; h < 24; ++h) {
        CHECK(avg.speed.values(0, h) == doctest::Approx(5.0));
        CHECK(avg.power.values(0, h) == doctest::Approx(10.0));
    }
}

TEST_CASE("a day with an empty hour is dropped and reported") {
    std::vector<WindFieldRecord> rs;
    for (int h = 1; h <= 24; ++h)
        rs.push_back(rec("2024-01-01", h, "f1", "t1", 5.0, 2.0));
    for (int h = 1; h <= 24; ++h)
        if (h != 7) rs.push_back(rec("2024-01-02", h, "f1", "t1", 6.0, 3.0));
    HourlyAverages avg = hourly_farm_average(rs);
    REQUIRE(avg.speed.values.rows() == 1);
    CHECK(avg.speed.days == std::vector<std::string>{"2024-01-01"});
    REQUIRE(avg.dropped_days.size() == 1);
    CHECK(avg.dropped_days[0] == "2024-01-02");
}

TEST_CASE("zero complete days is insufficient data") {
    std::vector<WindFieldRecord> rs{rec("2024-01-01", 1, "f1", "t1", 5, 2)};
    CHECK_THROWS_AS(hourly_farm_average(rs), InsufficientData);
}

TEST_CASE("averaging ignores record order") {
    std::vector<WindFieldRecord> rs;
    for (int d = 1; d <= 3; ++d)
        for (int h = 1; h <= 24; ++h)
            for (int t = 1; t <= 2; ++t)
                rs.push_back(rec("2024-01-0" + std::to_string(d), h, "f1",
                                 "t" + std::to_string(t), d + 0.1 * h + t,
                                 d * h * t * 0.01));
    HourlyAverages base = hourly_farm_average(rs);
    std::mt19937 shuffler(99);
    std::shuffle(rs.begin(), rs.end(), shuffler);
    HourlyAverages mixed = hourly_farm_average(rs);
    CHECK(base.speed.days == mixed.speed.days);
    CHECK((base.speed.values - mixed.speed.values).cwiseAbs().maxCoeff() <=
          1e-12);
    CHECK((base.power.values - mixed.power.values).cwiseAbs().maxCoeff() <=
          1e-12);
}

TEST_CASE("mixed farms are rejected") {
    std::vector<WindFieldRecord> rs;
    for (int h = 1; h <= 24; ++h) {
        rs.push_back(rec("2024-01-01", h, "f1", "t1", 5, 2));
        rs.push_back(rec("2024-01-01", h, "f2", "t1", 5, 2));
    }
    CHECK_THROWS_AS(hourly_farm_average(rs), InvalidInput);
}

TEST_CASE("perfectly separable points split once") {
    std::vector<double> speed{1.0, 2.0, 8.0, 9.0};
    std::vector<double> power{0.0, 0.0, 10.0, 10.0};
    PowerCurveTree tree = fit_power_curve(speed, power, 1, 1);
    CHECK(tree.leaf_count() == 2);
    CHECK(tree.predict(1.5) == doctest::Approx(0.0));
    CHECK(tree.predict(8.5) == doctest::Approx(10.0));
}

TEST_CASE("constant target yields a single leaf") {
    std::vector<double> speed{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<double> power(10, 4.0);
    PowerCurveTree tree = fit_power_curve(speed, power, 6, 1);
    CHECK(tree.leaf_count() == 1);
    CHECK(tree.predict(3.3) == doctest::Approx(4.0));
}

TEST_CASE("depth-6 tree beats the best single split on a logistic curve") {
    std::vector<double> speed, power;
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> us(0.0, 20.0);
    std::normal_distribution<double> noise(0.0, 0.3);
    for (int i = 0; i < 200; ++i) {
        double s = us(gen);
        speed.push_back(s);
        power.push_back(10.0 / (1.0 + std::exp(-(s - 9.0))) + noise(gen));
    }
    PowerCurveTree tree = fit_power_curve(speed, power, 6, 5);

    auto sse_of = [&](const PowerCurveTree& t) {
        double sse = 0;
        for (std::size_t i = 0; i < speed.size(); ++i) {
            double e = t.predict(speed[i]) - power[i];
            sse += e * e;
        }
        return sse;
    };

    // exhaustive one-split oracle: every midpoint of consecutive sorted
    // speeds, two-leaf means, direct SSE
    std::vector<std::size_t> order(speed.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](auto a, auto b) { return speed[a] < speed[b]; });
    double best = std::numeric_limits<double>::max();
    for (std::size_t k = 1; k < order.size(); ++k) {
        double thr = 0.5 * (speed[order[k - 1]] + speed[order[k]]);
        double sl = 0, sr = 0;
        int nl = 0, nr = 0;
        for (std::size_t i = 0; i < speed.size(); ++i)
            (speed[i] < thr ? (sl += power[i], ++nl) : (sr += power[i], ++nr));
        if (nl == 0 || nr == 0) continue;
        double ml = sl / nl, mr = sr / nr;
        double sse = 0;
        for (std::size_t i = 0; i < speed.size(); ++i) {
            double e = power[i] - (speed[i] < thr ? ml : mr);
            sse += e * e;
        }
        best = std::min(best, sse);
    }
    CHECK(sse_of(tree) <= best + 1e-9);
}

TEST_CASE("training SSE never increases with depth") {
    std::vector<double> speed, power;
    std::mt19937 gen(13);
    std::uniform_real_distribution<double> us(0.0, 15.0);
    for (int i = 0; i < 120; ++i) {
        double s = us(gen);
        speed.push_back(s);
        power.push_back(s * s * 0.05 + std::sin(s));
    }
    double prev = std::numeric_limits<double>::max();
    for (int depth = 1; depth <= 5; ++depth) {
        PowerCurveTree tree = fit_power_curve(speed, power, depth, 2);
        double sse = 0;
        for (std::size_t i = 0; i < speed.size(); ++i) {
            double e = tree.predict(speed[i]) - power[i];
            sse += e * e;
        }
        CHECK(sse <= prev + 1e-9);
        prev = sse;
    }
}

TEST_CASE("predictions are a bounded step function") {
    std::vector<double> speed, power;
    std::mt19937 gen(17);
    std::uniform_real_distribution<double> us(0.0, 12.0);
    for (int i = 0; i < 90; ++i) {
        double s = us(gen);
        speed.push_back(s);
        power.push_back(std::max(0.0, s - 3.0));
    }
    PowerCurveTree tree = fit_power_curve(speed, power, 4, 3);
    int distinct = 0;
    double prev = std::nan("");
    double lo = 1e300, hi = -1e300;
    for (double s = -5.0; s <= 20.0; s += 0.01) {
        double v = tree.predict(s);
        CHECK(v >= 0.0);
        CHECK(v <= tree.max_power());
        if (v != prev) ++distinct;
        prev = v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(distinct <= tree.leaf_count());
    CHECK(predict_power(tree, 6.0) == tree.predict(6.0));
}

TEST_CASE("length mismatch is invalid input") {
    std::vector<double> a{1, 2, 3}, b{1, 2};
    CHECK_THROWS_AS(fit_power_curve(a, b, 3, 1), InvalidInput);
}

TEST_CASE("power curve json round trip") {
    std::vector<double> speed{1, 2, 3, 4, 8, 9, 10, 11};
    std::vector<double> power{0, 0, 1, 1, 9, 9, 10, 10};
    PowerCurveTree tree = fit_power_curve(speed, power, 3, 1);
    PowerCurveTree back = PowerCurveTree::from_json(tree.to_json());
    for (double s = 0.0; s <= 12.0; s += 0.25)
        CHECK(back.predict(s) == tree.predict(s));
}

} // TEST_SUITE

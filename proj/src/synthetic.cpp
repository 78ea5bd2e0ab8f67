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

#include "seduq/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "seduq/common.hpp"
#include "seduq/rng.hpp"

namespace seduq::wind {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string day_string(int day_index) {
    // Three consecutive Januaries, 31 days each.
    int year = 2004 + day_index / 31;
    int dom = day_index % 31 + 1;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-01-%02d", year, dom);
    return buf;
}

} // namespace

SyntheticConfig default_fixture_config() {
    SyntheticConfig cfg;
    SyntheticFarm a;
    a.farm_id = "farm_a";
    a.base_speed = 8.2;
    a.diurnal_amp = 2.1;
    a.phase_hours = 5.0;
    a.amp_jitter_sd = 0.5;
    a.daily_offset_sd = 1.5;
    a.rated_power_mw = 45.0;
    a.half_power_mps = 8.8;

    SyntheticFarm b;
    b.farm_id = "farm_b";
    b.base_speed = 8.8;
    b.diurnal_amp = 1.8;
    b.phase_hours = 7.0;
    b.amp_jitter_sd = 0.6;
    b.second_amp_sd = 0.4;  // gives this farm one extra retained mode
    b.daily_offset_sd = 1.3;
    b.rated_power_mw = 55.0;
    b.half_power_mps = 9.2;
    b.curve_steepness = 0.8;

    SyntheticFarm c;
    c.farm_id = "farm_c";
    c.base_speed = 8.5;
    c.diurnal_amp = 2.0;
    c.phase_hours = 6.5;
    c.amp_jitter_sd = 0.5;
    c.daily_offset_sd = 1.4;
    c.rated_power_mw = 50.0;
    c.half_power_mps = 9.0;

    cfg.farms = {a, b, c};
    return cfg;
}

double synthetic_power_curve(const SyntheticFarm& farm, double speed_mps) {
    if (speed_mps < farm.cut_in_mps) return 0.0;
    double z = farm.curve_steepness * (speed_mps - farm.half_power_mps);
    return farm.rated_power_mw / (1.0 + std::exp(-z));
}

std::map<std::string, std::vector<WindFieldRecord>>
make_fixture(std::uint64_t seed, const SyntheticConfig& config) {
    if (config.days < 1 || config.turbines < 1 || config.farms.empty())
        throw InvalidInput("make_fixture: empty configuration");

    RngStream rng(RngStream::substream(seed, "synthetic-wind"));
    const int nf = static_cast<int>(config.farms.size());

    // Day-level draws first so the third farm can share the second farm's
    // offset innovation regardless of record order.
    struct DayDraw {
        double amp, second, offset;
    };
    std::vector<std::vector<DayDraw>> day_draws(config.days,
                                                std::vector<DayDraw>(nf));
    for (int d = 0; d < config.days; ++d) {
        std::vector<double> zoff(nf);
        for (int f = 0; f < nf; ++f) {
            day_draws[d][f].amp = rng.normal();
            day_draws[d][f].second = rng.normal();
            zoff[f] = rng.normal();
        }
        for (int f = 0; f < nf; ++f) {
            double z = zoff[f];
            if (f == 2 && nf >= 3) {
                double rho = config.pair_offset_corr;
                z = rho * zoff[1] + std::sqrt(std::max(0.0, 1.0 - rho * rho)) * zoff[f];
            }
            day_draws[d][f].offset = config.farms[f].daily_offset_sd * z;
        }
    }

    std::map<std::string, std::vector<WindFieldRecord>> out;
    for (int f = 0; f < nf; ++f) {
        const SyntheticFarm& farm = config.farms[f];
        std::vector<WindFieldRecord>& recs = out[farm.farm_id];
        recs.reserve(static_cast<std::size_t>(config.days) * kHoursPerDay *
                     config.turbines);
        double ar_sd0 = farm.ar_noise_sd /
                        std::sqrt(std::max(1e-12, 1.0 - farm.ar_coeff * farm.ar_coeff));
        for (int d = 0; d < config.days; ++d) {
            const DayDraw& dd = day_draws[d][f];
            double amp = farm.diurnal_amp + farm.amp_jitter_sd * dd.amp;
            double second = farm.second_amp_sd * dd.second;
            std::string day = day_string(d);
            double ar = ar_sd0 * rng.normal(); // stationary start
            for (int h = 0; h < kHoursPerDay; ++h) {
                if (h > 0)
                    ar = farm.ar_coeff * ar + farm.ar_noise_sd * rng.normal();
                double mean_speed =
                    farm.base_speed +
                    amp * std::sin(2.0 * kPi * (h - farm.phase_hours) / 24.0) +
                    second * std::cos(4.0 * kPi * h / 24.0) + dd.offset + ar;
                char ts[24];
                std::snprintf(ts, sizeof(ts), "%sT%02d:00", day.c_str(), h);
                for (int t = 0; t < config.turbines; ++t) {
                    double speed = mean_speed + farm.turbine_jitter_sd * rng.normal();
                    speed = std::max(0.0, speed);
                    double power = synthetic_power_curve(farm, speed);
                    power = std::max(0.0, power * (1.0 + 0.01 * rng.normal()));
                    WindFieldRecord r;
                    r.timestamp = ts;
                    r.day = day;
                    r.hour = h + 1;
                    r.farm_id = farm.farm_id;
                    r.turbine_id = farm.farm_id + "_t" + std::to_string(t + 1);
                    r.speed_mps = speed;
                    r.power_mw = power;
                    recs.push_back(std::move(r));
                }
            }
        }
    }
    return out;
}

std::map<std::string, std::vector<WindFieldRecord>>
make_fixture(std::uint64_t seed) {
    return make_fixture(seed, default_fixture_config());
}

std::vector<std::filesystem::path>
write_fixture_csv(const std::map<std::string, std::vector<WindFieldRecord>>& data,
                  const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> paths;
    for (const auto& [farm_id, recs] : data) {
        std::filesystem::path p = dir / ("wind_" + farm_id + ".csv");
        std::ofstream os(p);
        if (!os) throw InvalidInput("cannot open " + p.string() + " for writing");
        os << "timestamp,farm_id,turbine_id,speed_mps,power_mw\n";
        char buf[64];
        for (const WindFieldRecord& r : recs) {
            std::snprintf(buf, sizeof(buf), "%.6f,%.6f", r.speed_mps, r.power_mw);
            os << r.timestamp << ',' << r.farm_id << ',' << r.turbine_id << ','
               << buf << '\n';
        }
        paths.push_back(p);
    }
    return paths;
}

} // namespace seduq::wind

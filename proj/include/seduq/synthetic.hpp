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

#ifndef SEDUQ_SYNTHETIC_HPP
#define SEDUQ_SYNTHETIC_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "seduq/wind_data.hpp"

namespace seduq::wind {

/// Parameters of one synthetic farm. Hourly speed for day d, hour h is
///
///   base + (diurnal_amp + amp_jitter_d) * sin(2*pi*(h - phase)/24)
///        + second_amp_d * cos(4*pi*h/24) + daily_offset_d + ar_d(h)
///
/// clamped at 0, plus a small per-turbine jitter per record. amp_jitter,
/// second_amp and daily_offset are drawn once per day; ar is a fresh AR(1)
/// path per day. Per-turbine power comes from a logistic power curve with
/// a cut-in speed and 1% multiplicative measurement noise.
struct SyntheticFarm {
    std::string farm_id;
    double base_speed = 8.0;       // m/s
    double diurnal_amp = 2.0;      // m/s
    double phase_hours = 6.0;
    double amp_jitter_sd = 0.5;    // per-day amplitude jitter
    double second_amp_sd = 0.0;    // per-day second-harmonic amplitude
    double daily_offset_sd = 1.5;  // m/s, the dominant day-to-day mode
    double ar_coeff = 0.5;
    double ar_noise_sd = 0.2;      // m/s per hour
    double turbine_jitter_sd = 0.1; // m/s per record
    double rated_power_mw = 50.0;
    double cut_in_mps = 3.0;
    double half_power_mps = 9.0;
    double curve_steepness = 0.9;  // logistic slope, 1/(m/s)
};

struct SyntheticConfig {
    int days = 93;     // three Januaries' worth
    int turbines = 3;
    /// Correlation of daily offsets between the second and third farm;
    /// all other cross-farm structure is independent.
    double pair_offset_corr = 0.85;
    std::vector<SyntheticFarm> farms; // default: farm_a, farm_b, farm_c
};

SyntheticConfig default_fixture_config();

/// Deterministic synthetic dataset keyed by farm id.
std::map<std::string, std::vector<WindFieldRecord>>
make_fixture(std::uint64_t seed, const SyntheticConfig& config);

std::map<std::string, std::vector<WindFieldRecord>>
make_fixture(std::uint64_t seed);

/// True (generator-side) power curve, for fixtures and docs.
double synthetic_power_curve(const SyntheticFarm& farm, double speed_mps);

/// Writes one wind CSV per farm as <dir>/wind_<farm_id>.csv and returns
/// the paths in farm order.
std::vector<std::filesystem::path>
write_fixture_csv(const std::map<std::string, std::vector<WindFieldRecord>>& data,
                  const std::filesystem::path& dir);

} // namespace seduq::wind

#endif // SEDUQ_SYNTHETIC_HPP

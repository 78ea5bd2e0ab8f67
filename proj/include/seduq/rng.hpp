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

#ifndef SEDUQ_RNG_HPP
#define SEDUQ_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace seduq {

/// Seeded random stream with platform-independent draws. Variates are
/// produced from raw mt19937_64 words rather than std distributions so
/// that a given seed yields identical sequences everywhere.
///
/// Not thread safe; concurrent workers take one stream each, derived via
/// substream().
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform on [0, 1) with 53-bit resolution.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    /// Uniform on [a, b).
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Standard normal via Box-Muller (no cached spare; two words per draw).
    double normal();

    /// Uniform integer on [0, n). Rejection-free modulo is acceptable here:
    /// n is always tiny relative to 2^64 so the bias is negligible, and the
    /// draw stays bit-reproducible.
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(gen_() % n);
    }

    /// Derive an independent child seed from a parent seed and a stage tag.
    static std::uint64_t substream(std::uint64_t seed, std::string_view tag);

private:
    std::mt19937_64 gen_;
};

} // namespace seduq

#endif // SEDUQ_RNG_HPP

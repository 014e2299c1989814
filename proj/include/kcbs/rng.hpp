// Copyright 2026 The kcbs-rng Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace kcbs {

/**
 * Seed derivation.
 *
 * Every stream in the toolkit is an `std::mt19937_64` seeded with a value
 * obtained from the single user seed by folding stream labels through the
 * SplitMix64 finalizer:
 *
 * ```
 * s = splitmix64(seed); for label in labels: s = splitmix64(s ^ label)
 * ```
 *
 * Replicas, restarts and grid points each pass their own labels, so their
 * streams are independent of evaluation order.
 */
[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                                  std::initializer_list<std::uint64_t> labels) noexcept {
    std::uint64_t s = splitmix64(seed);
    for (const auto label : labels) {
        s = splitmix64(s ^ label);
    }
    return s;
}

/// Stream labels used across modules.
namespace stream {
inline constexpr std::uint64_t settings = 0x5e771265ULL;
inline constexpr std::uint64_t device = 0xde71ceULL;
inline constexpr std::uint64_t replica = 0x4e911caULL;
inline constexpr std::uint64_t restart = 0x4e57a47ULL;
} // namespace stream

/// 64-bit Mersenne Twister with a portable uniform double in [0, 1).
/// `std::uniform_real_distribution` is implementation-defined, so it is not
/// used anywhere the output must be reproducible.
class Rng {
  public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    [[nodiscard]] double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    [[nodiscard]] double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    result_type operator()() { return engine_(); }
    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }

  private:
    std::mt19937_64 engine_;
};

} // namespace kcbs

// Copyright 2026 The DQGM Authors
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

#include <cmath>
#include <cstdint>
#include <random>

namespace dqgm {

using Engine = std::mt19937_64;

/// One step of the SplitMix64 sequence. Used only to derive substream seeds.
inline std::uint64_t splitmix64(std::uint64_t &state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed of substream `stream` of the family rooted at `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed;
    splitmix64(s);
    s ^= stream * 0xD1B54A32D192ED03ULL;
    splitmix64(s);
    return splitmix64(s);
}

/// Seed 0 means "draw one from the environment"; any other value is returned unchanged.
inline std::uint64_t resolve_seed(std::uint64_t seed) {
    if (seed != 0) {
        return seed;
    }
    std::random_device rd;
    std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    return s == 0 ? 1 : s;
}

inline Engine make_stream(std::uint64_t seed, std::uint64_t stream) {
    return Engine(derive_seed(seed, stream));
}

/// Uniform double in [0, 1) built from the top 53 bits.
inline double uniform01(Engine &e) {
    return static_cast<double>(e() >> 11) * 0x1.0p-53;
}

inline double uniform(Engine &e, double lo, double hi) {
    return lo + (hi - lo) * uniform01(e);
}

/// Standard normal draw (Marsaglia polar method). Spelled out so that
/// seeded streams give the same values under every standard library.
inline double standard_normal(Engine &e) {
    for (;;) {
        double u = 2.0 * uniform01(e) - 1.0;
        double v = 2.0 * uniform01(e) - 1.0;
        double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) {
            return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }
}

}  // namespace dqgm

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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "dqgm/parallel.hpp"
#include "dqgm/rng.hpp"
#include "dqgm/state_vector.hpp"

namespace dqgm {

/// Shots per independently seeded chunk. Fixed so that results do not
/// depend on the worker count.
inline constexpr std::uint64_t kShotChunk = 1u << 16;

inline std::string to_bitstring(std::uint64_t index, std::size_t n_bits) {
    std::string s(n_bits, '0');
    for (std::size_t b = 0; b < n_bits; ++b) {
        if (index >> (n_bits - 1 - b) & 1u) {
            s[b] = '1';
        }
    }
    return s;
}

inline std::uint64_t from_bitstring(const std::string &bits) {
    std::uint64_t v = 0;
    for (char c : bits) {
        if (c != '0' && c != '1') {
            throw std::invalid_argument("bitstring contains '" + std::string(1, c) + "'");
        }
        v = (v << 1) | static_cast<std::uint64_t>(c == '1');
    }
    return v;
}

struct SampleSet {
    std::size_t n_qubits = 0;
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;
    std::map<std::string, std::uint64_t> counts;

    std::uint64_t count(const std::string &bits) const {
        auto it = counts.find(bits);
        return it == counts.end() ? 0 : it->second;
    }

    /// Frequencies indexed by outcome integer (length 2^n_qubits).
    std::vector<double> frequencies() const {
        std::vector<double> f(std::size_t{1} << n_qubits, 0.0);
        for (const auto &[bits, c] : counts) {
            f[from_bitstring(bits)] = static_cast<double>(c) / static_cast<double>(shots);
        }
        return f;
    }
};

/// Draws `shots` outcome indices from a probability vector. The seed must be
/// resolved (nonzero). Shot k belongs to chunk k / kShotChunk, and each chunk
/// has its own substream.
inline std::vector<std::uint64_t> sample_indices(const std::vector<double> &probs, std::uint64_t shots,
                                                 std::uint64_t seed) {
    if (probs.empty()) {
        throw std::invalid_argument("empty distribution");
    }
    std::vector<double> cdf(probs.size());
    double acc = 0.0;
    std::size_t last_nonzero = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] < 0.0) {
            throw std::invalid_argument("negative probability");
        }
        acc += probs[i];
        cdf[i] = acc;
        if (probs[i] > 0.0) last_nonzero = i;
    }
    if (!(acc > 0.0)) {
        throw std::invalid_argument("distribution has zero mass");
    }
    std::vector<std::uint64_t> out(shots);
    const std::uint64_t n_chunks = (shots + kShotChunk - 1) / kShotChunk;
    parallel_for(static_cast<std::size_t>(n_chunks), [&](std::size_t chunk) {
        Engine eng = make_stream(seed, chunk);
        const std::uint64_t begin = chunk * kShotChunk;
        const std::uint64_t end = std::min(shots, begin + kShotChunk);
        for (std::uint64_t s = begin; s < end; ++s) {
            const double u = uniform01(eng) * acc;
            auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
            std::size_t idx = static_cast<std::size_t>(it - cdf.begin());
            out[s] = std::min(idx, last_nonzero);
        }
    });
    return out;
}

inline SampleSet make_sample_set(std::size_t n_bits, const std::vector<std::uint64_t> &outcomes,
                                 std::uint64_t seed) {
    std::vector<std::uint64_t> dense(std::size_t{1} << n_bits, 0);
    for (auto o : outcomes) {
        ++dense[o];
    }
    SampleSet s;
    s.n_qubits = n_bits;
    s.shots = outcomes.size();
    s.seed = seed;
    for (std::size_t i = 0; i < dense.size(); ++i) {
        if (dense[i]) {
            s.counts.emplace(to_bitstring(i, n_bits), dense[i]);
        }
    }
    return s;
}

/// Projective measurement of every qubit, repeated `shots` times.
inline SampleSet sample(const StateVector &state, std::uint64_t shots, std::uint64_t seed) {
    if (shots < 1) {
        throw std::invalid_argument("shots must be >= 1");
    }
    const std::uint64_t used = resolve_seed(seed);
    return make_sample_set(state.n_qubits(), sample_indices(state.probabilities(), shots, used), used);
}

/// Total-variation distance between two distributions on the same support.
inline double total_variation(const std::vector<double> &p, const std::vector<double> &q) {
    if (p.size() != q.size()) {
        throw std::invalid_argument("distributions have different support sizes");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        s += std::abs(p[i] - q[i]);
    }
    return 0.5 * s;
}

}  // namespace dqgm

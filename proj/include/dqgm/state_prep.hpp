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

#include <bit>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dqgm/circuit.hpp"

namespace dqgm {

namespace detail {

// Uniformly controlled RY: for each value j of the control register
// (controls[0] is the most significant bit of j) the target is rotated by
// alphas[j]. Realized with 2^k plain rotations separated by CNOTs whose
// controls follow a Gray-code walk.
inline void add_uniformly_controlled_ry(Circuit &c, const std::vector<std::size_t> &controls, std::size_t target,
                                        const std::vector<double> &alphas) {
    const std::size_t k = controls.size();
    const std::size_t m = std::size_t{1} << k;
    if (k == 0) {
        if (alphas[0] != 0.0) {
            c.add(gates::ry(target, alphas[0]));
        }
        return;
    }
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t gi = i ^ (i >> 1);
        double theta = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            theta += (std::popcount(j & gi) & 1) ? -alphas[j] : alphas[j];
        }
        c.add(gates::ry(target, theta / static_cast<double>(m)));
        const std::size_t next = (i + 1) % m;
        const std::size_t changed = gi ^ (next ^ (next >> 1));
        const std::size_t bit = static_cast<std::size_t>(std::countr_zero(changed));
        c.add(gates::cnot(controls[k - 1 - bit], target));
    }
}

}  // namespace detail

/// Circuit taking |0...0> to sum_l amps[l] |l> for a real normalized vector
/// of length 2^L. Qubit k is rotated conditioned on qubits 0..k-1.
inline Circuit prepare_real_state(std::span<const double> amps) {
    const std::size_t dim = amps.size();
    if (dim < 2 || !std::has_single_bit(dim)) {
        throw std::invalid_argument("amplitude count must be a power of two >= 2");
    }
    double norm = 0.0;
    for (double a : amps) norm += a * a;
    if (std::abs(norm - 1.0) > 1e-9) {
        throw std::invalid_argument("amplitudes are not normalized (sum of squares " + std::to_string(norm) + ")");
    }
    const std::size_t n = static_cast<std::size_t>(std::countr_zero(dim));
    Circuit c(n);
    // weight[level][j] = squared norm of the block of amplitudes with prefix j.
    std::vector<std::vector<double>> weight(n + 1);
    weight[n].assign(amps.begin(), amps.end());
    for (auto &w : weight[n]) w = w * w;
    for (std::size_t level = n; level-- > 0;) {
        weight[level].resize(std::size_t{1} << level);
        for (std::size_t j = 0; j < weight[level].size(); ++j) {
            weight[level][j] = weight[level + 1][2 * j] + weight[level + 1][2 * j + 1];
        }
    }
    std::vector<std::size_t> controls;
    for (std::size_t k = 0; k < n; ++k) {
        std::vector<double> alphas(std::size_t{1} << k);
        for (std::size_t j = 0; j < alphas.size(); ++j) {
            if (k + 1 == n) {
                alphas[j] = 2.0 * std::atan2(amps[2 * j + 1], amps[2 * j]);
            } else {
                alphas[j] = 2.0 * std::atan2(std::sqrt(weight[k + 1][2 * j + 1]), std::sqrt(weight[k + 1][2 * j]));
            }
        }
        detail::add_uniformly_controlled_ry(c, controls, k, alphas);
        controls.push_back(k);
    }
    return c;
}

}  // namespace dqgm

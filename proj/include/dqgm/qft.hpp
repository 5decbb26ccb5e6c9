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
#include <cstddef>
#include <numbers>

#include "dqgm/circuit.hpp"

namespace dqgm {

/// QFT|l> = 2^{-n/2} sum_k exp(2 pi i k l / 2^n) |k>, built from Hadamards,
/// controlled phases and a final qubit reversal. `inverse` gives the adjoint.
inline Circuit build_qft(std::size_t n, bool inverse = false) {
    Circuit c(n);
    for (std::size_t j = 0; j < n; ++j) {
        c.add(gates::h(j));
        for (std::size_t k = j + 1; k < n; ++k) {
            c.add(gates::cphase(k, j, 2.0 * std::numbers::pi / std::ldexp(1.0, static_cast<int>(k - j + 1))));
        }
    }
    for (std::size_t j = 0; j < n / 2; ++j) {
        c.add(gates::swap(j, n - 1 - j));
    }
    return inverse ? c.adjoint() : c;
}

}  // namespace dqgm

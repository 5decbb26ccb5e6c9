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

#include <cstddef>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "dqgm/state_vector.hpp"

namespace dqgm {

/// <ref| rho_keep |ref>, where rho_keep is the reduced state on `keep`.
/// keep[0] is the most significant bit of the reference's index.
inline double reduced_fidelity(const StateVector &state, const std::vector<std::size_t> &keep,
                               const StateVector &reference) {
    if (keep.size() != reference.n_qubits()) {
        throw std::invalid_argument("reference has " + std::to_string(reference.n_qubits()) + " qubits but " +
                                    std::to_string(keep.size()) + " are kept");
    }
    std::set<std::size_t> kept(keep.begin(), keep.end());
    if (kept.size() != keep.size()) {
        throw std::invalid_argument("kept qubits repeat");
    }
    std::vector<std::uint64_t> keep_masks;
    for (std::size_t q : keep) keep_masks.push_back(state.mask(q));
    std::vector<std::uint64_t> drop_masks;
    for (std::size_t q = 0; q < state.n_qubits(); ++q) {
        if (!kept.count(q)) drop_masks.push_back(state.mask(q));
    }
    const std::size_t k = keep.size();
    double fid = 0.0;
    for (std::uint64_t d = 0; d < (std::uint64_t{1} << drop_masks.size()); ++d) {
        std::uint64_t base = 0;
        for (std::size_t b = 0; b < drop_masks.size(); ++b) {
            if (d >> (drop_masks.size() - 1 - b) & 1u) base |= drop_masks[b];
        }
        cplx overlap = 0.0;
        for (std::uint64_t r = 0; r < (std::uint64_t{1} << k); ++r) {
            std::uint64_t idx = base;
            for (std::size_t b = 0; b < k; ++b) {
                if (r >> (k - 1 - b) & 1u) idx |= keep_masks[b];
            }
            overlap += std::conj(reference[r]) * state[idx];
        }
        fid += std::norm(overlap);
    }
    return fid;
}

}  // namespace dqgm

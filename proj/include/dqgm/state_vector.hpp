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

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dqgm {

using cplx = std::complex<double>;

inline constexpr std::size_t kMaxQubits = 24;

/// Dense pure state. Amplitude i belongs to the basis state whose bitstring
/// is the binary expansion of i; qubit 0 is the most significant bit.
class StateVector {
   public:
    explicit StateVector(std::size_t n_qubits) : n_(n_qubits) {
        check_size(n_qubits);
        amps_.assign(std::size_t{1} << n_qubits, cplx(0.0, 0.0));
        amps_[0] = 1.0;
    }

    StateVector(std::size_t n_qubits, std::vector<cplx> amps) : n_(n_qubits), amps_(std::move(amps)) {
        check_size(n_qubits);
        if (amps_.size() != (std::size_t{1} << n_qubits)) {
            throw std::invalid_argument("amplitude count " + std::to_string(amps_.size()) +
                                        " does not match 2^" + std::to_string(n_qubits));
        }
    }

    static StateVector basis(std::size_t n_qubits, std::uint64_t index) {
        StateVector s(n_qubits);
        if (index >= s.dim()) {
            throw std::out_of_range("basis index out of range");
        }
        s.amps_[0] = 0.0;
        s.amps_[index] = 1.0;
        return s;
    }

    std::size_t n_qubits() const { return n_; }
    std::size_t dim() const { return amps_.size(); }

    /// Bit mask of qubit q inside an amplitude index.
    std::uint64_t mask(std::size_t q) const {
        if (q >= n_) {
            throw std::out_of_range("qubit index " + std::to_string(q) + " out of range for " +
                                    std::to_string(n_) + " qubits");
        }
        return std::uint64_t{1} << (n_ - 1 - q);
    }

    const std::vector<cplx> &amplitudes() const { return amps_; }
    std::vector<cplx> &amplitudes() { return amps_; }
    const cplx &operator[](std::size_t i) const { return amps_[i]; }
    cplx &operator[](std::size_t i) { return amps_[i]; }

    double norm_squared() const {
        double s = 0.0;
        for (const auto &a : amps_) {
            s += std::norm(a);
        }
        return s;
    }

    std::vector<double> probabilities() const {
        std::vector<double> p(amps_.size());
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            p[i] = std::norm(amps_[i]);
        }
        return p;
    }

   private:
    static void check_size(std::size_t n) {
        if (n < 1 || n > kMaxQubits) {
            throw std::invalid_argument("qubit count must lie in [1, " + std::to_string(kMaxQubits) + "]");
        }
    }

    std::size_t n_;
    std::vector<cplx> amps_;
};

/// |<a|b>|^2 for states of equal size.
inline double overlap_squared(const StateVector &a, const StateVector &b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("state dimensions differ");
    }
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        s += std::conj(a[i]) * b[i];
    }
    return std::norm(s);
}

namespace kernels {

// 2x2 matrix on the target bit, restricted to indices where every bit of
// control_mask is set.
inline void apply_2x2(std::vector<cplx> &amps, std::uint64_t target_mask, std::uint64_t control_mask,
                      cplx m00, cplx m01, cplx m10, cplx m11) {
    const std::size_t dim = amps.size();
    for (std::size_t i = 0; i < dim; ++i) {
        if ((i & target_mask) || (i & control_mask) != control_mask) {
            continue;
        }
        const std::size_t j = i | target_mask;
        const cplx a0 = amps[i];
        const cplx a1 = amps[j];
        amps[i] = m00 * a0 + m01 * a1;
        amps[j] = m10 * a0 + m11 * a1;
    }
}

// Multiplies amplitudes with all bits of `mask` set by `phase`.
inline void apply_phase(std::vector<cplx> &amps, std::uint64_t mask, cplx phase) {
    for (std::size_t i = 0; i < amps.size(); ++i) {
        if ((i & mask) == mask) {
            amps[i] *= phase;
        }
    }
}

inline void apply_swap(std::vector<cplx> &amps, std::uint64_t mask_a, std::uint64_t mask_b) {
    for (std::size_t i = 0; i < amps.size(); ++i) {
        if ((i & mask_a) && !(i & mask_b)) {
            std::swap(amps[i], amps[(i ^ mask_a) | mask_b]);
        }
    }
}

}  // namespace kernels
}  // namespace dqgm

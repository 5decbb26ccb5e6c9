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
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "dqgm/state_vector.hpp"

namespace dqgm {

enum class Pauli { X, Y, Z };

/// coefficient * (Pauli string) * (|0><0| on each projector qubit).
/// Pauli and projector qubits are disjoint, so the product is Hermitian.
struct ProjectedPauliTerm {
    double coefficient = 1.0;
    std::map<std::size_t, Pauli> pauli;
    std::set<std::size_t> zero_projector_qubits;
};

namespace detail {

struct CompiledTerm {
    double coefficient;
    std::uint64_t free_mask;  // qubits not forced to |0>
    std::uint64_t flip_mask;  // X and Y positions
    std::uint64_t y_mask;
    std::uint64_t z_mask;
};

inline CompiledTerm compile_term(const ProjectedPauliTerm &term, const StateVector &state) {
    CompiledTerm c{term.coefficient, 0, 0, 0, 0};
    std::uint64_t proj = 0;
    for (std::size_t q : term.zero_projector_qubits) {
        proj |= state.mask(q);
    }
    for (const auto &[q, p] : term.pauli) {
        const std::uint64_t m = state.mask(q);
        if (proj & m) {
            throw std::invalid_argument("qubit " + std::to_string(q) + " carries both a Pauli and a projector");
        }
        if (p == Pauli::X || p == Pauli::Y) c.flip_mask |= m;
        if (p == Pauli::Y) c.y_mask |= m;
        if (p == Pauli::Z) c.z_mask |= m;
    }
    c.free_mask = (state.dim() - 1) & ~proj;
    return c;
}

// <psi| P Pi |psi> for one compiled term. Only indices with every projector
// bit clear contribute, so the loop enumerates subsets of the free mask.
inline cplx term_expectation(const CompiledTerm &c, const std::vector<cplx> &amps) {
    const cplx I(0.0, 1.0);
    cplx acc = 0.0;
    std::uint64_t sub = c.free_mask;
    for (;;) {
        const std::uint64_t i = sub;
        const std::uint64_t j = i ^ c.flip_mask;
        cplx phase = 1.0;
        // Y|0> = i|1>, Y|1> = -i|0>: the row bit decides the sign.
        for (std::uint64_t ym = c.y_mask; ym; ym &= ym - 1) {
            const std::uint64_t bit = ym & (~ym + 1);
            phase *= (i & bit) ? I : -I;
        }
        if (std::popcount(i & c.z_mask) & 1) {
            phase = -phase;
        }
        acc += std::conj(amps[i]) * phase * amps[j];
        if (sub == 0) break;
        sub = (sub - 1) & c.free_mask;
    }
    return c.coefficient * acc;
}

}  // namespace detail

/// Sum of term expectations. The imaginary part cancels for Hermitian terms
/// and only the real part is returned.
inline double expectation(const StateVector &state, const std::vector<ProjectedPauliTerm> &op) {
    double total = 0.0;
    for (const auto &term : op) {
        total += detail::term_expectation(detail::compile_term(term, state), state.amplitudes()).real();
    }
    return total;
}

/// Pre-validated operator for repeated evaluation on same-sized states.
class CompiledOperator {
   public:
    CompiledOperator() = default;
    CompiledOperator(const std::vector<ProjectedPauliTerm> &op, std::size_t n_qubits) {
        StateVector probe(n_qubits);
        for (const auto &t : op) {
            terms_.push_back(detail::compile_term(t, probe));
        }
    }
    double operator()(const StateVector &state) const {
        double total = 0.0;
        for (const auto &t : terms_) {
            total += detail::term_expectation(t, state.amplitudes()).real();
        }
        return total;
    }
    std::size_t size() const { return terms_.size(); }

   private:
    std::vector<detail::CompiledTerm> terms_;
};

/// Projector |0...0><0...0| on n qubits as a single term.
inline std::vector<ProjectedPauliTerm> global_zero_projector(std::size_t n) {
    ProjectedPauliTerm t;
    for (std::size_t q = 0; q < n; ++q) {
        t.zero_projector_qubits.insert(q);
    }
    return {t};
}

}  // namespace dqgm

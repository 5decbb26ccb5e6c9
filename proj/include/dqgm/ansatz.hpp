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
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dqgm/circuit.hpp"

namespace dqgm {

enum class AnsatzKind { HEA_XZX_CNOT, REALAMP_RY_CZ };

inline const char *ansatz_name(AnsatzKind k) {
    return k == AnsatzKind::HEA_XZX_CNOT ? "HEA_XZX_CNOT" : "REALAMP_RY_CZ";
}

/// Layered circuit on the last `width` qubits of an `n_qubits` register.
/// HEA_XZX_CNOT: an RX-RZ-RX layer, then `depth` rounds of a CNOT brick and
/// another RX-RZ-RX layer. REALAMP_RY_CZ: an RY layer, then `depth` rounds of
/// a CZ brick and another RY layer.
struct AnsatzSpec {
    AnsatzKind kind = AnsatzKind::HEA_XZX_CNOT;
    std::size_t n_qubits = 1;
    std::size_t depth = 0;
    std::size_t width = 1;

    std::size_t rotations_per_qubit() const { return kind == AnsatzKind::HEA_XZX_CNOT ? 3 : 1; }
    std::size_t n_params() const { return rotations_per_qubit() * width * (depth + 1); }
    std::size_t window_start() const { return n_qubits - width; }

    /// Slot of rotation r on absolute qubit q in layer `layer`.
    std::size_t param_index(std::size_t layer, std::size_t q, std::size_t r) const {
        return (layer * width + (q - window_start())) * rotations_per_qubit() + r;
    }

    void validate() const {
        if (n_qubits < 1) {
            throw std::invalid_argument("model.n_qubits: must be >= 1");
        }
        if (width < 1 || width > n_qubits) {
            throw std::invalid_argument("model.ansatz.width: must lie in [1, model.n_qubits]");
        }
    }
};

namespace detail {

inline void add_brick(Circuit &c, const AnsatzSpec &spec) {
    const std::size_t start = spec.window_start();
    for (std::size_t parity = 0; parity < 2; ++parity) {
        for (std::size_t a = start + parity; a + 1 < spec.n_qubits; a += 2) {
            if (spec.kind == AnsatzKind::HEA_XZX_CNOT) {
                c.add(gates::cnot(a, a + 1));
            } else {
                c.add(gates::cz(a, a + 1));
            }
        }
    }
}

inline void add_rotation_layer(Circuit &c, const AnsatzSpec &spec, std::size_t layer) {
    for (std::size_t q = spec.window_start(); q < spec.n_qubits; ++q) {
        if (spec.kind == AnsatzKind::HEA_XZX_CNOT) {
            c.add(gates::rx(q, Angle::parameter(spec.param_index(layer, q, 0))));
            c.add(gates::rz(q, Angle::parameter(spec.param_index(layer, q, 1))));
            c.add(gates::rx(q, Angle::parameter(spec.param_index(layer, q, 2))));
        } else {
            c.add(gates::ry(q, Angle::parameter(spec.param_index(layer, q, 0))));
        }
    }
}

}  // namespace detail

inline Circuit build_ansatz(const AnsatzSpec &spec) {
    spec.validate();
    Circuit c(spec.n_qubits, spec.n_params());
    detail::add_rotation_layer(c, spec, 0);
    for (std::size_t layer = 1; layer <= spec.depth; ++layer) {
        detail::add_brick(c, spec);
        detail::add_rotation_layer(c, spec, layer);
    }
    return c;
}

/// Parameters for `to` that reuse every angle of `from` sitting at the same
/// (layer, qubit, rotation) position. Positions new to `to` start at zero.
inline std::vector<double> carry_over_params(const AnsatzSpec &from, std::span<const double> theta,
                                             const AnsatzSpec &to) {
    if (from.kind != to.kind || from.n_qubits != to.n_qubits) {
        throw std::invalid_argument("carry-over needs matching ansatz kind and register size");
    }
    if (theta.size() != from.n_params()) {
        throw std::invalid_argument("parameter vector does not match the source ansatz");
    }
    std::vector<double> out(to.n_params(), 0.0);
    for (std::size_t layer = 0; layer <= to.depth; ++layer) {
        for (std::size_t q = to.window_start(); q < to.n_qubits; ++q) {
            for (std::size_t r = 0; r < to.rotations_per_qubit(); ++r) {
                if (layer <= from.depth && q >= from.window_start()) {
                    out[to.param_index(layer, q, r)] = theta[from.param_index(layer, q, r)];
                }
            }
        }
    }
    return out;
}

/// Throws unless every slot drives exactly one uncontrolled RX/RY/RZ with
/// unit scale, the setting in which a +-pi/2 shift gives the exact gradient.
inline void validate_shift_rule(const Circuit &c) {
    std::vector<int> uses(c.n_params(), 0);
    for (const auto &op : c.ops()) {
        if (!op.angle || !op.angle->param) continue;
        const std::size_t k = *op.angle->param;
        const bool rotation = op.kind == GateKind::RX || op.kind == GateKind::RY || op.kind == GateKind::RZ;
        if (!rotation || !op.controls.empty() || std::abs(op.angle->param_scale) != 1.0) {
            throw std::invalid_argument("parameter " + std::to_string(k) + " drives a " + gate_name(op.kind) +
                                        " gate, where the shift rule does not apply");
        }
        ++uses[k];
    }
    for (std::size_t k = 0; k < uses.size(); ++k) {
        if (uses[k] > 1) {
            throw std::invalid_argument("parameter " + std::to_string(k) + " drives more than one gate");
        }
    }
}

}  // namespace dqgm

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
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dqgm/state_vector.hpp"

namespace dqgm {

enum class GateKind { H, X, Y, Z, RX, RY, RZ, CNOT, CZ, CPHASE, SWAP };

inline const char *gate_name(GateKind k) {
    switch (k) {
        case GateKind::H: return "H";
        case GateKind::X: return "X";
        case GateKind::Y: return "Y";
        case GateKind::Z: return "Z";
        case GateKind::RX: return "RX";
        case GateKind::RY: return "RY";
        case GateKind::RZ: return "RZ";
        case GateKind::CNOT: return "CNOT";
        case GateKind::CZ: return "CZ";
        case GateKind::CPHASE: return "CPHASE";
        case GateKind::SWAP: return "SWAP";
    }
    return "?";
}

inline bool carries_angle(GateKind k) {
    return k == GateKind::RX || k == GateKind::RY || k == GateKind::RZ || k == GateKind::CPHASE;
}

/// Rotation angle of the form  constant + param_scale * theta[param] + x_coeff * x.
struct Angle {
    double constant = 0.0;
    std::optional<std::size_t> param;
    double param_scale = 1.0;
    double x_coeff = 0.0;

    static Angle fixed(double value) { return Angle{value, std::nullopt, 1.0, 0.0}; }
    static Angle parameter(std::size_t index, double scale = 1.0) { return Angle{0.0, index, scale, 0.0}; }
    static Angle of_x(double coeff, double constant = 0.0) { return Angle{constant, std::nullopt, 1.0, coeff}; }

    bool uses_x() const { return x_coeff != 0.0; }
    bool is_concrete() const { return !param.has_value() && !uses_x(); }

    double value(std::span<const double> theta, double x) const {
        double v = constant + x_coeff * x;
        if (param) {
            if (*param >= theta.size()) {
                throw std::out_of_range("parameter slot " + std::to_string(*param) + " is unbound");
            }
            v += param_scale * theta[*param];
        }
        return v;
    }

    Angle negated() const { return Angle{-constant, param, -param_scale, -x_coeff}; }
};

/// One gate. CNOT, CZ and CPHASE take exactly one control; the remaining
/// single-target kinds accept any number of controls. SWAP takes two targets.
struct GateOp {
    GateKind kind = GateKind::H;
    std::vector<std::size_t> targets;
    std::vector<std::size_t> controls;
    std::optional<Angle> angle;
};

namespace gates {
inline GateOp h(std::size_t q) { return {GateKind::H, {q}, {}, std::nullopt}; }
inline GateOp x(std::size_t q) { return {GateKind::X, {q}, {}, std::nullopt}; }
inline GateOp y(std::size_t q) { return {GateKind::Y, {q}, {}, std::nullopt}; }
inline GateOp z(std::size_t q) { return {GateKind::Z, {q}, {}, std::nullopt}; }
inline GateOp rx(std::size_t q, Angle a) { return {GateKind::RX, {q}, {}, a}; }
inline GateOp ry(std::size_t q, Angle a) { return {GateKind::RY, {q}, {}, a}; }
inline GateOp rz(std::size_t q, Angle a) { return {GateKind::RZ, {q}, {}, a}; }
inline GateOp rx(std::size_t q, double a) { return rx(q, Angle::fixed(a)); }
inline GateOp ry(std::size_t q, double a) { return ry(q, Angle::fixed(a)); }
inline GateOp rz(std::size_t q, double a) { return rz(q, Angle::fixed(a)); }
inline GateOp cnot(std::size_t c, std::size_t t) { return {GateKind::CNOT, {t}, {c}, std::nullopt}; }
inline GateOp cz(std::size_t c, std::size_t t) { return {GateKind::CZ, {t}, {c}, std::nullopt}; }
inline GateOp cphase(std::size_t c, std::size_t t, Angle a) { return {GateKind::CPHASE, {t}, {c}, a}; }
inline GateOp cphase(std::size_t c, std::size_t t, double a) { return cphase(c, t, Angle::fixed(a)); }
inline GateOp swap(std::size_t a, std::size_t b) { return {GateKind::SWAP, {a, b}, {}, std::nullopt}; }
}  // namespace gates

/// Throws if the op is malformed for an n-qubit register.
inline void validate_op(const GateOp &op, std::size_t n_qubits) {
    const std::size_t want_targets = op.kind == GateKind::SWAP ? 2 : 1;
    if (op.targets.size() != want_targets) {
        throw std::invalid_argument(std::string(gate_name(op.kind)) + " needs " + std::to_string(want_targets) +
                                    " target(s)");
    }
    const bool two_qubit = op.kind == GateKind::CNOT || op.kind == GateKind::CZ || op.kind == GateKind::CPHASE;
    if (two_qubit && op.controls.size() != 1) {
        throw std::invalid_argument(std::string(gate_name(op.kind)) + " needs exactly one control");
    }
    if (op.kind == GateKind::SWAP && !op.controls.empty()) {
        throw std::invalid_argument("SWAP takes no controls");
    }
    if (carries_angle(op.kind) != op.angle.has_value()) {
        throw std::invalid_argument(std::string(gate_name(op.kind)) +
                                    (op.angle ? " takes no angle" : " needs an angle"));
    }
    std::vector<std::size_t> all = op.targets;
    all.insert(all.end(), op.controls.begin(), op.controls.end());
    for (std::size_t q : all) {
        if (q >= n_qubits) {
            throw std::out_of_range("qubit index " + std::to_string(q) + " out of range for " +
                                    std::to_string(n_qubits) + " qubits");
        }
    }
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end()) {
        throw std::invalid_argument(std::string(gate_name(op.kind)) + " acts twice on one qubit");
    }
}

namespace detail {

inline void apply_with_angle(StateVector &state, const GateOp &op, double angle) {
    auto &amps = state.amplitudes();
    std::uint64_t cmask = 0;
    for (std::size_t c : op.controls) {
        cmask |= state.mask(c);
    }
    const std::uint64_t t = state.mask(op.targets[0]);
    const double r = 1.0 / std::sqrt(2.0);
    const cplx I(0.0, 1.0);
    switch (op.kind) {
        case GateKind::H:
            kernels::apply_2x2(amps, t, cmask, r, r, r, -r);
            break;
        case GateKind::X:
        case GateKind::CNOT:
            kernels::apply_2x2(amps, t, cmask, 0.0, 1.0, 1.0, 0.0);
            break;
        case GateKind::Y:
            kernels::apply_2x2(amps, t, cmask, 0.0, -I, I, 0.0);
            break;
        case GateKind::Z:
        case GateKind::CZ:
            kernels::apply_phase(amps, t | cmask, -1.0);
            break;
        case GateKind::RX: {
            const double c = std::cos(angle / 2), s = std::sin(angle / 2);
            kernels::apply_2x2(amps, t, cmask, c, -I * s, -I * s, c);
            break;
        }
        case GateKind::RY: {
            const double c = std::cos(angle / 2), s = std::sin(angle / 2);
            kernels::apply_2x2(amps, t, cmask, c, -s, s, c);
            break;
        }
        case GateKind::RZ:
            kernels::apply_2x2(amps, t, cmask, std::polar(1.0, -angle / 2), 0.0, 0.0, std::polar(1.0, angle / 2));
            break;
        case GateKind::CPHASE:
            kernels::apply_phase(amps, t | cmask, std::polar(1.0, angle));
            break;
        case GateKind::SWAP:
            kernels::apply_swap(amps, t, state.mask(op.targets[1]));
            break;
    }
}

}  // namespace detail

/// Applies a concrete gate in place.
inline void apply_gate(StateVector &state, const GateOp &op) {
    validate_op(op, state.n_qubits());
    double angle = 0.0;
    if (op.angle) {
        if (!op.angle->is_concrete()) {
            throw std::invalid_argument("unbound symbolic angle on " + std::string(gate_name(op.kind)));
        }
        angle = op.angle->constant;
    }
    detail::apply_with_angle(state, op, angle);
}

/// Ordered gate list on a fixed register with `n_params` symbolic slots.
/// Ops are listed in time order: ops()[0] acts first.
class Circuit {
   public:
    explicit Circuit(std::size_t n_qubits, std::size_t n_params = 0) : n_qubits_(n_qubits), n_params_(n_params) {
        if (n_qubits < 1 || n_qubits > kMaxQubits) {
            throw std::invalid_argument("qubit count must lie in [1, " + std::to_string(kMaxQubits) + "]");
        }
    }

    std::size_t n_qubits() const { return n_qubits_; }
    std::size_t n_params() const { return n_params_; }
    const std::vector<GateOp> &ops() const { return ops_; }
    std::size_t size() const { return ops_.size(); }

    void set_n_params(std::size_t n) {
        for (const auto &op : ops_) {
            if (op.angle && op.angle->param && *op.angle->param >= n) {
                throw std::invalid_argument("existing op references a slot beyond the new parameter count");
            }
        }
        n_params_ = n;
    }

    Circuit &add(GateOp op) {
        validate_op(op, n_qubits_);
        if (op.angle && op.angle->param && *op.angle->param >= n_params_) {
            throw std::out_of_range("parameter slot " + std::to_string(*op.angle->param) + " exceeds n_params " +
                                    std::to_string(n_params_));
        }
        ops_.push_back(std::move(op));
        return *this;
    }

    /// Appends `other` with its qubit q mapped to q + qubit_offset and its
    /// slot k mapped to k + param_offset.
    Circuit &append(const Circuit &other, std::size_t qubit_offset = 0, std::size_t param_offset = 0) {
        if (other.n_qubits_ + qubit_offset > n_qubits_) {
            throw std::invalid_argument("appended circuit does not fit in the register");
        }
        for (GateOp op : other.ops_) {
            for (auto &q : op.targets) q += qubit_offset;
            for (auto &q : op.controls) q += qubit_offset;
            if (op.angle && op.angle->param) {
                *op.angle->param += param_offset;
            }
            add(std::move(op));
        }
        return *this;
    }

    bool has_x_slot() const {
        return std::any_of(ops_.begin(), ops_.end(), [](const GateOp &op) { return op.angle && op.angle->uses_x(); });
    }

    /// Concrete copy with every slot evaluated.
    Circuit bind(std::span<const double> theta, double x = 0.0) const {
        check_theta(theta);
        Circuit out(n_qubits_, 0);
        out.ops_.reserve(ops_.size());
        for (GateOp op : ops_) {
            if (op.angle) {
                op.angle = Angle::fixed(op.angle->value(theta, x));
            }
            out.ops_.push_back(std::move(op));
        }
        return out;
    }

    /// Circuit of the inverse unitary.
    Circuit adjoint() const {
        Circuit out(n_qubits_, n_params_);
        out.ops_.assign(ops_.rbegin(), ops_.rend());
        for (auto &op : out.ops_) {
            if (op.angle) {
                op.angle = op.angle->negated();
            }
        }
        return out;
    }

    /// Circuit of the transposed unitary (in the computational basis).
    /// An uncontrolled Y maps to itself, which differs from Y^T by a global
    /// sign; a controlled Y has no such representation and is rejected.
    Circuit transpose() const {
        Circuit out(n_qubits_, n_params_);
        out.ops_.assign(ops_.rbegin(), ops_.rend());
        for (auto &op : out.ops_) {
            if (op.kind == GateKind::RY) {
                op.angle = op.angle->negated();
            } else if (op.kind == GateKind::Y && !op.controls.empty()) {
                throw std::invalid_argument("controlled Y has no transpose in this gate set");
            }
        }
        return out;
    }

    void check_theta(std::span<const double> theta) const {
        if (theta.size() < n_params_) {
            throw std::invalid_argument("circuit needs " + std::to_string(n_params_) + " parameters, got " +
                                        std::to_string(theta.size()));
        }
    }

   private:
    std::size_t n_qubits_;
    std::size_t n_params_;
    std::vector<GateOp> ops_;
};

/// Runs the circuit on `state` in place with slots bound to (theta, x).
inline void run(const Circuit &circuit, StateVector &state, std::span<const double> theta = {}, double x = 0.0) {
    if (state.n_qubits() != circuit.n_qubits()) {
        throw std::invalid_argument("state and circuit sizes differ");
    }
    circuit.check_theta(theta);
    for (const auto &op : circuit.ops()) {
        detail::apply_with_angle(state, op, op.angle ? op.angle->value(theta, x) : 0.0);
    }
}

/// Output of the circuit on |0...0>.
inline StateVector simulate(const Circuit &circuit, std::span<const double> theta = {}, double x = 0.0) {
    StateVector s(circuit.n_qubits());
    run(circuit, s, theta, x);
    return s;
}

}  // namespace dqgm

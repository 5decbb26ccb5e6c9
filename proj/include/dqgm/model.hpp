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
#include <initializer_list>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dqgm/ansatz.hpp"
#include "dqgm/circuit.hpp"
#include "dqgm/feature_map.hpp"
#include "dqgm/pauli.hpp"
#include "dqgm/qft.hpp"
#include "dqgm/state_vector.hpp"

namespace dqgm {

/// Latent model p(x) = |<0...0| U(theta) Map(x) |0...0>|^2.
struct DqgmModel {
    PhaseMapSpec map;
    Circuit ansatz{1};
    std::vector<double> theta;
    std::optional<AnsatzSpec> spec;  // set when the ansatz came from an AnsatzSpec

    std::size_t n_qubits() const { return map.n_qubits; }
    std::size_t n_params() const { return ansatz.n_params(); }

    void validate() const {
        map.validate();
        if (ansatz.n_qubits() != map.n_qubits) {
            throw std::invalid_argument("ansatz and feature map act on different registers");
        }
        if (theta.size() != ansatz.n_params()) {
            throw std::invalid_argument("model has " + std::to_string(theta.size()) + " parameters bound, ansatz needs " +
                                        std::to_string(ansatz.n_params()));
        }
        if (ansatz.has_x_slot()) {
            throw std::invalid_argument("ansatz must not depend on x");
        }
    }
};

inline DqgmModel make_model(const PhaseMapSpec &map, const AnsatzSpec &spec, std::vector<double> theta = {}) {
    if (spec.n_qubits != map.n_qubits) {
        throw std::invalid_argument("model.ansatz: register size differs from the feature map");
    }
    DqgmModel m{map, build_ansatz(spec), std::move(theta), spec};
    if (m.theta.empty()) m.theta.assign(spec.n_params(), 0.0);
    m.validate();
    return m;
}

inline DqgmModel make_model(const PhaseMapSpec &map, Circuit ansatz, std::vector<double> theta = {}) {
    DqgmModel m{map, std::move(ansatz), std::move(theta), std::nullopt};
    if (m.theta.empty()) m.theta.assign(m.ansatz.n_params(), 0.0);
    m.validate();
    return m;
}

/// Model value with its first and second x derivatives.
struct PointValues {
    double p = 0.0;
    double dp = 0.0;
    double d2p = 0.0;
};

/// Cost-operator expansions whose expectations on the readout state give
/// dp/dx (first) and d^2p/dx^2 (second).
struct DerivativeCostOps {
    std::vector<ProjectedPauliTerm> first;
    std::vector<ProjectedPauliTerm> second;
};

/// With generator M = sum_q m_q X_q (m_q = phase_q / 2) and C = |0..0><0..0|:
///   first  = i[M, C]                = sum_q m_q Y_q (x) P0_rest
///   second = 2MCM - M^2 C - C M^2   = sum_q m_q^2 (1 - Z_q) (x) P0_rest
///                                     - 2 (sum_q m_q^2) P0_all
///                                     + sum_{j<k} 2 m_j m_k Y_j Y_k (x) P0_rest
inline DerivativeCostOps build_derivative_ops(const PhaseMapSpec &spec) {
    spec.validate();
    const std::size_t n = spec.n_qubits;
    auto rest = [n](std::initializer_list<std::size_t> skip) {
        std::set<std::size_t> s;
        for (std::size_t q = 0; q < n; ++q) {
            if (std::find(skip.begin(), skip.end(), q) == skip.end()) s.insert(q);
        }
        return s;
    };
    DerivativeCostOps ops;
    double sum_sq = 0.0;
    for (std::size_t q = 0; q < n; ++q) {
        const double m = 0.5 * spec.phase(q);
        sum_sq += m * m;
        ops.first.push_back(ProjectedPauliTerm{m, {{q, Pauli::Y}}, rest({q})});
        ops.second.push_back(ProjectedPauliTerm{m * m, {}, rest({q})});
        ops.second.push_back(ProjectedPauliTerm{-m * m, {{q, Pauli::Z}}, rest({q})});
    }
    ops.second.push_back(ProjectedPauliTerm{-2.0 * sum_sq, {}, rest({})});
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = j + 1; k < n; ++k) {
            const double c = 2.0 * (0.5 * spec.phase(j)) * (0.5 * spec.phase(k));
            ops.second.push_back(ProjectedPauliTerm{c, {{j, Pauli::Y}, {k, Pauli::Y}}, rest({j, k})});
        }
    }
    return ops;
}

/// Evaluates a model for many x and many parameter vectors. The readout state
/// s(theta) = (U A)^T |0..0> is x-independent (A is the Hadamard layer that
/// turns the ZH map into the X map, or nothing for the X map), and
/// p(x) = |<0..0| RX-layer(x) s>|^2 because the RX layer is symmetric.
class ModelEvaluator {
   public:
    explicit ModelEvaluator(const DqgmModel &model)
        : n_(model.n_qubits()), readout_(model.ansatz.transpose()), phases_(model.n_qubits()) {
        model.validate();
        if (model.map.basis == MapBasis::ZH) {
            for (std::size_t q = 0; q < n_; ++q) readout_.add(gates::h(q));
        }
        for (std::size_t q = 0; q < n_; ++q) phases_[q] = model.map.phase(q);
        const DerivativeCostOps ops = build_derivative_ops(model.map);
        first_ = CompiledOperator(ops.first, n_);
        second_ = CompiledOperator(ops.second, n_);
    }

    std::size_t n_params() const { return readout_.n_params(); }

    StateVector prepare(std::span<const double> theta) const { return simulate(readout_, theta); }

    /// max_order 0: p only; 1: p and dp; 2: all three.
    PointValues at(const StateVector &prepared, double x, int max_order = 0) const {
        StateVector psi = prepared;
        const cplx I(0.0, 1.0);
        for (std::size_t q = 0; q < n_; ++q) {
            const double a = 0.5 * phases_[q] * x;
            const double c = std::cos(a), s = std::sin(a);
            kernels::apply_2x2(psi.amplitudes(), psi.mask(q), 0, c, -I * s, -I * s, c);
        }
        PointValues v;
        v.p = std::norm(psi[0]);
        if (max_order >= 1) v.dp = first_(psi);
        if (max_order >= 2) v.d2p = second_(psi);
        return v;
    }

    std::vector<PointValues> grid(std::span<const double> theta, std::span<const double> xs,
                                  int max_order = 0) const {
        const StateVector s = prepare(theta);
        std::vector<PointValues> out(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) out[i] = at(s, xs[i], max_order);
        return out;
    }

   private:
    std::size_t n_;
    Circuit readout_;
    std::vector<double> phases_;
    CompiledOperator first_;
    CompiledOperator second_;
};

inline PointValues eval_point(const DqgmModel &model, double x, int max_order = 2) {
    ModelEvaluator ev(model);
    return ev.at(ev.prepare(model.theta), x, max_order);
}

inline double eval_model(const DqgmModel &model, double x) { return eval_point(model, x, 0).p; }

inline double eval_derivative(const DqgmModel &model, double x, int order) {
    if (order != 1 && order != 2) {
        throw std::invalid_argument("derivative order must be 1 or 2");
    }
    const PointValues v = eval_point(model, x, order);
    return order == 1 ? v.dp : v.d2p;
}

inline std::vector<PointValues> eval_grid(const DqgmModel &model, std::span<const double> xs, int max_order = 0) {
    return ModelEvaluator(model).grid(model.theta, xs, max_order);
}

/// Model state in the ZH latent frame: p(x) = |<x~|a>|^2 with
/// |x~> = 2^{-N/2} sum_l exp(i nu_l x)|l>.
inline StateVector model_state(const DqgmModel &model) {
    model.validate();
    StateVector s(model.n_qubits());
    run(model.ansatz.adjoint(), s, model.theta);
    if (model.map.basis == MapBasis::X) {
        for (std::size_t q = 0; q < model.n_qubits(); ++q) apply_gate(s, gates::h(q));
    }
    return s;
}

/// Probability of finding the transformed QCBM state U|0..0> in the latent
/// state of x: |<x~| T^dag U |0..0>|^2. At integer x this is the QCBM
/// probability of bitstring x.
inline double eval_gqcbm(const DqgmModel &model, double x) {
    model.validate();
    Circuit c(model.n_qubits(), model.n_params());
    c.append(model.ansatz);
    c.append(build_basis_transform(model.map).adjoint());
    c.append(build_phase_map(model.map).adjoint());
    return std::norm(simulate(c, model.theta, x)[0]);
}

/// Position in x of fine bin y when sampling on an extended register of
/// m_qubits. Each coarse bin l holds 2^(m-n) fine bins centred on l.
inline double extended_bin_position(std::uint64_t y, std::size_t n_qubits, std::size_t m_qubits) {
    const double factor = std::ldexp(1.0, static_cast<int>(m_qubits - n_qubits));
    return (static_cast<double>(y) - 0.5 * (factor - 1.0)) / factor;
}

/// Bit-basis sampling circuit (parameters bound). With m_qubits == N the
/// outcome probabilities are the model values at the integers. With
/// m_qubits > N the model state fills the low-order qubits of a larger
/// latent register, a phase ramp centres the fine bins on the coarse ones,
/// and the outcome y has probability p(extended_bin_position(y)) / 2^(m-N).
inline Circuit build_sampling_circuit(const DqgmModel &model, std::size_t m_qubits = 0) {
    model.validate();
    if (!model.map.unsqueezed()) {
        throw std::invalid_argument("sampling requires xi == 1 on every qubit");
    }
    const std::size_t n = model.n_qubits();
    const std::size_t m = m_qubits == 0 ? n : m_qubits;
    if (m < n || m > kMaxQubits) {
        throw std::invalid_argument("sampling.extended_qubits: must lie in [model.n_qubits, " +
                                    std::to_string(kMaxQubits) + "]");
    }
    const std::size_t offset = m - n;
    Circuit c(m);
    c.append(model.ansatz.adjoint().bind(model.theta), offset);
    if (model.map.basis == MapBasis::X) {
        for (std::size_t q = 0; q < n; ++q) c.add(gates::h(q + offset));
    }
    if (offset > 0) {
        const double shift = 0.5 * (std::ldexp(1.0, static_cast<int>(offset)) - 1.0);
        for (std::size_t q = 0; q < m; ++q) {
            c.add(gates::rz(q, 2.0 * std::numbers::pi * shift / std::ldexp(1.0, static_cast<int>(q + 1))));
        }
    }
    c.append(build_qft(m, true));
    return c;
}

/// Sums 2^(m-n) consecutive fine probabilities into each coarse bin.
inline std::vector<double> aggregate_bins(const std::vector<double> &fine, std::size_t factor) {
    if (factor == 0 || fine.size() % factor != 0) {
        throw std::invalid_argument("bin factor must divide the number of bins");
    }
    std::vector<double> coarse(fine.size() / factor, 0.0);
    for (std::size_t i = 0; i < fine.size(); ++i) coarse[i / factor] += fine[i];
    return coarse;
}

}  // namespace dqgm

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
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dqgm/ansatz.hpp"
#include "dqgm/circuit.hpp"
#include "dqgm/feature_map.hpp"
#include "dqgm/parallel.hpp"
#include "dqgm/qft.hpp"
#include "dqgm/sampling.hpp"
#include "dqgm/stochastics.hpp"
#include "dqgm/training.hpp"

namespace dqgm {

/// Two registers of n qubits each: register 1 holds qubits 0..n-1 (the high
/// bits of an outcome), register 2 holds n..2n-1. Local ops use qubit
/// indices relative to their own register.
struct CopulaCircuitSpec {
    std::size_t n_per_register = 1;
    std::vector<GateOp> register1_local_ops;
    std::vector<GateOp> register2_local_ops;

    void validate() const {
        if (n_per_register < 1 || 2 * n_per_register > kMaxQubits) {
            throw std::invalid_argument("copula.n_per_register: must lie in [1, " + std::to_string(kMaxQubits / 2) +
                                        "]");
        }
        for (const auto *ops : {&register1_local_ops, &register2_local_ops}) {
            for (const auto &op : *ops) {
                try {
                    validate_op(op, n_per_register);
                } catch (const std::out_of_range &) {
                    throw std::invalid_argument("copula local op acts outside its register");
                }
                if (op.angle && !op.angle->is_concrete()) {
                    throw std::invalid_argument("copula local ops must have fixed angles");
                }
            }
        }
    }
};

/// Qubit i of register 1 entangled with qubit i of register 2 as (|00> + |11>)/sqrt(2).
inline Circuit bell_layer(std::size_t n) {
    Circuit c(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        c.add(gates::h(i));
        c.add(gates::cnot(i, n + i));
    }
    return c;
}

inline std::vector<GateOp> hadamard_layer(std::size_t n) {
    std::vector<GateOp> ops;
    for (std::size_t q = 0; q < n; ++q) ops.push_back(gates::h(q));
    return ops;
}

inline std::vector<GateOp> partial_rotation_layer(std::size_t n, double x_angle, double y_angle) {
    std::vector<GateOp> ops;
    for (std::size_t q = 0; q < n; ++q) {
        ops.push_back(gates::rx(q, x_angle));
        ops.push_back(gates::ry(q, y_angle));
    }
    return ops;
}

inline Circuit build_copula_sampler(const CopulaCircuitSpec &spec) {
    spec.validate();
    const std::size_t n = spec.n_per_register;
    Circuit c = bell_layer(n);
    for (GateOp op : spec.register1_local_ops) c.add(op);
    for (GateOp op : spec.register2_local_ops) {
        for (auto &q : op.targets) q += n;
        for (auto &q : op.controls) q += n;
        c.add(op);
    }
    return c;
}

struct LatentPair {
    std::uint64_t z1 = 0;
    std::uint64_t z2 = 0;
};

inline LatentPair split_outcome(std::uint64_t outcome, std::size_t n) {
    const std::uint64_t mask = (std::uint64_t{1} << n) - 1;
    return {outcome >> n, outcome & mask};
}

/// Shot-by-shot outcomes of a 2n-qubit state, in draw order.
inline std::vector<LatentPair> sample_pairs(const StateVector &state, std::size_t n, std::uint64_t shots,
                                            std::uint64_t seed) {
    if (state.n_qubits() != 2 * n) {
        throw std::invalid_argument("state does not hold two registers of the given size");
    }
    if (shots < 1) {
        throw std::invalid_argument("copula.shots: must be >= 1");
    }
    const auto idx = sample_indices(state.probabilities(), shots, resolve_seed(seed));
    std::vector<LatentPair> out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) out[i] = split_outcome(idx[i], n);
    return out;
}

struct MarginalSpec {
    double mu = 0.5;
    double sigma = 0.1;
};

/// Midpoint of latent bin z: (z + 1/2) / 2^n, never 0 or 1.
inline double dequantize(std::uint64_t z, std::size_t n) {
    const double dim = std::ldexp(1.0, static_cast<int>(n));
    if (static_cast<double>(z) >= dim) {
        throw std::invalid_argument("latent value out of range");
    }
    return (static_cast<double>(z) + 0.5) / dim;
}

inline std::pair<double, double> latent_to_data(const LatentPair &z, std::size_t n, const MarginalSpec &m1,
                                                const MarginalSpec &m2) {
    return {normal_quantile(dequantize(z.z1, n), m1.mu, m1.sigma), normal_quantile(dequantize(z.z2, n), m2.mu, m2.sigma)};
}

/// Latent two-register model
///   p(z1, z2) = |<0| B^dag (U1 x U2) (Map(z1) x Map(z2)) |0>|^2
/// with B the Bell layer and ZH phase maps on each register.
struct CopulaModel {
    std::size_t n_per_register = 1;
    AnsatzSpec ansatz;  // per register; both registers use the same layout
    std::vector<double> theta;

    std::size_t n_params() const { return 2 * ansatz.n_params(); }

    void validate() const {
        if (ansatz.n_qubits != n_per_register) {
            throw std::invalid_argument("copula ansatz register differs from n_per_register");
        }
        ansatz.validate();
        if (theta.size() != n_params()) {
            throw std::invalid_argument("copula model has the wrong number of parameters");
        }
    }
};

/// U1 x U2 on 2n qubits; register 2 uses slots after those of register 1.
inline Circuit copula_ansatz(const CopulaModel &m) {
    const Circuit one = build_ansatz(m.ansatz);
    Circuit c(2 * m.n_per_register, m.n_params());
    c.append(one, 0, 0);
    c.append(one, m.n_per_register, one.n_params());
    return c;
}

/// Direct evaluation through the training-side circuit.
inline double eval_copula_model(const CopulaModel &m, double z1, double z2) {
    m.validate();
    const std::size_t n = m.n_per_register;
    const Circuit map = build_phase_map(PhaseMapSpec::standard(n));
    Circuit c(2 * n, m.n_params());
    c.append(map.bind({}, z1), 0);
    c.append(map.bind({}, z2), n);
    c.append(copula_ansatz(m));
    c.append(bell_layer(n).adjoint());
    return std::norm(simulate(c, m.theta)[0]);
}

/// Bit-basis circuit whose outcome (z1, z2) has probability p(z1, z2) at
/// integer points: Bell layer, inverse ansatz, then each register's basis transform.
inline Circuit copula_sampling_circuit(const CopulaModel &m, std::span<const double> theta) {
    const std::size_t n = m.n_per_register;
    Circuit c = bell_layer(n);
    c.append(copula_ansatz(m).adjoint().bind(theta));
    const Circuit t = build_basis_transform(PhaseMapSpec::standard(n));
    c.append(t, 0);
    c.append(t, n);
    return c;
}

/// p(z1, z2) on all integer pairs, index z1 * 2^n + z2.
inline std::vector<double> copula_grid_probabilities(const CopulaModel &m, std::span<const double> theta) {
    return simulate(copula_sampling_circuit(m, theta)).probabilities();
}

struct CopulaTrainResult {
    CopulaModel model;
    std::vector<double> history;  // loss at the start of each epoch
    double initial_loss = 0.0;
    double final_loss = 0.0;
};

/// Normalized target on the integer grid: density(u1, u2) at bin midpoints,
/// scaled to sum to one.
inline std::vector<double> copula_target(const std::function<double(double, double)> &density, std::size_t n) {
    const std::size_t dim = std::size_t{1} << n;
    std::vector<double> t(dim * dim);
    double total = 0.0;
    for (std::size_t a = 0; a < dim; ++a) {
        for (std::size_t b = 0; b < dim; ++b) {
            t[a * dim + b] = density(dequantize(a, n), dequantize(b, n));
            total += t[a * dim + b];
        }
    }
    if (!(total > 0.0)) throw std::invalid_argument("copula target has no mass");
    for (auto &v : t) v /= total;
    return t;
}

/// MSE training of the latent copula model on all integer pairs with Adam.
inline CopulaTrainResult train_copula(CopulaModel model, const std::function<double(double, double)> &density,
                                      std::size_t epochs, double lr, std::uint64_t seed, double init_scale = 0.1) {
    if (model.theta.empty()) model.theta = random_theta(model.n_params(), init_scale, seed, 0);
    model.validate();
    validate_shift_rule(copula_ansatz(model));
    const std::vector<double> target = copula_target(density, model.n_per_register);
    const double inv = 1.0 / static_cast<double>(target.size());
    auto loss_of = [&](const std::vector<double> &p) {
        double s = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - target[i]) * (p[i] - target[i]);
        return s * inv;
    };
    CopulaTrainResult out;
    OptimizerState opt;
    opt.lr = lr;
    std::vector<double> &theta = model.theta;
    for (std::size_t e = 0; e < epochs; ++e) {
        const auto p = copula_grid_probabilities(model, theta);
        out.history.push_back(loss_of(p));
        std::vector<double> grad(theta.size(), 0.0);
        parallel_for(theta.size(), [&](std::size_t k) {
            std::vector<double> shifted = theta;
            shifted[k] += std::numbers::pi / 2;
            const auto plus = copula_grid_probabilities(model, shifted);
            shifted[k] = theta[k] - std::numbers::pi / 2;
            const auto minus = copula_grid_probabilities(model, shifted);
            double g = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) g += 2.0 * (p[i] - target[i]) * inv * 0.5 * (plus[i] - minus[i]);
            grad[k] = g;
        });
        adam_step(opt, theta, grad);
    }
    out.final_loss = loss_of(copula_grid_probabilities(model, theta));
    out.initial_loss = out.history.empty() ? out.final_loss : out.history.front();
    out.model = model;
    return out;
}

}  // namespace dqgm

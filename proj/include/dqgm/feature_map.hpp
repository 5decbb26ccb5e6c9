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
#include <complex>
#include <cstddef>
#include <map>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dqgm/circuit.hpp"
#include "dqgm/qft.hpp"
#include "dqgm/state_vector.hpp"

namespace dqgm {

/// ZH: Hadamard then RZ on every qubit. X: a single RX per qubit.
/// Both give the same model once paired with their own ansatz frame.
enum class MapBasis { ZH, X };

inline const char *basis_name(MapBasis b) { return b == MapBasis::ZH ? "Z_H" : "X"; }

struct PhaseMapSpec {
    std::size_t n_qubits = 1;
    std::vector<double> xi;  // empty means all ones
    MapBasis basis = MapBasis::ZH;

    static PhaseMapSpec standard(std::size_t n, MapBasis basis = MapBasis::ZH) { return PhaseMapSpec{n, {}, basis}; }

    double squeeze(std::size_t q) const { return xi.empty() ? 1.0 : xi[q]; }

    /// Phase per unit x on qubit q (0-based): 2 pi / (2^(q+1) xi_q).
    double phase(std::size_t q) const {
        return 2.0 * std::numbers::pi / (std::ldexp(1.0, static_cast<int>(q + 1)) * squeeze(q));
    }

    bool unsqueezed() const {
        for (double v : xi) {
            if (v != 1.0) return false;
        }
        return true;
    }

    void validate() const {
        if (n_qubits < 1 || n_qubits > kMaxQubits) {
            throw std::invalid_argument("model.n_qubits: must lie in [1, " + std::to_string(kMaxQubits) + "]");
        }
        if (!xi.empty() && xi.size() != n_qubits) {
            throw std::invalid_argument("model.xi: expected " + std::to_string(n_qubits) + " entries");
        }
        for (double v : xi) {
            if (v == 0.0 || !std::isfinite(v)) {
                throw std::invalid_argument("model.xi: entries must be finite and nonzero");
            }
        }
    }

    /// Length of one period of the model in x.
    double period() const { return std::ldexp(1.0, static_cast<int>(n_qubits)); }
};

/// Circuit with one x slot whose output on |0...0> encodes x as per-qubit phases.
inline Circuit build_phase_map(const PhaseMapSpec &spec) {
    spec.validate();
    Circuit c(spec.n_qubits);
    for (std::size_t q = 0; q < spec.n_qubits; ++q) {
        if (spec.basis == MapBasis::ZH) {
            c.add(gates::h(q));
            c.add(gates::rz(q, Angle::of_x(spec.phase(q))));
        } else {
            c.add(gates::rx(q, Angle::of_x(spec.phase(q))));
        }
    }
    return c;
}

/// prod_q (|0> + exp(i phase_q x)|1>)/sqrt(2): the ZH map output with the
/// global phase removed.
inline StateVector latent_state(const PhaseMapSpec &spec, double x) {
    spec.validate();
    const std::size_t n = spec.n_qubits;
    std::vector<cplx> amps(std::size_t{1} << n);
    const double scale = std::pow(2.0, -0.5 * static_cast<double>(n));
    for (std::size_t i = 0; i < amps.size(); ++i) {
        double angle = 0.0;
        for (std::size_t q = 0; q < n; ++q) {
            if (i >> (n - 1 - q) & 1u) angle += spec.phase(q) * x;
        }
        amps[i] = std::polar(scale, angle);
    }
    return StateVector(n, std::move(amps));
}

/// Fixed circuit sending the latent state at integer l to the basis state |l>.
/// ZH: inverse QFT. X: a Hadamard layer followed by the inverse QFT.
inline Circuit build_basis_transform(const PhaseMapSpec &spec) {
    spec.validate();
    if (!spec.unsqueezed()) {
        throw std::invalid_argument("basis transform requires xi == 1 on every qubit");
    }
    Circuit c(spec.n_qubits);
    if (spec.basis == MapBasis::X) {
        for (std::size_t q = 0; q < spec.n_qubits; ++q) c.add(gates::h(q));
    }
    c.append(build_qft(spec.n_qubits, true));
    return c;
}

/// Register layout of the sparsified map: register qubits 0..N-1, then one
/// seed qubit and one ancilla.
struct SparsifiedLayout {
    std::size_t n_register;
    std::size_t split;
    std::size_t seed;
    std::size_t ancilla;
};

inline SparsifiedLayout sparsified_layout(const PhaseMapSpec &spec) {
    return SparsifiedLayout{spec.n_qubits, spec.n_qubits - 2, spec.n_qubits, spec.n_qubits + 1};
}

/// Map on N + 2 qubits in which register qubit `split` (must be N-2, the
/// second-lowest frequency) receives half of its phase locally and half from
/// a seed qubit. The seed phase is merged through a parity ancilla and an
/// x-dependent controlled-phase correction, leaving the register in the
/// direct map state and seed/ancilla in a state independent of the register.
inline Circuit build_sparsified_map(const PhaseMapSpec &spec, std::size_t split) {
    spec.validate();
    const std::size_t n = spec.n_qubits;
    if (n < 2) {
        throw std::invalid_argument("sparsification needs at least two register qubits");
    }
    if (split != n - 2) {
        throw std::invalid_argument("split must be register qubit " + std::to_string(n - 2));
    }
    const SparsifiedLayout lay = sparsified_layout(spec);
    const double low = spec.phase(n - 1);
    Circuit c(n + 2);
    auto encode = [&](std::size_t q, double coeff) {
        if (spec.basis == MapBasis::ZH) {
            c.add(gates::h(q));
            c.add(gates::rz(q, Angle::of_x(coeff)));
        } else {
            c.add(gates::rx(q, Angle::of_x(coeff)));
        }
    };
    for (std::size_t q = 0; q < n; ++q) {
        encode(q, q == split ? low : spec.phase(q));
    }
    encode(lay.seed, low);
    if (spec.basis == MapBasis::X) {
        c.add(gates::h(split));
        c.add(gates::h(lay.seed));
    }
    c.add(gates::cnot(split, lay.ancilla));
    c.add(gates::cnot(lay.seed, lay.ancilla));
    c.add(gates::cnot(split, lay.seed));
    c.add(gates::cphase(lay.ancilla, split, Angle::of_x(2.0 * low)));
    if (spec.basis == MapBasis::X) {
        c.add(gates::h(split));
    }
    return c;
}

/// p(x) = sum_k c_k exp(i k w x) with w = 2 pi / 2^N.
struct FrequencySpectrum {
    double base_frequency = 0.0;
    std::map<int, cplx> coefficients;

    double evaluate(double x) const {
        cplx s = 0.0;
        for (const auto &[k, c] : coefficients) {
            s += c * std::polar(1.0, k * base_frequency * x);
        }
        return s.real();
    }
};

/// Number of index pairs (l, l') in [0, 2^N) with l - l' = k.
inline std::size_t frequency_multiplicity(std::size_t n, int k) {
    const long dim = 1L << n;
    const long ak = std::abs(static_cast<long>(k));
    return ak >= dim ? 0 : static_cast<std::size_t>(dim - ak);
}

/// Fourier coefficients of the model whose state in the ZH latent frame has
/// amplitudes `amps`: c_k = 2^-N sum_{l - l' = k} conj(a_l) a_l'.
inline FrequencySpectrum extract_spectrum(std::span<const cplx> amps, std::size_t n) {
    const std::size_t dim = std::size_t{1} << n;
    if (amps.size() != dim) {
        throw std::invalid_argument("expected 2^" + std::to_string(n) + " amplitudes");
    }
    double norm = 0.0;
    for (const auto &a : amps) norm += std::norm(a);
    if (std::abs(norm - 1.0) > 1e-9) {
        throw std::invalid_argument("amplitudes are not normalized");
    }
    FrequencySpectrum s;
    s.base_frequency = 2.0 * std::numbers::pi / static_cast<double>(dim);
    const int top = static_cast<int>(dim) - 1;
    for (int k = -top; k <= top; ++k) {
        cplx c = 0.0;
        for (int l = std::max(0, k); l <= std::min(top, top + k); ++l) {
            c += std::conj(amps[l]) * amps[l - k];
        }
        s.coefficients[k] = c / static_cast<double>(dim);
    }
    return s;
}

}  // namespace dqgm

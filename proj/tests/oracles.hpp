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

// Brute-force reference implementations used only by the tests. Everything
// here is built from explicit dense matrices, independent of the library's
// matrix-free kernels.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "dqgm/circuit.hpp"
#include "dqgm/pauli.hpp"
#include "dqgm/state_vector.hpp"

namespace oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline Eigen::Matrix2cd single_qubit(dqgm::GateKind k, double a) {
    const cplx I(0, 1);
    Eigen::Matrix2cd m;
    const double r = 1.0 / std::sqrt(2.0);
    switch (k) {
        case dqgm::GateKind::H: m << r, r, r, -r; break;
        case dqgm::GateKind::X:
        case dqgm::GateKind::CNOT: m << 0, 1, 1, 0; break;
        case dqgm::GateKind::Y: m << 0, -I, I, 0; break;
        case dqgm::GateKind::Z:
        case dqgm::GateKind::CZ: m << 1, 0, 0, -1; break;
        case dqgm::GateKind::RX: m << std::cos(a / 2), -I * std::sin(a / 2), -I * std::sin(a / 2), std::cos(a / 2); break;
        case dqgm::GateKind::RY: m << std::cos(a / 2), -std::sin(a / 2), std::sin(a / 2), std::cos(a / 2); break;
        case dqgm::GateKind::RZ: m << std::exp(-I * (a / 2)), 0, 0, std::exp(I * (a / 2)); break;
        case dqgm::GateKind::CPHASE: m << 1, 0, 0, std::exp(I * a); break;
        default: m.setIdentity();
    }
    return m;
}

inline int bit(std::size_t index, std::size_t q, std::size_t n) { return static_cast<int>(index >> (n - 1 - q) & 1u); }

/// Full 2^n x 2^n unitary of one gate, assembled entry by entry.
inline Mat gate_matrix(const dqgm::GateOp &op, std::size_t n, double angle) {
    const std::size_t dim = std::size_t{1} << n;
    Mat m = Mat::Zero(dim, dim);
    if (op.kind == dqgm::GateKind::SWAP) {
        for (std::size_t j = 0; j < dim; ++j) {
            std::size_t i = j;
            const std::size_t a = op.targets[0], b = op.targets[1];
            const int ba = bit(j, a, n), bb = bit(j, b, n);
            if (ba != bb) {
                i ^= (std::size_t{1} << (n - 1 - a)) | (std::size_t{1} << (n - 1 - b));
            }
            m(i, j) = 1.0;
        }
        return m;
    }
    const Eigen::Matrix2cd u = single_qubit(op.kind, angle);
    const std::size_t t = op.targets[0];
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            if ((i ^ j) & ~(std::size_t{1} << (n - 1 - t))) continue;
            bool on = true;
            for (std::size_t c : op.controls) on = on && bit(j, c, n) == 1;
            if (on) {
                m(i, j) = u(bit(i, t, n), bit(j, t, n));
            } else {
                m(i, j) = i == j ? 1.0 : 0.0;
            }
        }
    }
    return m;
}

inline Mat circuit_matrix(const dqgm::Circuit &c, const std::vector<double> &theta = {}, double x = 0.0) {
    const std::size_t dim = std::size_t{1} << c.n_qubits();
    Mat u = Mat::Identity(dim, dim);
    for (const auto &op : c.ops()) {
        const double a = op.angle ? op.angle->value(theta, x) : 0.0;
        u = gate_matrix(op, c.n_qubits(), a) * u;
    }
    return u;
}

inline Vec to_vec(const dqgm::StateVector &s) {
    Vec v(s.dim());
    for (std::size_t i = 0; i < s.dim(); ++i) v(i) = s[i];
    return v;
}

inline dqgm::StateVector from_vec(std::size_t n, const Vec &v) {
    std::vector<cplx> a(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) a[i] = v(i);
    return dqgm::StateVector(n, a);
}

inline Mat kron(const Mat &a, const Mat &b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Dense matrix of a projected Pauli term via Kronecker products (qubit 0 leftmost).
inline Mat term_matrix(const dqgm::ProjectedPauliTerm &t, std::size_t n) {
    const cplx I(0, 1);
    Mat out = Mat::Identity(1, 1);
    for (std::size_t q = 0; q < n; ++q) {
        Mat f = Mat::Identity(2, 2);
        if (t.zero_projector_qubits.count(q)) {
            f << 1, 0, 0, 0;
        } else if (auto it = t.pauli.find(q); it != t.pauli.end()) {
            if (it->second == dqgm::Pauli::X) f << 0, 1, 1, 0;
            if (it->second == dqgm::Pauli::Y) f << 0, -I, I, 0;
            if (it->second == dqgm::Pauli::Z) f << 1, 0, 0, -1;
        }
        out = kron(out, f);
    }
    return t.coefficient * out;
}

inline Mat operator_matrix(const std::vector<dqgm::ProjectedPauliTerm> &op, std::size_t n) {
    const std::size_t dim = std::size_t{1} << n;
    Mat m = Mat::Zero(dim, dim);
    for (const auto &t : op) m += term_matrix(t, n);
    return m;
}

inline dqgm::StateVector random_state(std::size_t n, std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    std::vector<cplx> a(std::size_t{1} << n);
    double norm = 0.0;
    for (auto &v : a) {
        v = cplx(g(rng), g(rng));
        norm += std::norm(v);
    }
    for (auto &v : a) v /= std::sqrt(norm);
    return dqgm::StateVector(n, a);
}

inline std::vector<double> random_vector(std::size_t n, double lo, double hi, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto &x : v) x = u(rng);
    return v;
}

/// Unnormalized DFT matrix F(k, l) = 2^{-n/2} exp(2 pi i k l / 2^n).
inline Mat dft_matrix(std::size_t n) {
    const std::size_t dim = std::size_t{1} << n;
    Mat f(dim, dim);
    for (std::size_t k = 0; k < dim; ++k)
        for (std::size_t l = 0; l < dim; ++l)
            f(k, l) = std::polar(1.0 / std::sqrt(static_cast<double>(dim)),
                                 2.0 * std::numbers::pi * static_cast<double>(k * l) / static_cast<double>(dim));
    return f;
}

inline double central_difference(const std::function<double(double)> &f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double second_difference(const std::function<double(double)> &f, double x, double h) {
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

}  // namespace oracle

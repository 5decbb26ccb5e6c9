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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dqgm/model.hpp"
#include "dqgm/sampling.hpp"
#include "dqgm/state_prep.hpp"
#include "oracles.hpp"

using namespace dqgm;
using std::numbers::pi;

namespace {

DqgmModel random_model(std::size_t n, MapBasis basis, std::size_t depth, std::mt19937_64 &rng, std::size_t width = 0) {
    const AnsatzSpec spec{AnsatzKind::HEA_XZX_CNOT, n, depth, width == 0 ? n : width};
    return make_model(PhaseMapSpec::standard(n, basis), spec, oracle::random_vector(spec.n_params(), -pi, pi, rng));
}

DqgmModel identity_model(std::size_t n, MapBasis basis = MapBasis::X) {
    return make_model(PhaseMapSpec::standard(n, basis), Circuit(n));
}

// Overlap of the transformed latent state at x with basis state k, from the
// closed-form geometric sum (1/D) sum_l exp(2 pi i l (x - k) / D).
cplx dirichlet(double x, std::size_t k, std::size_t dim) {
    cplx s = 0.0;
    for (std::size_t l = 0; l < dim; ++l) {
        s += std::polar(1.0, 2.0 * pi * static_cast<double>(l) * (x - static_cast<double>(k)) / dim);
    }
    return s / static_cast<double>(dim);
}

oracle::Mat generator_matrix(const PhaseMapSpec &spec) {
    const std::size_t n = spec.n_qubits;
    std::vector<ProjectedPauliTerm> terms;
    for (std::size_t q = 0; q < n; ++q) terms.push_back({0.5 * spec.phase(q), {{q, Pauli::X}}, {}});
    return oracle::operator_matrix(terms, n);
}

oracle::Mat zero_projector(std::size_t n) {
    const std::size_t dim = std::size_t{1} << n;
    oracle::Mat c = oracle::Mat::Zero(dim, dim);
    c(0, 0) = 1.0;
    return c;
}

}  // namespace

TEST(EvalModel, SingleQubitIdentity) {
    const DqgmModel m = identity_model(1);
    EXPECT_NEAR(eval_model(m, 0.0), 1.0, 1e-15);
    EXPECT_NEAR(eval_model(m, 1.0), 0.0, 1e-15);
    for (double x : {0.2, 0.7, 1.3, -2.1}) EXPECT_NEAR(eval_model(m, x), std::pow(std::cos(pi * x / 2), 2), 1e-14);
}

TEST(EvalModel, TwoQubitIdentityAtOne) {
    EXPECT_NEAR(eval_model(identity_model(2), 1.0), 0.0, 1e-15);
}

TEST(EvalModel, IdentityWithHadamardMapIsFlat) {
    for (std::size_t n = 1; n <= 4; ++n) {
        const DqgmModel m = identity_model(n, MapBasis::ZH);
        for (double x : {0.0, 0.4, 3.0}) EXPECT_NEAR(eval_model(m, x), 1.0 / static_cast<double>(1u << n), 1e-14);
    }
}

TEST(EvalModel, MatchesDenseOracle) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> ux(0.0, 16.0);
    for (std::size_t n = 1; n <= 4; ++n) {
        for (MapBasis b : {MapBasis::ZH, MapBasis::X}) {
            const DqgmModel m = random_model(n, b, 2, rng);
            const oracle::Mat u = oracle::circuit_matrix(m.ansatz, m.theta);
            for (int rep = 0; rep < 10; ++rep) {
                const double x = ux(rng);
                const oracle::Mat f = oracle::circuit_matrix(build_phase_map(m.map), {}, x);
                EXPECT_NEAR(std::norm((u * f)(0, 0)), eval_model(m, x), 1e-12);
            }
        }
    }
}

TEST(EvalModel, BoundedInUnitInterval) {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> ux(-50.0, 50.0);
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t n = 1 + rep % 5;
        const DqgmModel m = random_model(n, rep % 2 ? MapBasis::X : MapBasis::ZH, 1, rng);
        const double p = eval_model(m, ux(rng));
        EXPECT_GE(p, 0.0);
        EXPECT_LE(p, 1.0);
    }
}

TEST(EvalModel, IntegerValuesSumToOne) {
    std::mt19937_64 rng(23);
    for (std::size_t n = 1; n <= 6; ++n) {
        const DqgmModel m = random_model(n, MapBasis::ZH, 2, rng);
        std::vector<double> xs(std::size_t{1} << n);
        for (std::size_t l = 0; l < xs.size(); ++l) xs[l] = static_cast<double>(l);
        double total = 0.0;
        for (const auto &v : eval_grid(m, xs)) total += v.p;
        EXPECT_NEAR(total, 1.0, 1e-12);
    }
}

TEST(EvalModel, RejectsMismatchedTheta) {
    std::mt19937_64 rng(1);
    DqgmModel m = random_model(2, MapBasis::ZH, 1, rng);
    m.theta.pop_back();
    EXPECT_THROW(eval_model(m, 0.0), std::invalid_argument);
}

TEST(SamplingCircuit, IntegerValuesEqualBitProbabilities) {
    std::mt19937_64 rng(24);
    double worst = 0.0;
    for (std::size_t n = 1; n <= 6; ++n) {
        for (MapBasis b : {MapBasis::ZH, MapBasis::X}) {
            for (int rep = 0; rep < 20; ++rep) {
                const DqgmModel m = random_model(n, b, 3, rng);
                const auto probs = simulate(build_sampling_circuit(m)).probabilities();
                for (std::size_t l = 0; l < probs.size(); ++l) {
                    worst = std::max(worst, std::abs(probs[l] - eval_model(m, static_cast<double>(l))));
                }
            }
        }
    }
    EXPECT_LT(worst, 1e-12);
}

TEST(SamplingCircuit, IdentityAnsatzOutcomes) {
    for (MapBasis b : {MapBasis::ZH, MapBasis::X}) {
        const auto probs = simulate(build_sampling_circuit(identity_model(4, b))).probabilities();
        if (b == MapBasis::X) {
            EXPECT_NEAR(probs[0], 1.0, 1e-12);
        } else {
            // The flat model puts equal weight on every integer.
            for (double p : probs) EXPECT_NEAR(p, 1.0 / 16.0, 1e-12);
        }
    }
}

TEST(SamplingCircuit, HistogramMatchesModel) {
    std::mt19937_64 rng(25);
    const DqgmModel m = random_model(4, MapBasis::ZH, 3, rng);
    const SampleSet s = sample(simulate(build_sampling_circuit(m)), 1000000, 99);
    std::vector<double> exact(16);
    for (std::size_t l = 0; l < 16; ++l) exact[l] = eval_model(m, static_cast<double>(l));
    EXPECT_LT(total_variation(s.frequencies(), exact), 0.01);
}

TEST(SamplingCircuit, ExtendedRegisterInterpolatesModel) {
    std::mt19937_64 rng(26);
    for (std::size_t n = 1; n <= 4; ++n) {
        const DqgmModel m = random_model(n, n % 2 ? MapBasis::X : MapBasis::ZH, 2, rng);
        for (std::size_t extra = 1; extra <= 3; ++extra) {
            const std::size_t big = n + extra;
            const auto probs = simulate(build_sampling_circuit(m, big)).probabilities();
            const double factor = std::ldexp(1.0, static_cast<int>(extra));
            for (std::size_t y = 0; y < probs.size(); ++y) {
                EXPECT_NEAR(probs[y], eval_model(m, extended_bin_position(y, n, big)) / factor, 1e-12);
            }
        }
    }
}

TEST(SamplingCircuit, ExtendedRegisterPreservesCoarseHistogram) {
    // Smooth latent state: two low-frequency amplitudes.
    const std::size_t n = 4;
    std::vector<double> a(16, 0.0);
    a[0] = 0.8;
    a[1] = 0.6;
    const DqgmModel m = make_model(PhaseMapSpec::standard(n), prepare_real_state(a).adjoint());
    for (std::size_t big : {6u, 8u, 10u}) {
        const auto fine = simulate(build_sampling_circuit(m, big)).probabilities();
        const auto coarse = aggregate_bins(fine, std::size_t{1} << (big - n));
        const auto direct = simulate(build_sampling_circuit(m)).probabilities();
        EXPECT_LT(total_variation(coarse, direct), 0.01) << big;
    }
}

TEST(SamplingCircuit, RejectsBadRegisters) {
    const DqgmModel m = identity_model(3);
    EXPECT_THROW(build_sampling_circuit(m, 2), std::invalid_argument);
    DqgmModel squeezed = m;
    squeezed.map.xi = {1.0, 2.0, 1.0};
    EXPECT_THROW(build_sampling_circuit(squeezed), std::invalid_argument);
}

TEST(Gqcbm, IdentityAnsatzAtIntegers) {
    for (MapBasis b : {MapBasis::ZH, MapBasis::X}) {
        const DqgmModel m = identity_model(3, b);
        EXPECT_NEAR(eval_gqcbm(m, 0.0), 1.0, 1e-12);
        for (int l = 1; l < 8; ++l) EXPECT_NEAR(eval_gqcbm(m, l), 0.0, 1e-12);
    }
}

TEST(Gqcbm, IntegersGiveBitstringProbabilities) {
    std::mt19937_64 rng(27);
    for (std::size_t n = 1; n <= 5; ++n) {
        for (MapBasis b : {MapBasis::ZH, MapBasis::X}) {
            const DqgmModel m = random_model(n, b, 2, rng);
            const auto probs = simulate(m.ansatz, m.theta).probabilities();
            for (std::size_t l = 0; l < probs.size(); ++l) {
                EXPECT_NEAR(eval_gqcbm(m, static_cast<double>(l)), probs[l], 1e-12);
            }
        }
    }
}

TEST(Gqcbm, HalfIntegersFollowDirichletKernel) {
    std::mt19937_64 rng(28);
    for (std::size_t n = 1; n <= 4; ++n) {
        const std::size_t dim = std::size_t{1} << n;
        const DqgmModel m = random_model(n, MapBasis::ZH, 2, rng);
        const StateVector b = simulate(m.ansatz, m.theta);
        for (std::size_t l = 0; l + 1 < dim; ++l) {
            const double x = static_cast<double>(l) + 0.5;
            cplx amp = 0.0;
            for (std::size_t k = 0; k < dim; ++k) amp += std::conj(dirichlet(x, k, dim)) * b[k];
            EXPECT_NEAR(eval_gqcbm(m, x), std::norm(amp), 1e-12);
            // The two neighbouring bitstrings carry most of the kernel weight.
            const double near = std::norm(dirichlet(x, l, dim)) + std::norm(dirichlet(x, l + 1, dim));
            EXPECT_GE(near, 0.8);
            for (std::size_t k = 0; k < dim; ++k) {
                if (k == l || k == l + 1) continue;
                EXPECT_LE(std::norm(dirichlet(x, k, dim)), std::norm(dirichlet(x, l, dim)));
            }
        }
    }
}

TEST(Derivatives, SingleQubitIdentityValues) {
    const DqgmModel m = identity_model(1);
    EXPECT_NEAR(eval_derivative(m, 0.0, 1), 0.0, 1e-14);
    EXPECT_NEAR(eval_derivative(m, 0.5, 1), -pi / 2, 1e-12);
    EXPECT_NEAR(eval_derivative(m, 0.0, 2), -pi * pi / 2, 1e-12);
    EXPECT_THROW(eval_derivative(m, 0.0, 3), std::invalid_argument);
}

TEST(Derivatives, MatchFiniteDifferences) {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> ux(0.0, 32.0);
    double worst1 = 0.0, worst2 = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 1 + rep % 5;
        const DqgmModel m = random_model(n, rep % 2 ? MapBasis::X : MapBasis::ZH, 2, rng);
        const double x = ux(rng);
        auto f = [&](double t) { return eval_model(m, t); };
        const PointValues v = eval_point(m, x, 2);
        worst1 = std::max(worst1, std::abs(v.dp - oracle::central_difference(f, x, 1e-4)));
        worst2 = std::max(worst2, std::abs(v.d2p - oracle::second_difference(f, x, 1e-3)));
    }
    EXPECT_LE(worst1, 1e-6);
    EXPECT_LE(worst2, 1e-4);
}

TEST(Derivatives, OperatorsMatchCommutatorForms) {
    const cplx I(0.0, 1.0);
    for (std::size_t n = 1; n <= 4; ++n) {
        PhaseMapSpec spec = PhaseMapSpec::standard(n);
        const DerivativeCostOps ops = build_derivative_ops(spec);
        const oracle::Mat mm = generator_matrix(spec);
        const oracle::Mat c = zero_projector(n);
        const oracle::Mat first = I * (mm * c - c * mm);
        const oracle::Mat second = 2.0 * mm * c * mm - mm * mm * c - c * mm * mm;
        EXPECT_LT((oracle::operator_matrix(ops.first, n) - first).norm(), 1e-12);
        EXPECT_LT((oracle::operator_matrix(ops.second, n) - second).norm(), 1e-12);
        EXPECT_EQ(ops.first.size(), n);
    }
}

TEST(Derivatives, GeneratorCommutesWithMap) {
    for (std::size_t n = 1; n <= 4; ++n) {
        const PhaseMapSpec spec = PhaseMapSpec::standard(n, MapBasis::X);
        const oracle::Mat mm = generator_matrix(spec);
        const oracle::Mat u = oracle::circuit_matrix(build_phase_map(spec), {}, 2.37);
        EXPECT_LT((mm * u - u * mm).norm(), 1e-12);
    }
}

TEST(Ansatz, ParameterCountsAndWindow) {
    for (std::size_t n = 1; n <= 6; ++n) {
        for (std::size_t w = 1; w <= n; ++w) {
            for (std::size_t d = 0; d <= 3; ++d) {
                const AnsatzSpec hea{AnsatzKind::HEA_XZX_CNOT, n, d, w};
                const Circuit c = build_ansatz(hea);
                EXPECT_EQ(c.n_params(), 3 * w * (d + 1));
                for (const auto &op : c.ops()) {
                    for (std::size_t q : op.targets) EXPECT_GE(q, n - w);
                    for (std::size_t q : op.controls) EXPECT_GE(q, n - w);
                }
                EXPECT_NO_THROW(validate_shift_rule(c));
                EXPECT_EQ(build_ansatz(AnsatzSpec{AnsatzKind::REALAMP_RY_CZ, n, d, w}).n_params(), w * (d + 1));
            }
        }
    }
    EXPECT_THROW(build_ansatz(AnsatzSpec{AnsatzKind::HEA_XZX_CNOT, 3, 1, 4}), std::invalid_argument);
    EXPECT_THROW(build_ansatz(AnsatzSpec{AnsatzKind::HEA_XZX_CNOT, 3, 1, 0}), std::invalid_argument);
}

TEST(Ansatz, RealAmplitudeCircuitStaysReal) {
    std::mt19937_64 rng(30);
    const AnsatzSpec spec{AnsatzKind::REALAMP_RY_CZ, 5, 3, 5};
    const StateVector s = simulate(build_ansatz(spec), oracle::random_vector(spec.n_params(), -pi, pi, rng));
    for (std::size_t i = 0; i < s.dim(); ++i) EXPECT_NEAR(s[i].imag(), 0.0, 1e-14);
}

TEST(Ansatz, CarryOverMapsByPosition) {
    std::mt19937_64 rng(31);
    const AnsatzSpec narrow{AnsatzKind::HEA_XZX_CNOT, 4, 2, 2};
    const auto theta = oracle::random_vector(narrow.n_params(), -pi, pi, rng);
    EXPECT_EQ(carry_over_params(narrow, theta, narrow), theta);
    const AnsatzSpec wide{AnsatzKind::HEA_XZX_CNOT, 4, 2, 4};
    const auto widened = carry_over_params(narrow, theta, wide);
    for (std::size_t layer = 0; layer <= 2; ++layer)
        for (std::size_t q = 0; q < 4; ++q)
            for (std::size_t r = 0; r < 3; ++r)
                EXPECT_EQ(widened[wide.param_index(layer, q, r)], q < 2 ? 0.0 : theta[narrow.param_index(layer, q, r)]);
    const AnsatzSpec deeper{AnsatzKind::HEA_XZX_CNOT, 4, 3, 2};
    const auto grown = carry_over_params(narrow, theta, deeper);
    for (std::size_t k = 0; k < theta.size(); ++k) EXPECT_EQ(grown[k], theta[k]);
    for (std::size_t k = theta.size(); k < grown.size(); ++k) EXPECT_EQ(grown[k], 0.0);
    EXPECT_THROW(carry_over_params(narrow, theta, AnsatzSpec{AnsatzKind::REALAMP_RY_CZ, 4, 2, 2}),
                 std::invalid_argument);
}

TEST(Ansatz, ShiftRuleRejectsSharedOrControlledSlots) {
    Circuit shared(2, 1);
    shared.add(gates::rx(0, Angle::parameter(0)));
    shared.add(gates::ry(1, Angle::parameter(0)));
    EXPECT_THROW(validate_shift_rule(shared), std::invalid_argument);
    Circuit controlled(2, 1);
    controlled.add(gates::cphase(0, 1, Angle::parameter(0)));
    EXPECT_THROW(validate_shift_rule(controlled), std::invalid_argument);
}

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

#include "dqgm/copula.hpp"
#include "oracles.hpp"

using namespace dqgm;
using std::numbers::pi;

namespace {

struct Correlations {
    double latent = 0.0;
    double data = 0.0;
    std::size_t mismatches = 0;
    std::vector<double> x1, x2;
};

Correlations sample_correlations(const CopulaCircuitSpec &spec, std::uint64_t shots, std::uint64_t seed) {
    const std::size_t n = spec.n_per_register;
    const auto pairs = sample_pairs(simulate(build_copula_sampler(spec)), n, shots, seed);
    Correlations c;
    std::vector<double> z1, z2;
    for (const auto &p : pairs) {
        z1.push_back(static_cast<double>(p.z1));
        z2.push_back(static_cast<double>(p.z2));
        c.mismatches += p.z1 != p.z2;
        const auto x = latent_to_data(p, n, {}, {});
        c.x1.push_back(x.first);
        c.x2.push_back(x.second);
    }
    c.latent = pearson(z1, z2);
    c.data = pearson(c.x1, c.x2);
    return c;
}

// Random register-local circuit built from fixed rotations and CNOTs.
std::vector<GateOp> random_local_ops(std::size_t n, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> a(-pi, pi);
    std::vector<GateOp> ops;
    for (int layer = 0; layer < 3; ++layer) {
        for (std::size_t q = 0; q < n; ++q) {
            ops.push_back(gates::rx(q, a(rng)));
            ops.push_back(gates::rz(q, a(rng)));
            ops.push_back(gates::ry(q, a(rng)));
        }
        for (std::size_t q = 0; q + 1 < n; ++q) ops.push_back(gates::cnot(q, q + 1));
    }
    return ops;
}

}  // namespace

TEST(CopulaSampler, SinglePairGivesCorrelatedBits) {
    const auto p = simulate(build_copula_sampler({1, {}, {}})).probabilities();
    EXPECT_NEAR(p[0b00], 0.5, 1e-15);
    EXPECT_NEAR(p[0b11], 0.5, 1e-15);
    EXPECT_EQ(p[0b01], 0.0);
    EXPECT_EQ(p[0b10], 0.0);
}

TEST(CopulaSampler, IdentityLocalsNeverDisagree) {
    const auto p = simulate(build_copula_sampler({6, {}, {}})).probabilities();
    double off = 0.0;
    for (std::uint64_t i = 0; i < p.size(); ++i) {
        const auto z = split_outcome(i, 6);
        if (z.z1 != z.z2) off += p[i];
    }
    EXPECT_EQ(off, 0.0);
    const auto c = sample_correlations({6, {}, {}}, 10000, 1);
    EXPECT_EQ(c.mismatches, 0u);
    EXPECT_EQ(c.x1, c.x2);
}

TEST(CopulaSampler, HadamardOnFirstRegisterDecorrelates) {
    const auto c = sample_correlations({6, hadamard_layer(6), {}}, 10000, 2);
    EXPECT_LT(std::abs(c.latent), 0.05);
    EXPECT_LT(std::abs(c.data), 0.05);
}

TEST(CopulaSampler, CorrelationOrdering) {
    const auto full = sample_correlations({6, {}, {}}, 10000, 3);
    const auto partial = sample_correlations({6, partial_rotation_layer(6, pi / 4, pi / 4), {}}, 10000, 3);
    const auto none = sample_correlations({6, hadamard_layer(6), {}}, 10000, 3);
    EXPECT_GT(full.data, partial.data);
    EXPECT_GT(partial.data, none.data);
}

TEST(CopulaSampler, MarginalsAreExactlyFlat) {
    std::mt19937_64 rng(17);
    for (std::size_t n = 1; n <= 4; ++n) {
        CopulaCircuitSpec spec{n, random_local_ops(n, rng), random_local_ops(n, rng)};
        const StateVector psi = simulate(build_copula_sampler(spec));
        const std::size_t dim = std::size_t{1} << n;
        // Reduced density matrices of both registers.
        double worst = 0.0;
        for (std::size_t a = 0; a < dim; ++a) {
            for (std::size_t b = 0; b < dim; ++b) {
                cplx r1 = 0.0, r2 = 0.0;
                for (std::size_t k = 0; k < dim; ++k) {
                    r1 += psi[a * dim + k] * std::conj(psi[b * dim + k]);
                    r2 += psi[k * dim + a] * std::conj(psi[k * dim + b]);
                }
                const double want = a == b ? 1.0 / dim : 0.0;
                worst = std::max({worst, std::abs(r1 - want), std::abs(r2 - want)});
            }
        }
        EXPECT_LT(worst, 1e-12) << "n=" << n;
    }
}

TEST(CopulaSampler, RejectsOpsOutsideRegister) {
    EXPECT_THROW(build_copula_sampler({2, {gates::h(2)}, {}}), std::invalid_argument);
    EXPECT_THROW(build_copula_sampler({2, {}, {gates::cnot(0, 3)}}), std::invalid_argument);
    EXPECT_THROW(build_copula_sampler({0, {}, {}}), std::invalid_argument);
}

TEST(CopulaSampler, SplitOutcomeUsesHighBitsForFirstRegister) {
    const auto z = split_outcome(0b101110, 3);
    EXPECT_EQ(z.z1, 0b101u);
    EXPECT_EQ(z.z2, 0b110u);
}

TEST(CopulaSampler, RejectsNonPositiveShots) {
    const StateVector psi = simulate(build_copula_sampler({2, {}, {}}));
    try {
        sample_pairs(psi, 2, 0, 1);
        FAIL() << "expected rejection";
    } catch (const std::invalid_argument &e) {
        EXPECT_NE(std::string(e.what()).find("shots"), std::string::npos);
    }
}

TEST(LatentToData, MidpointDequantization) {
    EXPECT_DOUBLE_EQ(dequantize(0, 3), 1.0 / 16.0);
    EXPECT_DOUBLE_EQ(dequantize(7, 3), 15.0 / 16.0);
    EXPECT_THROW(dequantize(8, 3), std::invalid_argument);
}

TEST(LatentToData, CentreMapsNearMean) {
    const std::size_t n = 5;
    const MarginalSpec m{0.5, 0.1};
    const auto x = latent_to_data({16, 15}, n, m, m);
    const double bin = normal_quantile(dequantize(16, n), m.mu, m.sigma) - normal_quantile(dequantize(15, n), m.mu, m.sigma);
    EXPECT_GT(x.first, 0.5);
    EXPECT_LT(x.first - 0.5, bin);
    EXPECT_NEAR(x.first - 0.5, 0.5 - x.second, 1e-15);
}

TEST(LatentToData, EqualLatentsGiveEqualData) {
    for (std::uint64_t z = 0; z < 64; ++z) {
        const auto x = latent_to_data({z, z}, 6, {0.5, 0.1}, {0.5, 0.1});
        EXPECT_EQ(x.first, x.second);
    }
}

TEST(LatentToData, DecorrelatedPipelineMatchesClassicalReference) {
    const std::size_t shots = 10000;
    const auto q = sample_correlations({6, hadamard_layer(6), {}}, shots, 5);
    const auto c = sample_bivariate_normal({0.5, 0.5, 0.1, 0.1, 0.0}, shots, 5);
    std::vector<double> c1, c2;
    for (const auto &p : c) {
        c1.push_back(p.first);
        c2.push_back(p.second);
    }
    EXPECT_LT(std::abs(q.data), 0.05);
    for (const auto *xs : {&q.x1, &q.x2}) {
        const double se = std::sqrt(2.0 * 0.01 / shots);
        EXPECT_LT(std::abs(sample_mean(*xs) - sample_mean(c1)), 4.0 * se);
        EXPECT_LT(std::abs(sample_mean(*xs) - 0.5), 0.005);
        EXPECT_LT(std::abs(std::sqrt(sample_variance(*xs)) - 0.1), 0.01);
        EXPECT_LT(std::abs(std::sqrt(sample_variance(*xs)) - std::sqrt(sample_variance(c2))), 0.01);
    }
}

TEST(CopulaModel, DirectEvaluationMatchesSamplingCircuit) {
    std::mt19937_64 rng(23);
    CopulaModel m{3, AnsatzSpec{AnsatzKind::HEA_XZX_CNOT, 3, 2, 3}, {}};
    m.theta = oracle::random_vector(m.n_params(), -pi, pi, rng);
    const auto grid = copula_grid_probabilities(m, m.theta);
    double worst = 0.0, total = 0.0;
    for (std::size_t a = 0; a < 8; ++a) {
        for (std::size_t b = 0; b < 8; ++b) {
            worst = std::max(worst, std::abs(eval_copula_model(m, a, b) - grid[a * 8 + b]));
            total += grid[a * 8 + b];
        }
    }
    EXPECT_LT(worst, 1e-12);
    EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(CopulaModel, UntrainedIdentityIsAntiDiagonalInLatentSpace) {
    // With zero angles the Bell layer pairs each latent value with its mirror
    // image under the phase maps, so all mass sits on z1 + z2 = 0 mod 2^n.
    CopulaModel m{3, AnsatzSpec{AnsatzKind::HEA_XZX_CNOT, 3, 1, 3}, {}};
    m.theta.assign(m.n_params(), 0.0);
    const auto grid = copula_grid_probabilities(m, m.theta);
    for (std::size_t a = 0; a < 8; ++a) {
        for (std::size_t b = 0; b < 8; ++b) {
            EXPECT_NEAR(grid[a * 8 + b], (a + b) % 8 == 0 ? 1.0 / 8.0 : 0.0, 1e-12) << a << "," << b;
        }
    }
}

TEST(CopulaModel, ValidationAndTargets) {
    CopulaModel m{3, AnsatzSpec{AnsatzKind::HEA_XZX_CNOT, 2, 1, 2}, {}};
    m.theta.assign(m.n_params(), 0.0);
    EXPECT_THROW(m.validate(), std::invalid_argument);
    const auto t = copula_target([](double, double) { return 1.0; }, 2);
    for (double v : t) EXPECT_DOUBLE_EQ(v, 1.0 / 16.0);
    EXPECT_THROW(copula_target([](double, double) { return 0.0; }, 2), std::invalid_argument);
}

TEST(CopulaTraining, UniformTargetGivesFlatSampler) {
    CopulaModel m{3, AnsatzSpec{AnsatzKind::HEA_XZX_CNOT, 3, 2, 3}, {}};
    const auto r = train_copula(m, [](double, double) { return 1.0; }, 300, 0.05, 5);
    const auto probs = copula_grid_probabilities(r.model, r.model.theta);
    const auto idx = sample_indices(probs, 100000, 9);
    std::vector<double> freq(64, 0.0);
    for (auto v : idx) freq[v] += 1.0 / 100000.0;
    EXPECT_LT(total_variation(freq, std::vector<double>(64, 1.0 / 64.0)), 0.05);
    EXPECT_LT(r.final_loss, r.initial_loss);
}

TEST(CopulaTraining, CorrelatedTargetLossDropsTenfold) {
    CopulaModel m{3, AnsatzSpec{AnsatzKind::HEA_XZX_CNOT, 3, 2, 3}, {}};
    const auto r = train_copula(m, [](double u, double v) { return gaussian_copula_density(u, v, 0.5); }, 300, 0.05, 5);
    EXPECT_LE(r.final_loss * 10.0, r.initial_loss);
    EXPECT_EQ(r.history.size(), 300u);
    const auto again = train_copula(m, [](double u, double v) { return gaussian_copula_density(u, v, 0.5); }, 300, 0.05, 5);
    EXPECT_EQ(again.model.theta, r.model.theta);
}

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

#include "dqgm/stochastics.hpp"

using namespace dqgm;
using std::numbers::pi;

namespace {

// Bisection on the complementary error function; slow but independent of the
// rational approximation under test. Above the median it bisects the upper
// tail against 1 - u, which is exact there.
double bisect_quantile(double u) {
    if (u > 0.5) return -bisect_quantile(1.0 - u);
    double lo = -40.0, hi = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (0.5 * std::erfc(-mid / std::sqrt(2.0)) < u) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

std::vector<double> firsts(const std::vector<std::pair<double, double>> &v) {
    std::vector<double> out;
    for (const auto &p : v) out.push_back(p.first);
    return out;
}

std::vector<double> seconds(const std::vector<std::pair<double, double>> &v) {
    std::vector<double> out;
    for (const auto &p : v) out.push_back(p.second);
    return out;
}

}  // namespace

TEST(GaussianPdf, PeakValues) {
    EXPECT_NEAR(gaussian_pdf(32.0, 32.0, 8.0), 1.0 / (8.0 * std::sqrt(2 * pi)), 1e-16);
    EXPECT_NEAR(gaussian_pdf(32.0, 32.0, 8.0), 0.049867, 1e-6);
    EXPECT_NEAR(gaussian_pdf(-1.0, -1.0, 1.0), 1.0 / std::sqrt(2 * pi), 1e-16);
}

TEST(GaussianPdf, SymmetricAboutMean) {
    for (double a : {0.1, 1.0, 7.5, 20.0}) {
        EXPECT_DOUBLE_EQ(gaussian_pdf(3.0 + a, 3.0, 2.0), gaussian_pdf(3.0 - a, 3.0, 2.0));
    }
}

TEST(GaussianPdf, DerivativesMatchFiniteDifferences) {
    const double h = 1e-4;
    for (double x : {-3.0, 0.4, 2.0, 5.5}) {
        const double fd1 = (gaussian_pdf(x + h, 1.0, 1.7) - gaussian_pdf(x - h, 1.0, 1.7)) / (2 * h);
        const double fd2 =
            (gaussian_pdf(x + h, 1.0, 1.7) - 2 * gaussian_pdf(x, 1.0, 1.7) + gaussian_pdf(x - h, 1.0, 1.7)) / (h * h);
        EXPECT_NEAR(gaussian_pdf_dx(x, 1.0, 1.7), fd1, 1e-9);
        EXPECT_NEAR(gaussian_pdf_dxx(x, 1.0, 1.7), fd2, 1e-6);
    }
}

TEST(NormalQuantile, MedianAndOneSigma) {
    EXPECT_NEAR(normal_quantile(0.5, 3.0, 2.0), 3.0, 1e-15);
    EXPECT_NEAR(normal_quantile(0.841345, 0.0, 1.0), 1.0, 1e-4);
}

TEST(NormalQuantile, MatchesBisectionOracle) {
    for (double u : {1e-12, 1e-8, 1e-6, 1e-3, 0.02425, 0.1, 0.3, 0.5, 0.7, 0.97575, 0.999, 1 - 1e-6, 1 - 1e-9}) {
        EXPECT_NEAR(standard_normal_quantile(u), bisect_quantile(u), 1e-9) << u;
    }
}

TEST(NormalQuantile, InverseOfCdf) {
    double worst_u = 0.0, worst_z = 0.0;
    for (int i = 0; i <= 10000; ++i) {
        const double u = 1e-6 + (1.0 - 2e-6) * i / 10000.0;
        worst_u = std::max(worst_u, std::abs(normal_cdf(standard_normal_quantile(u)) - u));
        const double z = -4.7 + 9.4 * i / 10000.0;
        worst_z = std::max(worst_z, std::abs(standard_normal_quantile(normal_cdf(z)) - z));
    }
    EXPECT_LE(worst_u, 1e-8);
    EXPECT_LE(worst_z, 1e-8);
}

TEST(NormalQuantile, MonotoneAndRejectsEndpoints) {
    double prev = -1e300;
    for (int i = 1; i < 1000; ++i) {
        const double q = normal_quantile(i / 1000.0, 0.5, 0.1);
        EXPECT_GT(q, prev);
        prev = q;
    }
    EXPECT_THROW(normal_quantile(0.0, 0.0, 1.0), std::invalid_argument);
    EXPECT_THROW(normal_quantile(1.0, 0.0, 1.0), std::invalid_argument);
    EXPECT_THROW(normal_quantile(0.5, 0.0, 0.0), std::invalid_argument);
}

TEST(NormalQuantile, ErfinvInvertsErf) {
    for (double y : {-0.999, -0.5, 0.0, 0.3, 0.9, 0.99999}) {
        EXPECT_NEAR(std::erf(erfinv(y)), y, 1e-12);
    }
    EXPECT_THROW(erfinv(1.0), std::invalid_argument);
}

TEST(CopulaDensity, IndependenceIsFlat) {
    for (double a : {0.01, 0.3, 0.77}) {
        for (double b : {0.2, 0.5, 0.999}) EXPECT_NEAR(gaussian_copula_density(a, b, 0.0), 1.0, 1e-15);
    }
}

TEST(CopulaDensity, SymmetricInArguments) {
    for (double rho : {-0.5, 0.3, 0.9}) {
        const double a = gaussian_copula_density(0.2, 0.85, rho);
        EXPECT_NEAR(a, gaussian_copula_density(0.85, 0.2, rho), 1e-13 * a);
    }
}

TEST(CopulaDensity, ConcentratesOnDiagonalAsCorrelationGrows) {
    double prev_on = 0.0, prev_off = 1e300;
    for (double rho : {0.5, 0.9, 0.99, 0.999, 0.9999}) {
        const double on = gaussian_copula_density(0.3, 0.3, rho);
        const double off = gaussian_copula_density(0.3, 0.7, rho);
        EXPECT_GT(on, prev_on);
        EXPECT_LT(off, prev_off);
        prev_on = on;
        prev_off = off;
    }
    EXPECT_LT(prev_off, 1e-10);
    EXPECT_THROW(gaussian_copula_density(0.3, 0.3, 1.0), std::invalid_argument);
}

TEST(CopulaDensity, IntegratesToOne) {
    const int n = 1000;
    for (double rho : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) s += gaussian_copula_density((i + 0.5) / n, (j + 0.5) / n, rho);
        }
        EXPECT_NEAR(s / (n * n), 1.0, 1e-3) << rho;
    }
}

TEST(EulerMaruyama, ZeroNoiseRelaxesExponentially) {
    const OuParams p{2.0, 1.5, 0.0};
    const double dt = 1e-4;
    const auto r = euler_maruyama(p, 10.0, 1.0, dt, 3, 1);
    for (double x : r.terminal) {
        EXPECT_NEAR(x, p.mean_at(10.0, 1.0), 10.0 * dt * 8.0);
    }
}

TEST(EulerMaruyama, DriftFreeMeanStaysPut) {
    const OuParams p{5.0, 0.0, 1.0};
    const std::size_t n = 10000;
    const auto r = euler_maruyama(p, 5.0, 1.0, 1e-2, n, 11);
    EXPECT_LT(std::abs(sample_mean(r.terminal) - 5.0), 3.0 * std::sqrt(1.0 / n));
}

TEST(EulerMaruyama, BrownianVarianceGrowsLinearly) {
    const double g2 = 64.0 / 0.144;
    const OuParams p{32.0, 0.0, g2};
    const auto r = euler_maruyama(p, 32.0, 0.3, 1e-3, 100000, 12, {0.1, 0.3});
    ASSERT_EQ(r.snapshots.size(), 2u);
    EXPECT_NEAR(sample_variance(r.snapshots[0].values), g2 * 0.1, 0.05 * g2 * 0.1);
    EXPECT_NEAR(sample_variance(r.snapshots[1].values), g2 * 0.3, 0.05 * g2 * 0.3);
}

TEST(EulerMaruyama, OuMomentsWithinThreeStandardErrors) {
    const OuParams p{1.0, 2.0, 0.5};
    const double x0 = 3.0, t = 1.0;
    const std::size_t n = 100000;
    const auto r = euler_maruyama(p, x0, t, 1e-3, n, 13);
    const double var = p.variance_at(t);
    const double se_mean = std::sqrt(var / n);
    const double se_var = var * std::sqrt(2.0 / (n - 1));
    EXPECT_LT(std::abs(sample_mean(r.terminal) - p.mean_at(x0, t)), 3.0 * se_mean);
    EXPECT_LT(std::abs(sample_variance(r.terminal) - var), 3.0 * se_var);
    EXPECT_NEAR(p.stationary_variance(), 0.125, 1e-15);
}

TEST(EulerMaruyama, SnapshotsRoundDownToWholeSteps) {
    const OuParams p{0.0, 0.0, 1.0};
    const auto r = euler_maruyama(p, 0.0, 1.0, 0.1, 4, 2, {0.0, 0.25, 1.0});
    ASSERT_EQ(r.snapshots.size(), 3u);
    EXPECT_NEAR(r.snapshots[0].time, 0.0, 1e-15);
    EXPECT_NEAR(r.snapshots[1].time, 0.2, 1e-15);
    EXPECT_NEAR(r.snapshots[2].time, 1.0, 1e-15);
    for (double v : r.snapshots[0].values) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(r.snapshots[2].values, r.terminal);
}

TEST(EulerMaruyama, SeededPathsAreReproducible) {
    const OuParams p{0.0, 1.0, 1.0};
    const auto a = euler_maruyama(p, 0.0, 0.5, 0.01, 50, 99);
    EXPECT_EQ(a.terminal, euler_maruyama(p, 0.0, 0.5, 0.01, 50, 99).terminal);
    EXPECT_NE(a.terminal, euler_maruyama(p, 0.0, 0.5, 0.01, 50, 98).terminal);
}

TEST(EulerMaruyama, RejectsNonPositiveStep) {
    for (double dt : {0.0, -0.1}) {
        try {
            euler_maruyama(OuParams{}, 0.0, 1.0, dt, 1, 1);
            FAIL() << "expected rejection";
        } catch (const std::invalid_argument &e) {
            EXPECT_NE(std::string(e.what()).find("dt"), std::string::npos);
        }
    }
}

TEST(BivariateNormal, IndependentPairsAreUncorrelated) {
    const auto s = sample_bivariate_normal({0.5, 0.5, 0.1, 0.1, 0.0}, 10000, 31);
    EXPECT_LT(std::abs(pearson(firsts(s), seconds(s))), 0.03);
}

TEST(BivariateNormal, StrongCorrelation) {
    const auto s = sample_bivariate_normal({0.5, 0.5, 0.1, 0.1, 0.999}, 10000, 32);
    EXPECT_GT(pearson(firsts(s), seconds(s)), 0.99);
    const auto neg = sample_bivariate_normal({0.5, 0.5, 0.1, 0.1, -0.5}, 10000, 33);
    EXPECT_NEAR(pearson(firsts(neg), seconds(neg)), -0.5, 0.03);
}

TEST(BivariateNormal, MarginalMoments) {
    const auto s = sample_bivariate_normal({0.5, 0.5, 0.1, 0.1, 0.0}, 10000, 34);
    const auto x1 = firsts(s);
    EXPECT_LT(std::abs(sample_mean(x1) - 0.5), 0.005);
    EXPECT_LT(std::abs(std::sqrt(sample_variance(x1)) - 0.1), 0.01);
}

TEST(BivariateNormal, RejectsInvalidParameters) {
    EXPECT_THROW(sample_bivariate_normal({0, 0, 1, 1, -1.0}, 10, 1), std::invalid_argument);
    EXPECT_THROW(sample_bivariate_normal({0, 0, 1, 1, 1.5}, 10, 1), std::invalid_argument);
    EXPECT_THROW(sample_bivariate_normal({0, 0, 0, 1, 0.0}, 10, 1), std::invalid_argument);
    EXPECT_NO_THROW(sample_bivariate_normal({0, 0, 1, 1, 1.0}, 10, 1));
}

TEST(Histogram, NormalizedCountsSumToOne) {
    const auto s = sample_bivariate_normal({0.0, 0.0, 1.0, 1.0, 0.0}, 5000, 4);
    const auto h = Histogram::build(firsts(s), -3.0, 3.0, 37);
    double total = 0.0;
    for (double c : h.counts) total += c;
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_TRUE(h.normalized);
    EXPECT_EQ(h.edges.size(), 38u);
}

TEST(Histogram, SingleValueFillsOneBin) {
    const std::vector<double> v(1000, 0.0);
    const auto h = Histogram::build(v, 0.0, 64.0, 64);
    EXPECT_EQ(h.counts[0], 1.0);
    for (std::size_t i = 1; i < 64; ++i) EXPECT_EQ(h.counts[i], 0.0);
}

TEST(Histogram, RawCountsAndRejections) {
    const auto h = Histogram::build({0.5, 1.5, 1.7, 5.0, -1.0}, 0.0, 2.0, 2, false);
    EXPECT_EQ(h.counts, (std::vector<double>{1.0, 2.0}));
    EXPECT_THROW(Histogram::build({}, 0.0, 1.0, 4), std::invalid_argument);
    EXPECT_THROW(Histogram::build({0.1}, 1.0, 1.0, 4), std::invalid_argument);
    EXPECT_THROW(Histogram::build({0.1}, 0.0, 1.0, 0), std::invalid_argument);
}

TEST(SampleStatistics, WrapAndMoments) {
    EXPECT_DOUBLE_EQ(wrap_periodic(-1.0, 64.0), 63.0);
    EXPECT_DOUBLE_EQ(wrap_periodic(130.5, 64.0), 2.5);
    EXPECT_DOUBLE_EQ(sample_mean({1.0, 2.0, 3.0}), 2.0);
    EXPECT_DOUBLE_EQ(sample_variance({1.0, 2.0, 3.0}), 1.0);
    EXPECT_DOUBLE_EQ(pearson({1.0, 2.0, 3.0}, {2.0, 4.0, 6.0}), 1.0);
    EXPECT_THROW(sample_mean({}), std::invalid_argument);
}

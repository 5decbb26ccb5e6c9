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
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dqgm/parallel.hpp"
#include "dqgm/rng.hpp"

namespace dqgm {

inline double gaussian_pdf(double x, double mu, double sigma) {
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("sigma must be positive");
    }
    const double z = (x - mu) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

inline double gaussian_pdf_dx(double x, double mu, double sigma) {
    return -(x - mu) / (sigma * sigma) * gaussian_pdf(x, mu, sigma);
}

inline double gaussian_pdf_dxx(double x, double mu, double sigma) {
    const double s2 = sigma * sigma;
    return ((x - mu) * (x - mu) / (s2 * s2) - 1.0 / s2) * gaussian_pdf(x, mu, sigma);
}

/// Standard normal CDF through erfc, accurate in both tails.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

namespace detail {

// Rational approximation of the standard normal quantile (Acklam), relative
// error about 1e-9 before refinement.
inline double quantile_guess(double p) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    const double lo = 0.02425;
    if (p < lo) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - lo) {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace detail

/// Standard normal quantile: rational guess plus one Newton step on the CDF.
inline double standard_normal_quantile(double u) {
    if (!(u > 0.0 && u < 1.0)) {
        throw std::invalid_argument("quantile argument must lie in (0, 1)");
    }
    double z = detail::quantile_guess(u);
    // Newton step; the upper tail is written through Phi(-z) to keep digits.
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    if (pdf > 0.0) {
        const double err = u < 0.5 ? normal_cdf(z) - u : (1.0 - u) - normal_cdf(-z);
        z -= err / pdf;
    }
    return z;
}

inline double normal_quantile(double u, double mu, double sigma) {
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("sigma must be positive");
    }
    return mu + sigma * standard_normal_quantile(u);
}

/// Inverse error function via the normal quantile: erfinv(y) = Q((y+1)/2)/sqrt(2).
inline double erfinv(double y) {
    if (!(y > -1.0 && y < 1.0)) {
        throw std::invalid_argument("erfinv argument must lie in (-1, 1)");
    }
    return standard_normal_quantile(0.5 * (y + 1.0)) / std::numbers::sqrt2;
}

/// Density of the bivariate Gaussian copula at (u1, u2) in (0,1)^2.
inline double gaussian_copula_density(double u1, double u2, double rho) {
    if (!(std::abs(rho) < 1.0)) {
        throw std::invalid_argument("copula correlation must satisfy |rho| < 1");
    }
    const double a = standard_normal_quantile(u1);
    const double b = standard_normal_quantile(u2);
    const double one = 1.0 - rho * rho;
    return std::exp(-(rho * rho * (a * a + b * b) - 2.0 * rho * a * b) / (2.0 * one)) / std::sqrt(one);
}

/// dX = -nu (X - mu) dt + sqrt(sigma2) dW. nu = 0 gives plain diffusion.
struct OuParams {
    double mu = 0.0;
    double nu = 0.0;
    double sigma2 = 1.0;

    double stationary_variance() const {
        if (!(nu > 0.0)) {
            throw std::invalid_argument("stationary variance needs nu > 0");
        }
        return sigma2 / (2.0 * nu);
    }
    double mean_at(double x0, double t) const { return mu + (x0 - mu) * std::exp(-nu * t); }
    double variance_at(double t) const {
        if (nu == 0.0) return sigma2 * t;
        return sigma2 / (2.0 * nu) * (1.0 - std::exp(-2.0 * nu * t));
    }
};

struct PathSnapshot {
    double time = 0.0;
    std::vector<double> values;
};

struct EulerMaruyamaResult {
    std::vector<double> terminal;
    std::vector<PathSnapshot> snapshots;
};

/// Euler-Maruyama integration of the OU SDE. Snapshot times are rounded down
/// to a multiple of dt. Path i uses substream i, so results do not depend on
/// the thread count.
inline EulerMaruyamaResult euler_maruyama(const OuParams &params, double x0, double t_end, double dt,
                                          std::size_t n_paths, std::uint64_t seed,
                                          const std::vector<double> &snapshot_times = {}) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("sde.dt: must be positive");
    }
    if (t_end < 0.0) {
        throw std::invalid_argument("sde.t_end: must be non-negative");
    }
    if (params.sigma2 < 0.0) {
        throw std::invalid_argument("sde.sigma2: must be non-negative");
    }
    const auto steps = static_cast<std::size_t>(std::floor(t_end / dt + 1e-9));
    std::vector<std::size_t> snap_steps;
    for (double t : snapshot_times) {
        if (t < 0.0 || t > t_end + 1e-12) {
            throw std::invalid_argument("sde.snapshot_times: outside [0, t_end]");
        }
        snap_steps.push_back(static_cast<std::size_t>(std::floor(t / dt + 1e-9)));
    }
    const std::uint64_t used = resolve_seed(seed);
    EulerMaruyamaResult out;
    out.terminal.assign(n_paths, x0);
    for (std::size_t s : snap_steps) out.snapshots.push_back({static_cast<double>(s) * dt, std::vector<double>(n_paths)});
    const double noise = std::sqrt(params.sigma2 * dt);
    parallel_for(n_paths, [&](std::size_t i) {
        Engine eng = make_stream(used, i);
        double x = x0;
        for (std::size_t j = 0; j < snap_steps.size(); ++j) {
            if (snap_steps[j] == 0) out.snapshots[j].values[i] = x;
        }
        for (std::size_t step = 1; step <= steps; ++step) {
            x += -params.nu * (x - params.mu) * dt + noise * standard_normal(eng);
            for (std::size_t j = 0; j < snap_steps.size(); ++j) {
                if (snap_steps[j] == step) out.snapshots[j].values[i] = x;
            }
        }
        out.terminal[i] = x;
    });
    return out;
}

/// Maps x onto [0, period).
inline double wrap_periodic(double x, double period) {
    double r = std::fmod(x, period);
    return r < 0.0 ? r + period : r;
}

inline double sample_mean(const std::vector<double> &v) {
    if (v.empty()) throw std::invalid_argument("empty sample");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

/// Unbiased sample variance.
inline double sample_variance(const std::vector<double> &v) {
    if (v.size() < 2) throw std::invalid_argument("variance needs at least two values");
    const double m = sample_mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

inline double pearson(const std::vector<double> &a, const std::vector<double> &b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw std::invalid_argument("pearson needs two equal-length samples");
    }
    const double ma = sample_mean(a), mb = sample_mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

struct BivariateNormalParams {
    double mu1 = 0.0, mu2 = 0.0;
    double sigma1 = 1.0, sigma2 = 1.0;
    double rho12 = 0.0;
};

/// Correlated pairs from the 2x2 Cholesky factor.
inline std::vector<std::pair<double, double>> sample_bivariate_normal(const BivariateNormalParams &p, std::size_t n,
                                                                      std::uint64_t seed) {
    if (!(p.sigma1 > 0.0 && p.sigma2 > 0.0)) {
        throw std::invalid_argument("standard deviations must be positive");
    }
    if (!(p.rho12 > -1.0 && p.rho12 <= 1.0)) {
        throw std::invalid_argument("correlation must lie in (-1, 1]");
    }
    const double tail = std::sqrt(std::max(0.0, 1.0 - p.rho12 * p.rho12));
    Engine eng = make_stream(resolve_seed(seed), 0);
    std::vector<std::pair<double, double>> out(n);
    for (auto &pair : out) {
        const double a = standard_normal(eng);
        const double b = standard_normal(eng);
        pair = {p.mu1 + p.sigma1 * a, p.mu2 + p.sigma2 * (p.rho12 * a + tail * b)};
    }
    return out;
}

/// Equal-width histogram on [lo, hi); values outside are dropped.
struct Histogram {
    std::vector<double> edges;
    std::vector<double> counts;
    bool normalized = false;

    static Histogram build(const std::vector<double> &values, double lo, double hi, std::size_t bins,
                           bool normalize = true) {
        if (bins == 0 || !(hi > lo)) {
            throw std::invalid_argument("histogram needs bins >= 1 and hi > lo");
        }
        Histogram h;
        h.edges.resize(bins + 1);
        for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / bins;
        h.counts.assign(bins, 0.0);
        double kept = 0.0;
        for (double v : values) {
            if (!(v >= lo && v < hi)) continue;
            auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
            h.counts[std::min(b, bins - 1)] += 1.0;
            kept += 1.0;
        }
        if (normalize) {
            if (kept == 0.0) throw std::invalid_argument("histogram of an empty sample");
            for (double &c : h.counts) c /= kept;
            h.normalized = true;
        }
        return h;
    }
};

}  // namespace dqgm

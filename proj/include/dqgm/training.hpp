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

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dqgm/ansatz.hpp"
#include "dqgm/model.hpp"
#include "dqgm/parallel.hpp"
#include "dqgm/rng.hpp"
#include "dqgm/state_prep.hpp"

namespace dqgm {

/// Sample points in x, optionally paired with target density values.
struct TrainingGrid {
    std::vector<double> points;
    std::optional<std::vector<double>> target;

    std::size_t size() const { return points.size(); }

    void validate() const {
        if (points.empty()) {
            throw std::invalid_argument("training grid is empty");
        }
        for (std::size_t i = 1; i < points.size(); ++i) {
            if (!(points[i] > points[i - 1])) {
                throw std::invalid_argument("training grid points must be strictly increasing");
            }
        }
        if (target && target->size() != points.size()) {
            throw std::invalid_argument("training grid target has the wrong length");
        }
    }
};

/// Integers 0, stride, 2*stride, ... below 2^n.
inline TrainingGrid integer_grid(std::size_t n_qubits, std::size_t stride = 1) {
    if (stride == 0) throw std::invalid_argument("grid stride must be >= 1");
    TrainingGrid g;
    const std::size_t dim = std::size_t{1} << n_qubits;
    for (std::size_t l = 0; l < dim; l += stride) g.points.push_back(static_cast<double>(l));
    return g;
}

/// `count` evenly spaced points covering [lo, hi] inclusive.
inline TrainingGrid uniform_grid(double lo, double hi, std::size_t count) {
    if (count == 0) throw std::invalid_argument("grid needs at least one point");
    TrainingGrid g;
    g.points.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        g.points[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    return g;
}

/// Out-of-sample grid: `factor` times as many points over the same span.
inline TrainingGrid generalized_grid(const TrainingGrid &grid, std::size_t factor = 20) {
    grid.validate();
    return uniform_grid(grid.points.front(), grid.points.back(), factor * grid.size());
}

/// Fills grid.target with pdf(x) scaled so that the pdf summed over the
/// integers 0..2^n-1 equals one, the normalization the model obeys.
inline void attach_target(TrainingGrid &grid, const std::function<double(double)> &pdf, std::size_t n_qubits) {
    double total = 0.0;
    for (std::size_t l = 0; l < (std::size_t{1} << n_qubits); ++l) total += pdf(static_cast<double>(l));
    if (!(total > 0.0)) {
        throw std::invalid_argument("target has no mass on the integer grid");
    }
    std::vector<double> t(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) t[i] = pdf(grid.points[i]) / total;
    grid.target = std::move(t);
}

/// Stationary Ornstein-Uhlenbeck constraint: nu p + nu (x - mu) p' + (sigma2/2) p'' = 0.
struct FpeParams {
    double mu = 0.0;
    double sigma2 = 1.0;
    double nu = 1.0;
};

struct LossBundle {
    TrainingGrid data_grid;
    std::optional<FpeParams> fpe;
    double eta = 1.0;

    void validate() const {
        data_grid.validate();
        if (eta < 0.0 || !std::isfinite(eta)) {
            throw std::invalid_argument("loss.eta: must be finite and >= 0");
        }
    }
};

struct LossValues {
    double data = 0.0;
    double diff = 0.0;
    double full = 0.0;
};

inline double fpe_residual(const PointValues &v, double x, const FpeParams &f) {
    return f.nu * v.p + f.nu * (x - f.mu) * v.dp + 0.5 * f.sigma2 * v.d2p;
}

/// Residual for an arbitrary function given with its first two derivatives.
inline double fpe_residual(const std::function<double(double)> &p, const std::function<double(double)> &dp,
                           const std::function<double(double)> &d2p, double x, const FpeParams &f) {
    return fpe_residual(PointValues{p(x), dp(x), d2p(x)}, x, f);
}

inline double fpe_residual(const DqgmModel &model, double x, const FpeParams &f) {
    return fpe_residual(eval_point(model, x, 2), x, f);
}

inline double data_loss(std::span<const PointValues> values, const TrainingGrid &grid) {
    if (!grid.target) {
        throw std::invalid_argument("data loss needs target values on the grid");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double d = values[i].p - (*grid.target)[i];
        s += d * d;
    }
    return s / static_cast<double>(grid.size());
}

inline double data_loss(const DqgmModel &model, const TrainingGrid &grid) {
    grid.validate();
    const auto v = eval_grid(model, grid.points, 0);
    return data_loss(v, grid);
}

inline double diff_loss(std::span<const PointValues> values, const TrainingGrid &grid, const FpeParams &f) {
    double s = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double r = fpe_residual(values[i], grid.points[i], f);
        s += r * r;
    }
    return s / static_cast<double>(grid.size());
}

inline double diff_loss(const DqgmModel &model, const TrainingGrid &grid, const FpeParams &f) {
    grid.validate();
    const auto v = eval_grid(model, grid.points, 2);
    return diff_loss(v, grid, f);
}

/// Loss value plus its sensitivity to every (p, dp, d2p) on the grid.
struct GridLoss {
    double value = 0.0;
    std::vector<PointValues> sensitivity;
};

/// Gradient of sum_i s_i . V_i(theta) where V_i are the model values at xs[i]
/// and s_i are fixed sensitivities. Each component uses the two-term shift
/// rule (theta_k +- pi/2), exact for the rotation gates an ansatz is made of.
inline std::vector<double> theta_gradient(const ModelEvaluator &ev, std::span<const double> theta,
                                          std::span<const double> xs, std::span<const PointValues> sensitivity,
                                          int max_order) {
    if (theta.size() != ev.n_params()) {
        throw std::invalid_argument("parameter vector does not match the model");
    }
    if (sensitivity.size() != xs.size()) {
        throw std::invalid_argument("sensitivity vector does not match the grid");
    }
    std::vector<double> grad(theta.size(), 0.0);
    parallel_for(theta.size(), [&](std::size_t k) {
        std::vector<double> shifted(theta.begin(), theta.end());
        shifted[k] = theta[k] + std::numbers::pi / 2;
        const auto plus = ev.grid(shifted, xs, max_order);
        shifted[k] = theta[k] - std::numbers::pi / 2;
        const auto minus = ev.grid(shifted, xs, max_order);
        double g = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const PointValues &s = sensitivity[i];
            g += s.p * (plus[i].p - minus[i].p);
            if (max_order >= 1) g += s.dp * (plus[i].dp - minus[i].dp);
            if (max_order >= 2) g += s.d2p * (plus[i].d2p - minus[i].d2p);
        }
        grad[k] = 0.5 * g;
    });
    return grad;
}

/// Gradient of a loss built from grid values. `loss` maps the current values
/// to a GridLoss; the model must satisfy the shift-rule preconditions.
inline std::vector<double> theta_gradient(const DqgmModel &model, std::span<const double> xs, int max_order,
                                          const std::function<GridLoss(const std::vector<PointValues> &)> &loss) {
    validate_shift_rule(model.ansatz);
    ModelEvaluator ev(model);
    const GridLoss l = loss(ev.grid(model.theta, xs, max_order));
    return theta_gradient(ev, model.theta, xs, l.sensitivity, max_order);
}

/// Data, diff and full loss with sensitivities of the objective
/// data + (use_diff ? eta * diff : 0).
inline GridLoss objective(std::span<const PointValues> values, const LossBundle &b, bool use_diff,
                          LossValues *report = nullptr) {
    const TrainingGrid &g = b.data_grid;
    const double inv = 1.0 / static_cast<double>(g.size());
    GridLoss out;
    out.sensitivity.assign(g.size(), PointValues{});
    LossValues lv;
    if (g.target) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double d = values[i].p - (*g.target)[i];
            lv.data += d * d * inv;
            out.sensitivity[i].p += 2.0 * d * inv;
        }
    }
    if (b.fpe) {
        const FpeParams &f = *b.fpe;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double x = g.points[i];
            const double r = fpe_residual(values[i], x, f);
            lv.diff += r * r * inv;
            if (use_diff) {
                const double w = 2.0 * b.eta * r * inv;
                out.sensitivity[i].p += w * f.nu;
                out.sensitivity[i].dp += w * f.nu * (x - f.mu);
                out.sensitivity[i].d2p += w * 0.5 * f.sigma2;
            }
        }
    }
    lv.full = lv.data + b.eta * lv.diff;
    out.value = lv.data + (use_diff ? b.eta * lv.diff : 0.0);
    if (report) *report = lv;
    return out;
}

inline LossValues evaluate_losses(const DqgmModel &model, const LossBundle &b) {
    b.validate();
    const auto v = eval_grid(model, b.data_grid.points, b.fpe ? 2 : 0);
    LossValues lv;
    objective(v, b, false, &lv);
    return lv;
}

struct OptimizerState {
    std::size_t step = 0;
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::vector<double> m;
    std::vector<double> v;
};

/// One bias-corrected Adam update, in place.
inline void adam_step(OptimizerState &s, std::vector<double> &theta, std::span<const double> grad) {
    if (grad.size() != theta.size()) {
        throw std::invalid_argument("gradient and parameter vector differ in length");
    }
    if (s.m.empty()) {
        s.m.assign(theta.size(), 0.0);
        s.v.assign(theta.size(), 0.0);
    }
    if (s.m.size() != theta.size()) {
        throw std::invalid_argument("optimizer state sized for a different parameter vector");
    }
    ++s.step;
    const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
    const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
    for (std::size_t k = 0; k < theta.size(); ++k) {
        s.m[k] = s.beta1 * s.m[k] + (1.0 - s.beta1) * grad[k];
        s.v[k] = s.beta2 * s.v[k] + (1.0 - s.beta2) * grad[k] * grad[k];
        theta[k] -= s.lr * (s.m[k] / c1) / (std::sqrt(s.v[k] / c2) + s.eps);
    }
}

struct Stage {
    AnsatzSpec ansatz;
    std::size_t epochs = 0;
    double lr = 0.01;
    LossBundle loss;
    bool use_diff = false;  // optimize data + eta * diff instead of data alone
};

struct Schedule {
    std::vector<Stage> stages;
    bool carry_over = true;
    double init_scale = 0.1;

    void validate(std::size_t n_qubits) const {
        if (stages.empty()) {
            throw std::invalid_argument("training schedule has no stages");
        }
        for (std::size_t s = 0; s < stages.size(); ++s) {
            const Stage &st = stages[s];
            if (st.ansatz.n_qubits != n_qubits) {
                throw std::invalid_argument("stage " + std::to_string(s) + ": ansatz register differs from the model");
            }
            st.ansatz.validate();
            st.loss.validate();
            if (!(st.lr > 0.0)) {
                throw std::invalid_argument("training.lr: must be positive");
            }
            if (s > 0 && st.ansatz.width < stages[s - 1].ansatz.width) {
                throw std::invalid_argument("stage widths must be non-decreasing");
            }
        }
    }
};

struct HistoryRow {
    std::size_t stage = 0;
    std::size_t epoch = 0;  // counted across stages
    LossValues loss;
};

struct StageOutcome {
    LossValues initial;
    LossValues final;
    std::vector<double> theta;  // angles after the stage's last update
};

struct TrainResult {
    DqgmModel model;
    std::vector<HistoryRow> history;
    std::vector<StageOutcome> stages;
};

inline std::vector<double> random_theta(std::size_t n, double scale, std::uint64_t seed, std::uint64_t stream = 0) {
    Engine e = make_stream(resolve_seed(seed), stream);
    std::vector<double> t(n);
    for (auto &v : t) v = uniform(e, -scale, scale);
    return t;
}

/// Runs every stage with Adam. Rows of the history hold the losses at the
/// start of each epoch; stage outcomes hold the losses before the first and
/// after the last update. An empty `initial_theta` draws angles uniformly in
/// [-init_scale, init_scale].
inline TrainResult run_schedule(const Schedule &sched, const PhaseMapSpec &map, std::vector<double> initial_theta,
                                std::uint64_t seed) {
    map.validate();
    sched.validate(map.n_qubits);
    TrainResult out;
    std::vector<double> theta = std::move(initial_theta);
    for (std::size_t s = 0; s < sched.stages.size(); ++s) {
        const Stage &st = sched.stages[s];
        if (s == 0) {
            if (theta.empty()) theta = random_theta(st.ansatz.n_params(), sched.init_scale, seed, 0);
        } else if (sched.carry_over) {
            theta = carry_over_params(sched.stages[s - 1].ansatz, theta, st.ansatz);
        } else {
            theta = random_theta(st.ansatz.n_params(), sched.init_scale, seed, s);
        }
        DqgmModel model = make_model(map, st.ansatz, theta);
        validate_shift_rule(model.ansatz);
        const ModelEvaluator ev(model);
        const auto &xs = st.loss.data_grid.points;
        const int order = st.loss.fpe ? 2 : 0;
        const int grad_order = st.use_diff && st.loss.fpe ? 2 : 0;
        OptimizerState opt;
        opt.lr = st.lr;
        StageOutcome outcome;
        for (std::size_t e = 0; e < st.epochs; ++e) {
            const auto values = ev.grid(theta, xs, order);
            LossValues lv;
            const GridLoss gl = objective(values, st.loss, st.use_diff, &lv);
            if (e == 0) outcome.initial = lv;
            out.history.push_back({s, out.history.size(), lv});
            adam_step(opt, theta, theta_gradient(ev, theta, xs, gl.sensitivity, grad_order));
        }
        objective(ev.grid(theta, xs, order), st.loss, st.use_diff, &outcome.final);
        if (st.epochs == 0) outcome.initial = outcome.final;
        outcome.theta = theta;
        out.stages.push_back(outcome);
        out.model = make_model(map, st.ansatz, theta);
    }
    return out;
}

/// Result of matching the model's Fourier coefficients to a target.
struct FourierInit {
    std::size_t n_qubits = 0;   // register size N; the period is 2^N
    std::size_t L = 0;          // active low-frequency qubits
    std::vector<double> coeffs; // cosine-series coefficients b_k, k = 0..2^L-1
    std::vector<double> amplitudes;
    Circuit circuit{1};         // |0..0> -> sum_l a_l |l> on L qubits
    double residual = 0.0;      // max_k |c_k(a) - b_k|

    /// Truncated series b_0 + 2 sum_k b_k cos(k w x) with w = 2 pi / 2^N.
    double series(double x) const {
        const double w = 2.0 * std::numbers::pi / std::ldexp(1.0, static_cast<int>(n_qubits));
        double s = coeffs[0];
        for (std::size_t k = 1; k < coeffs.size(); ++k) s += 2.0 * coeffs[k] * std::cos(static_cast<double>(k) * w * x);
        return s;
    }

    /// ZH model on N qubits whose window holds the prepared state.
    DqgmModel model() const {
        Circuit ansatz(n_qubits);
        ansatz.append(circuit.adjoint(), n_qubits - L);
        return make_model(PhaseMapSpec::standard(n_qubits), ansatz);
    }
};

namespace detail {

// c_k(a) = 2^-N sum_l a_l a_{l-k} for real a.
inline std::vector<double> autocorrelation(const std::vector<double> &a, double scale) {
    const std::size_t d = a.size();
    std::vector<double> c(d, 0.0);
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t l = k; l < d; ++l) c[k] += a[l] * a[l - k];
    for (auto &v : c) v *= scale;
    return c;
}

}  // namespace detail

/// Fits real amplitudes a (length 2^L) so that the model
/// p(x) = 2^-N |sum_l a_l e^{-i l w x}|^2 has the cosine coefficients of
/// `target` over one period [0, 2^N), truncated to |k| < 2^L. The target is
/// rescaled so that its mean over the period is 2^-N.
inline FourierInit fourier_initialize(const std::function<double(double)> &target, std::size_t n_qubits,
                                      std::size_t L) {
    if (L < 1 || L > n_qubits || n_qubits > 20) {
        throw std::invalid_argument("fourier init needs 1 <= L <= N <= 20");
    }
    const std::size_t d = std::size_t{1} << L;
    const double period = std::ldexp(1.0, static_cast<int>(n_qubits));
    const double scale = 1.0 / period;
    const double w = 2.0 * std::numbers::pi / period;
    // Periodic trapezoid rule; exact for trig polynomials of degree < samples.
    const std::size_t samples = std::max<std::size_t>(4096, 64 * d);
    std::vector<double> vals(samples);
    for (std::size_t i = 0; i < samples; ++i) vals[i] = target(period * static_cast<double>(i) / samples);
    std::vector<double> b(d, 0.0);
    for (std::size_t k = 0; k < d; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < samples; ++i) s += vals[i] * std::cos(w * static_cast<double>(k) * period * i / samples);
        b[k] = s / static_cast<double>(samples);
    }
    if (!(b[0] > 0.0)) {
        throw std::invalid_argument("target has non-positive mean; normalization is unreachable");
    }
    const double norm = scale / b[0];
    for (auto &v : b) v *= norm;

    FourierInit fi;
    fi.n_qubits = n_qubits;
    fi.L = L;
    fi.coeffs = b;

    // Initial guess by spectral factorization: the Laurent polynomial
    // sum_k period*b_|k| z^k has roots in pairs (r, 1/conj r); keeping the
    // inner half gives a real polynomial A with |A(e^{it})|^2 equal to it.
    std::vector<double> a(d, 0.0);
    std::size_t m = d - 1;
    while (m > 0 && std::abs(b[m]) <= 1e-15 * b[0]) --m;
    if (m == 0) {
        a[0] = 1.0;
    } else {
        const std::size_t deg = 2 * m;
        std::vector<double> q(deg + 1);
        for (std::size_t j = 0; j <= deg; ++j) {
            q[j] = period * b[j > m ? j - m : m - j];
        }
        Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(static_cast<long>(deg), static_cast<long>(deg));
        for (std::size_t i = 1; i < deg; ++i) comp(static_cast<long>(i), static_cast<long>(i - 1)) = 1.0;
        for (std::size_t j = 0; j < deg; ++j) comp(static_cast<long>(j), static_cast<long>(deg - 1)) = -q[j] / q[deg];
        const Eigen::VectorXcd roots = Eigen::EigenSolver<Eigen::MatrixXd>(comp, false).eigenvalues();
        std::vector<std::complex<double>> sorted(roots.data(), roots.data() + roots.size());
        std::sort(sorted.begin(), sorted.end(),
                  [](const auto &u, const auto &v) { return std::abs(u) < std::abs(v); });
        std::vector<std::complex<double>> poly{1.0};
        for (std::size_t i = 0; i < m; ++i) {
            std::vector<std::complex<double>> next(poly.size() + 1, 0.0);
            for (std::size_t j = 0; j < poly.size(); ++j) {
                next[j + 1] += poly[j];
                next[j] -= sorted[i] * poly[j];
            }
            poly = std::move(next);
        }
        double nn = 0.0;
        for (std::size_t j = 0; j < poly.size(); ++j) {
            a[j] = poly[j].real();
            nn += a[j] * a[j];
        }
        const bool usable = std::isfinite(nn) && nn > 0.0;
        for (std::size_t j = 0; j < d; ++j) a[j] = usable ? a[j] / std::sqrt(nn) : (j == 0 ? 1.0 : 0.0);
    }

    // Levenberg-Marquardt on r_k = c_k(a) - b_k.
    using Eigen::MatrixXd;
    using Eigen::VectorXd;
    auto residual = [&](const std::vector<double> &x) {
        const auto c = detail::autocorrelation(x, scale);
        VectorXd r(d);
        for (std::size_t k = 0; k < d; ++k) r(k) = c[k] - b[k];
        return r;
    };
    VectorXd r = residual(a);
    double lambda = 1e-3;
    for (int it = 0; it < 500 && r.lpNorm<Eigen::Infinity>() > 1e-16; ++it) {
        MatrixXd jac = MatrixXd::Zero(d, d);
        for (std::size_t k = 0; k < d; ++k) {
            for (std::size_t j = 0; j < d; ++j) {
                double v = 0.0;
                if (j >= k) v += a[j - k];
                if (j + k < d) v += a[j + k];
                jac(k, j) = scale * v;
            }
        }
        const MatrixXd jtj = jac.transpose() * jac;
        const VectorXd g = jac.transpose() * r;
        bool improved = false;
        for (int tries = 0; tries < 30; ++tries) {
            MatrixXd sys = jtj;
            sys.diagonal().array() += lambda * (jtj.diagonal().array() + 1e-30);
            const VectorXd step = sys.ldlt().solve(g);
            std::vector<double> trial(d);
            for (std::size_t j = 0; j < d; ++j) trial[j] = a[j] - step(j);
            const VectorXd rt = residual(trial);
            if (rt.squaredNorm() < r.squaredNorm()) {
                a = trial;
                r = rt;
                lambda = std::max(lambda / 10.0, 1e-15);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!improved) break;
    }

    // Canonical form: drop leading zeros (a shift leaves the model unchanged)
    // and make the first amplitude positive.
    double total = 0.0;
    for (double v : a) total += v * v;
    for (auto &v : a) v /= std::sqrt(total);
    std::size_t lead = 0;
    while (lead + 1 < d && std::abs(a[lead]) < 1e-12) ++lead;
    std::vector<double> canon(d, 0.0);
    for (std::size_t j = lead; j < d; ++j) canon[j - lead] = a[j];
    if (canon[0] < 0.0) {
        for (auto &v : canon) v = -v;
    }
    const auto c = detail::autocorrelation(canon, scale);
    for (std::size_t k = 0; k < d; ++k) fi.residual = std::max(fi.residual, std::abs(c[k] - b[k]));
    fi.amplitudes = canon;
    fi.circuit = prepare_real_state(canon);
    return fi;
}

}  // namespace dqgm

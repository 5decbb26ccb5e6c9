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
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dqgm/model.hpp"
#include "dqgm/parallel.hpp"
#include "dqgm/training.hpp"

namespace dqgm {

/// Drift f(x, t) and squared diffusion g^2(x, t) with the x-derivatives the
/// forward equation needs.
struct SdeCoefficients {
    using Fn = std::function<double(double, double)>;
    Fn drift;
    Fn drift_dx;
    Fn diffusion_sq;
    Fn diffusion_sq_dx;
    Fn diffusion_sq_dxx;

    static SdeCoefficients ornstein_uhlenbeck(double mu, double nu, double sigma2) {
        auto zero = [](double, double) { return 0.0; };
        return {[mu, nu](double x, double) { return -nu * (x - mu); }, [nu](double, double) { return -nu; },
                [sigma2](double, double) { return sigma2; }, zero, zero};
    }

    static SdeCoefficients pure_diffusion(double g2) { return ornstein_uhlenbeck(0.0, 0.0, g2); }
};

/// -d/dx[f p] + 1/2 d^2/dx^2[g^2 p] from the model value and derivatives.
inline double fpe_rhs(const PointValues &v, double x, double t, const SdeCoefficients &c) {
    const double f = c.drift(x, t), fx = c.drift_dx(x, t);
    const double g = c.diffusion_sq(x, t), gx = c.diffusion_sq_dx(x, t), gxx = c.diffusion_sq_dxx(x, t);
    return -(fx * v.p + f * v.dp) + 0.5 * (gxx * v.p + 2.0 * gx * v.dp + g * v.d2p);
}

inline double fpe_rhs(const DqgmModel &model, double x, double t, const SdeCoefficients &c) {
    return fpe_rhs(eval_point(model, x, 2), x, t, c);
}

/// J[i][k] = d p(x_i) / d theta_k by the shift rule.
inline Eigen::MatrixXd jacobian(const ModelEvaluator &ev, std::span<const double> theta, std::span<const double> xs) {
    Eigen::MatrixXd jac(xs.size(), theta.size());
    parallel_for(theta.size(), [&](std::size_t k) {
        std::vector<double> shifted(theta.begin(), theta.end());
        shifted[k] = theta[k] + std::numbers::pi / 2;
        const auto plus = ev.grid(shifted, xs, 0);
        shifted[k] = theta[k] - std::numbers::pi / 2;
        const auto minus = ev.grid(shifted, xs, 0);
        for (std::size_t i = 0; i < xs.size(); ++i) jac(i, k) = 0.5 * (plus[i].p - minus[i].p);
    });
    return jac;
}

inline Eigen::MatrixXd jacobian(const DqgmModel &model, std::span<const double> xs) {
    validate_shift_rule(model.ansatz);
    return jacobian(ModelEvaluator(model), model.theta, xs);
}

/// Solves (J^T J + lambda I) g = J^T F. With lambda == 0 a rank-deficient
/// system is reported instead of being regularized behind the caller's back.
inline Eigen::VectorXd solve_normal_equations(const Eigen::MatrixXd &jac, const Eigen::VectorXd &f, double lambda) {
    if (lambda < 0.0) {
        throw std::invalid_argument("evolution.regularization: must be >= 0");
    }
    Eigen::MatrixXd a = jac.transpose() * jac;
    const Eigen::VectorXd rhs = jac.transpose() * f;
    if (lambda == 0.0) {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
        if (lu.rank() < a.rows()) {
            throw std::runtime_error("normal equations are singular (rank " + std::to_string(lu.rank()) + " of " +
                                     std::to_string(a.rows()) + "); set a positive regularization");
        }
        return lu.solve(rhs);
    }
    a.diagonal().array() += lambda;
    return a.ldlt().solve(rhs);
}

struct EvolutionConfig {
    double dt = 0.001;
    std::size_t steps = 300;
    double t0 = 0.0;
    TrainingGrid grid;
    double regularization = 1e-8;
    std::vector<double> snapshot_times;  // offsets from t0, rounded down to whole steps

    void validate() const {
        if (!(dt > 0.0)) {
            throw std::invalid_argument("evolution.dt: must be positive");
        }
        if (regularization < 0.0) {
            throw std::invalid_argument("evolution.regularization: must be >= 0");
        }
        grid.validate();
        const double horizon = dt * static_cast<double>(steps);
        for (double t : snapshot_times) {
            if (t < 0.0 || t > horizon + 1e-9) {
                throw std::invalid_argument("evolution.snapshot_times: outside [0, dt * steps]");
            }
        }
    }
};

struct EvolutionTrace {
    std::vector<double> times;                      // absolute time after each step
    std::vector<double> residual_norms;             // |J gamma - F| per step
    std::vector<double> snapshot_times;             // absolute times of the snapshots
    std::vector<std::vector<double>> theta_snapshots;
    std::vector<double> normalization;              // sum of p over the integers at each snapshot
};

inline double integer_mass(const DqgmModel &model) {
    std::vector<double> xs(std::size_t{1} << model.n_qubits());
    for (std::size_t l = 0; l < xs.size(); ++l) xs[l] = static_cast<double>(l);
    double s = 0.0;
    for (const auto &v : eval_grid(model, xs, 0)) s += v.p;
    return s;
}

/// Forward-Euler march theta <- theta + dt * gamma with gamma the least-squares
/// solution of J gamma = F, F the forward-equation right-hand side on the grid.
inline EvolutionTrace evolve(const DqgmModel &initial, const EvolutionConfig &cfg, const SdeCoefficients &coeffs) {
    cfg.validate();
    validate_shift_rule(initial.ansatz);
    DqgmModel model = initial;
    const ModelEvaluator ev(model);
    const auto &xs = cfg.grid.points;
    std::vector<std::size_t> snap_steps;
    for (double t : cfg.snapshot_times) snap_steps.push_back(static_cast<std::size_t>(std::floor(t / cfg.dt + 1e-9)));

    EvolutionTrace trace;
    auto record = [&](std::size_t step) {
        for (std::size_t s : snap_steps) {
            if (s == step) {
                trace.snapshot_times.push_back(cfg.t0 + static_cast<double>(step) * cfg.dt);
                trace.theta_snapshots.push_back(model.theta);
                trace.normalization.push_back(integer_mass(model));
            }
        }
    };
    record(0);
    for (std::size_t step = 1; step <= cfg.steps; ++step) {
        const double t = cfg.t0 + static_cast<double>(step - 1) * cfg.dt;
        const auto values = ev.grid(model.theta, xs, 2);
        Eigen::VectorXd f(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) f(i) = fpe_rhs(values[i], xs[i], t, coeffs);
        const Eigen::MatrixXd jac = jacobian(ev, model.theta, xs);
        const Eigen::VectorXd gamma = solve_normal_equations(jac, f, cfg.regularization);
        const double res = (jac * gamma - f).norm();
        if (!std::isfinite(res)) {
            throw std::runtime_error("evolution diverged at step " + std::to_string(step));
        }
        for (std::size_t k = 0; k < model.theta.size(); ++k) model.theta[k] += cfg.dt * gamma(k);
        trace.times.push_back(t + cfg.dt);
        trace.residual_norms.push_back(res);
        record(step);
    }
    return trace;
}

}  // namespace dqgm

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

// End-to-end pipelines shared by the command-line tool and the acceptance
// checks. Everything here is deterministic given the seed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dqgm/copula.hpp"
#include "dqgm/evolution.hpp"
#include "dqgm/feature_map.hpp"
#include "dqgm/model.hpp"
#include "dqgm/rng.hpp"
#include "dqgm/sampling.hpp"
#include "dqgm/stochastics.hpp"
#include "dqgm/training.hpp"

namespace dqgm {

// Substream ids so independent random draws inside one run never overlap.
namespace streams {
inline constexpr std::uint64_t kSampling = 101;
inline constexpr std::uint64_t kReference = 102;
inline constexpr std::uint64_t kCopula = 103;
inline constexpr std::uint64_t kSpectrum = 104;
}  // namespace streams

inline void require_shots(std::uint64_t shots, const std::string &field) {
    if (shots < 1) throw std::invalid_argument(field + ": must be >= 1");
}

/// Fit of a Gaussian density on the integer register.
struct GaussianTask {
    std::size_t n_qubits = 6;
    MapBasis basis = MapBasis::ZH;
    AnsatzKind kind = AnsatzKind::HEA_XZX_CNOT;
    std::size_t depth = 4;
    std::size_t width = 3;
    double mu = 32.0;
    double sigma = 8.0;
    std::size_t stride = 1;
    std::size_t epochs = 1000;
    double lr = 0.01;
    double init_scale = 0.1;

    AnsatzSpec ansatz() const { return AnsatzSpec{kind, n_qubits, depth, width}; }

    void validate() const {
        ansatz().validate();
        if (!(sigma > 0.0)) throw std::invalid_argument("target.sigma: must be positive");
        if (!(lr > 0.0)) throw std::invalid_argument("training.lr: must be positive");
        if (stride < 1) throw std::invalid_argument("training.stride: must be >= 1");
    }
};

struct PdfFit {
    TrainResult result;
    TrainingGrid grid;         // training points with rescaled targets
    TrainingGrid generalized;  // 20x denser, same rescaling
    double data_mse = 0.0;
    double generalized_mse = 0.0;
};

inline PdfFit fit_gaussian(const GaussianTask &task, std::uint64_t seed) {
    task.validate();
    const auto pdf = [&](double x) { return gaussian_pdf(x, task.mu, task.sigma); };
    PdfFit fit;
    fit.grid = integer_grid(task.n_qubits, task.stride);
    attach_target(fit.grid, pdf, task.n_qubits);
    fit.generalized = generalized_grid(fit.grid);
    attach_target(fit.generalized, pdf, task.n_qubits);
    Schedule sched;
    sched.init_scale = task.init_scale;
    sched.stages.push_back(Stage{task.ansatz(), task.epochs, task.lr, LossBundle{fit.grid, std::nullopt, 1.0}, false});
    fit.result = run_schedule(sched, PhaseMapSpec::standard(task.n_qubits, task.basis), {}, seed);
    fit.data_mse = data_loss(fit.result.model, fit.grid);
    fit.generalized_mse = data_loss(fit.result.model, fit.generalized);
    return fit;
}

/// Outcome frequencies of the bit-basis sampler; with extended_qubits > N the
/// fine bins are returned (2^M of them).
inline std::vector<double> sample_model_frequencies(const DqgmModel &model, std::uint64_t shots, std::uint64_t seed,
                                                    std::size_t extended_qubits = 0) {
    require_shots(shots, "sampling.shots");
    const auto probs = simulate(build_sampling_circuit(model, extended_qubits)).probabilities();
    const auto idx = sample_indices(probs, shots, resolve_seed(seed));
    std::vector<double> freq(probs.size(), 0.0);
    for (auto v : idx) freq[v] += 1.0;
    for (auto &f : freq) f /= static_cast<double>(shots);
    return freq;
}

/// Target probabilities on the integers, rescaled to sum to one.
inline std::vector<double> integer_target(const std::function<double(double)> &pdf, std::size_t n_qubits) {
    TrainingGrid g = integer_grid(n_qubits);
    attach_target(g, pdf, n_qubits);
    return *g.target;
}

/// Two-stage fit of the stationary Ornstein-Uhlenbeck density: data loss
/// first, then data plus the weighted stationary-equation residual.
struct FpeTask {
    std::size_t n_qubits = 6;
    AnsatzKind kind = AnsatzKind::HEA_XZX_CNOT;
    std::size_t depth = 4;
    std::size_t width = 3;
    FpeParams ou{32.0, 64.0, 1.0};
    std::size_t stride = 2;
    std::size_t stage1_epochs = 200;
    double stage1_lr = 0.01;
    std::size_t stage2_epochs = 1200;
    double stage2_lr = 0.005;
    double eta = 1.0;
    double init_scale = 0.1;

    AnsatzSpec ansatz() const { return AnsatzSpec{kind, n_qubits, depth, width}; }
    double stationary_sigma() const { return std::sqrt(ou.sigma2 / (2.0 * ou.nu)); }

    void validate() const {
        ansatz().validate();
        if (!(ou.nu > 0.0) || !(ou.sigma2 > 0.0)) {
            throw std::invalid_argument("fpe.nu and fpe.sigma2: must be positive");
        }
        if (eta < 0.0 || !std::isfinite(eta)) throw std::invalid_argument("loss.eta: must be finite and >= 0");
        if (stride < 1) throw std::invalid_argument("fpe.stride: must be >= 1");
    }
};

struct FpeQuality {
    double max_dp_error = 0.0;  // against the rescaled analytic derivative, generalized grid
    double residual_rms = 0.0;  // stationary residual, generalized grid
};

struct FpeFit {
    TrainResult result;
    DqgmModel stage1_model;
    TrainingGrid grid;
    TrainingGrid generalized;
    FpeQuality stage1;
    FpeQuality stage2;
};

inline FpeQuality fpe_quality(const DqgmModel &model, const FpeTask &task, const TrainingGrid &dense) {
    const double sigma = task.stationary_sigma();
    double total = 0.0;
    for (std::size_t l = 0; l < (std::size_t{1} << task.n_qubits); ++l) {
        total += gaussian_pdf(static_cast<double>(l), task.ou.mu, sigma);
    }
    const auto vals = eval_grid(model, dense.points, 2);
    FpeQuality q;
    double ss = 0.0;
    for (std::size_t i = 0; i < dense.size(); ++i) {
        const double x = dense.points[i];
        q.max_dp_error = std::max(q.max_dp_error, std::abs(vals[i].dp - gaussian_pdf_dx(x, task.ou.mu, sigma) / total));
        const double r = fpe_residual(vals[i], x, task.ou);
        ss += r * r;
    }
    q.residual_rms = std::sqrt(ss / static_cast<double>(dense.size()));
    return q;
}

inline FpeFit fit_fpe(const FpeTask &task, std::uint64_t seed) {
    task.validate();
    const double sigma = task.stationary_sigma();
    const auto pdf = [&](double x) { return gaussian_pdf(x, task.ou.mu, sigma); };
    FpeFit fit;
    fit.grid = integer_grid(task.n_qubits, task.stride);
    attach_target(fit.grid, pdf, task.n_qubits);
    fit.generalized = generalized_grid(integer_grid(task.n_qubits));
    attach_target(fit.generalized, pdf, task.n_qubits);
    const LossBundle bundle{fit.grid, task.ou, task.eta};
    Schedule sched;
    sched.init_scale = task.init_scale;
    sched.stages.push_back(Stage{task.ansatz(), task.stage1_epochs, task.stage1_lr, bundle, false});
    sched.stages.push_back(Stage{task.ansatz(), task.stage2_epochs, task.stage2_lr, bundle, true});
    const PhaseMapSpec map = PhaseMapSpec::standard(task.n_qubits);
    fit.result = run_schedule(sched, map, {}, seed);
    fit.stage1_model = make_model(map, task.ansatz(), fit.result.stages[0].theta);
    fit.stage1 = fpe_quality(fit.stage1_model, task, fit.generalized);
    fit.stage2 = fpe_quality(fit.result.model, task, fit.generalized);
    return fit;
}

/// Pretraining at t0 followed by implicit evolution under pure diffusion,
/// compared against an Euler-Maruyama ensemble started from a point mass.
struct EvolutionTask {
    GaussianTask pretrain{6, MapBasis::ZH, AnsatzKind::REALAMP_RY_CZ, 1, 2, 32.0, 8.0, 1, 500, 0.01, 0.1};
    double t0 = 0.144;
    double variance_at_t0 = 64.0;
    double diffusion_rate = 0.0;  // g^2; 0 derives it as variance_at_t0 / t0
    double dt = 0.001;
    std::size_t steps = 300;
    std::vector<double> snapshot_offsets{0.0, 0.1, 0.3};
    double regularization = 1e-8;
    std::uint64_t shots = 1000000;
    std::uint64_t reference_paths = 1000000;

    double rate() const { return diffusion_rate > 0.0 ? diffusion_rate : variance_at_t0 / t0; }

    void validate() const {
        pretrain.validate();
        if (!(dt > 0.0)) throw std::invalid_argument("evolution.dt: must be positive");
        if (!(t0 > 0.0)) throw std::invalid_argument("evolution.t0: must be positive");
        if (diffusion_rate < 0.0) throw std::invalid_argument("evolution.diffusion_rate: must be >= 0");
        if (!(rate() > 0.0)) throw std::invalid_argument("evolution.variance_at_t0: must be positive");
        require_shots(shots, "evolution.shots");
        require_shots(reference_paths, "evolution.reference_paths");
    }
};

struct EvolutionSnapshot {
    double time = 0.0;
    std::vector<double> theta;
    std::vector<double> frequencies;  // sampled outcome frequencies on the integers
    double model_variance = 0.0;      // from samples
    double exact_variance = 0.0;      // from the outcome probabilities
    double reference_variance = 0.0;  // Euler-Maruyama, wrapped onto the register
    double normalization = 0.0;
};

struct EvolutionRun {
    PdfFit pretrain;
    EvolutionTrace trace;
    std::vector<EvolutionSnapshot> snapshots;
};

inline double distribution_variance(const std::vector<double> &probs) {
    double m = 0.0, m2 = 0.0;
    for (std::size_t l = 0; l < probs.size(); ++l) {
        m += static_cast<double>(l) * probs[l];
        m2 += static_cast<double>(l) * static_cast<double>(l) * probs[l];
    }
    return m2 - m * m;
}

inline EvolutionRun run_evolution(const EvolutionTask &task, std::uint64_t seed) {
    task.validate();
    EvolutionRun run;
    run.pretrain = fit_gaussian(task.pretrain, seed);
    EvolutionConfig cfg;
    cfg.dt = task.dt;
    cfg.steps = task.steps;
    cfg.t0 = task.t0;
    cfg.grid = integer_grid(task.pretrain.n_qubits);
    cfg.regularization = task.regularization;
    cfg.snapshot_times = task.snapshot_offsets;
    const double g2 = task.rate();
    run.trace = evolve(run.pretrain.result.model, cfg, SdeCoefficients::pure_diffusion(g2));

    std::vector<double> ref_times;
    for (double t : run.trace.snapshot_times) ref_times.push_back(t);
    const double horizon = ref_times.empty() ? task.t0 : *std::max_element(ref_times.begin(), ref_times.end());
    const auto em = euler_maruyama(OuParams{task.pretrain.mu, 0.0, g2}, task.pretrain.mu, horizon, task.dt,
                                   task.reference_paths, derive_seed(resolve_seed(seed), streams::kReference), ref_times);
    const double period = std::ldexp(1.0, static_cast<int>(task.pretrain.n_qubits));
    for (std::size_t j = 0; j < run.trace.snapshot_times.size(); ++j) {
        EvolutionSnapshot s;
        s.time = run.trace.snapshot_times[j];
        s.theta = run.trace.theta_snapshots[j];
        s.normalization = run.trace.normalization[j];
        DqgmModel m = run.pretrain.result.model;
        m.theta = s.theta;
        s.exact_variance = distribution_variance(simulate(build_sampling_circuit(m)).probabilities());
        s.frequencies = sample_model_frequencies(
            m, task.shots, derive_seed(derive_seed(resolve_seed(seed), streams::kSampling), j));
        s.model_variance = distribution_variance(s.frequencies);
        if (task.shots > 1) {
            s.model_variance *= static_cast<double>(task.shots) / static_cast<double>(task.shots - 1);
        }
        std::vector<double> wrapped;
        wrapped.reserve(em.snapshots[j].values.size());
        for (double v : em.snapshots[j].values) wrapped.push_back(wrap_periodic(v, period));
        s.reference_variance = wrapped.size() > 1 ? sample_variance(wrapped) : 0.0;
        run.snapshots.push_back(std::move(s));
    }
    return run;
}

/// Bell-paired registers with fixed local layers, sampled in the bit basis
/// and mapped to data space through normal quantiles.
enum class CopulaLocals { Identity, Hadamard, PartialRotation };

inline const char *copula_locals_name(CopulaLocals l) {
    switch (l) {
        case CopulaLocals::Identity: return "identity";
        case CopulaLocals::Hadamard: return "hadamard";
        case CopulaLocals::PartialRotation: return "partial_rotation";
    }
    return "?";
}

struct CopulaTask {
    std::size_t n_per_register = 6;
    CopulaLocals locals = CopulaLocals::Identity;
    double x_angle = std::numbers::pi / 4;
    double y_angle = std::numbers::pi / 4;
    std::uint64_t shots = 10000;
    MarginalSpec marginal1;
    MarginalSpec marginal2;

    void validate() const {
        if (n_per_register < 1 || 2 * n_per_register > kMaxQubits) {
            throw std::invalid_argument("copula.n_per_register: must lie in [1, " + std::to_string(kMaxQubits / 2) + "]");
        }
        require_shots(shots, "copula.shots");
        if (!(marginal1.sigma > 0.0) || !(marginal2.sigma > 0.0)) {
            throw std::invalid_argument("copula.marginals: sigma must be positive");
        }
    }

    CopulaCircuitSpec circuit() const {
        CopulaCircuitSpec spec{n_per_register, {}, {}};
        if (locals == CopulaLocals::Hadamard) spec.register1_local_ops = hadamard_layer(n_per_register);
        if (locals == CopulaLocals::PartialRotation) {
            spec.register1_local_ops = partial_rotation_layer(n_per_register, x_angle, y_angle);
        }
        return spec;
    }
};

struct CopulaSample {
    std::vector<LatentPair> latent;
    std::vector<std::pair<double, double>> data;
    double latent_correlation = 0.0;
    double data_correlation = 0.0;
    double mismatch_fraction = 0.0;
    double mean1 = 0.0, sd1 = 0.0, mean2 = 0.0, sd2 = 0.0;
};

inline CopulaSample summarize_pairs(std::vector<LatentPair> latent, std::size_t n, const MarginalSpec &m1,
                                    const MarginalSpec &m2) {
    CopulaSample out;
    out.latent = std::move(latent);
    std::vector<double> z1, z2, x1, x2;
    std::size_t mismatches = 0;
    for (const auto &p : out.latent) {
        z1.push_back(static_cast<double>(p.z1));
        z2.push_back(static_cast<double>(p.z2));
        mismatches += p.z1 != p.z2;
        const auto x = latent_to_data(p, n, m1, m2);
        out.data.push_back(x);
        x1.push_back(x.first);
        x2.push_back(x.second);
    }
    out.mismatch_fraction = static_cast<double>(mismatches) / static_cast<double>(out.latent.size());
    if (out.latent.size() > 1) {
        out.latent_correlation = pearson(z1, z2);
        out.data_correlation = pearson(x1, x2);
        out.sd1 = std::sqrt(sample_variance(x1));
        out.sd2 = std::sqrt(sample_variance(x2));
    }
    out.mean1 = sample_mean(x1);
    out.mean2 = sample_mean(x2);
    return out;
}

inline CopulaSample run_copula(const CopulaTask &task, std::uint64_t seed) {
    task.validate();
    const auto state = simulate(build_copula_sampler(task.circuit()));
    auto pairs = sample_pairs(state, task.n_per_register, task.shots, derive_seed(resolve_seed(seed), streams::kCopula));
    return summarize_pairs(std::move(pairs), task.n_per_register, task.marginal1, task.marginal2);
}

/// Euler-Maruyama ensemble summary at chosen times.
struct SdeTask {
    OuParams params{32.0, 0.0, 64.0 / 0.144};
    double x0 = 32.0;
    double dt = 0.001;
    std::vector<double> times{0.144, 0.244, 0.444};
    std::uint64_t paths = 100000;
    double wrap_period = 64.0;  // 0 keeps raw values
    std::size_t bins = 64;

    void validate() const {
        if (!(dt > 0.0)) throw std::invalid_argument("sde.dt: must be positive");
        require_shots(paths, "sde.paths");
        if (params.sigma2 < 0.0) throw std::invalid_argument("sde.sigma2: must be >= 0");
        if (times.empty()) throw std::invalid_argument("sde.times: need at least one time");
        if (bins < 1) throw std::invalid_argument("sde.bins: must be >= 1");
        if (wrap_period < 0.0) throw std::invalid_argument("sde.wrap_period: must be >= 0");
    }
};

struct SdeSnapshotSummary {
    double time = 0.0;
    double mean = 0.0;
    double variance = 0.0;
    double analytic_mean = 0.0;
    double analytic_variance = 0.0;
    Histogram histogram;
    std::vector<double> values;
};

inline std::vector<SdeSnapshotSummary> run_sde_reference(const SdeTask &task, std::uint64_t seed) {
    task.validate();
    const double horizon = *std::max_element(task.times.begin(), task.times.end());
    const auto em = euler_maruyama(task.params, task.x0, horizon, task.dt, task.paths,
                                   derive_seed(resolve_seed(seed), streams::kReference), task.times);
    std::vector<SdeSnapshotSummary> out;
    for (const auto &s : em.snapshots) {
        SdeSnapshotSummary sum;
        sum.time = s.time;
        sum.values = s.values;
        if (task.wrap_period > 0.0) {
            for (auto &v : sum.values) v = wrap_periodic(v, task.wrap_period);
        }
        sum.mean = sample_mean(sum.values);
        sum.variance = sum.values.size() > 1 ? sample_variance(sum.values) : 0.0;
        sum.analytic_mean = task.params.mean_at(task.x0, s.time);
        sum.analytic_variance = task.params.variance_at(s.time);
        double lo = 0.0, hi = task.wrap_period;
        if (task.wrap_period == 0.0) {
            const auto [mn, mx] = std::minmax_element(sum.values.begin(), sum.values.end());
            lo = *mn;
            hi = std::nextafter(*mx > *mn ? *mx : *mn + 1.0, HUGE_VAL);
        }
        sum.histogram = Histogram::build(sum.values, lo, hi, task.bins);
        out.push_back(std::move(sum));
    }
    return out;
}

/// Fourier coefficients of a model state, with a DFT check that no frequency
/// beyond 2^N - 1 is present.
struct SpectrumReport {
    FrequencySpectrum spectrum;
    double c0 = 0.0;
    double band_residual = 0.0;  // largest DFT magnitude outside |k| <= 2^N - 1
};

inline SpectrumReport model_spectrum(const DqgmModel &model) {
    SpectrumReport rep;
    const StateVector psi = model_state(model);
    const std::size_t n = model.n_qubits();
    rep.spectrum = extract_spectrum(psi.amplitudes(), n);
    rep.c0 = rep.spectrum.coefficients.at(0).real();
    // Sample one period at 2^(N+2) points and look at the upper frequencies.
    const std::size_t dim = std::size_t{1} << n;
    const std::size_t samples = 4 * dim;
    const double period = static_cast<double>(dim);
    std::vector<double> xs(samples);
    for (std::size_t i = 0; i < samples; ++i) xs[i] = period * static_cast<double>(i) / static_cast<double>(samples);
    const auto vals = eval_grid(model, xs, 0);
    for (std::size_t k = dim; k <= samples / 2; ++k) {
        cplx s = 0.0;
        for (std::size_t i = 0; i < samples; ++i) {
            s += vals[i].p * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * i) / static_cast<double>(samples));
        }
        rep.band_residual = std::max(rep.band_residual, std::abs(s) / static_cast<double>(samples));
    }
    return rep;
}

}  // namespace dqgm

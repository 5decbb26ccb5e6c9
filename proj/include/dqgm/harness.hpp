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

// Config handling, experiment dispatch and artifact writing for the dqgm tool.
// Needs nlohmann/json (vendored as json.hpp) and OpenSSL's libcrypto.

#include <openssl/evp.h>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dqgm/experiments.hpp"
#include "dqgm/parallel.hpp"
#include "json.hpp"

namespace dqgm::harness {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

inline constexpr const char *kToolVersion = "0.1.0";
inline constexpr int kManifestVersion = 1;

/// Bad config, bad override or a value outside its allowed range.
class ConfigError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

inline const std::vector<std::string> &experiment_names() {
    static const std::vector<std::string> names{"train",  "sample", "scan",          "fpe_train",
                                                "evolve", "copula", "sde_reference", "spectrum"};
    return names;
}

/// Every accepted key with its default. Unknown keys are rejected.
inline json default_config() {
    return json::parse(R"({
  "experiment": "train",
  "seed": 1234,
  "output_dir": "dqgm_out",
  "model": {
    "n_qubits": 6,
    "basis": "ZH",
    "ansatz": {"kind": "HEA", "depth": 4, "width": 3},
    "theta": []
  },
  "target": {"mu": 32.0, "sigma": 8.0},
  "loss": {"stride": 1, "eta": 1.0},
  "training": {"epochs": 1000, "lr": 0.01, "init_scale": 0.1},
  "sampling": {"shots": 1000000, "extended_qubits": 0, "max_sample_rows": 10000},
  "scan": {"depths": [0, 1, 2, 3, 4], "widths": [1, 2, 3, 4, 5, 6]},
  "fpe": {
    "mu": 32.0, "sigma2": 64.0, "nu": 1.0, "stride": 2,
    "stage1_epochs": 200, "stage1_lr": 0.01,
    "stage2_epochs": 1200, "stage2_lr": 0.005
  },
  "evolution": {
    "t0": 0.144, "variance_at_t0": 64.0, "diffusion_rate": 0.0,
    "dt": 0.001, "steps": 300, "snapshot_offsets": [0.0, 0.1, 0.3],
    "regularization": 1e-8,
    "pretrain": {"kind": "REALAMP", "depth": 1, "width": 2, "epochs": 500, "lr": 0.01},
    "reference_paths": 1000000
  },
  "copula": {
    "n_per_register": 6, "locals": "identity", "x_angle": 0.78539816339744828, "y_angle": 0.78539816339744828,
    "shots": 10000,
    "marginals": {"mu1": 0.5, "sigma1": 0.1, "mu2": 0.5, "sigma2": 0.1}
  },
  "sde": {
    "mu": 32.0, "nu": 0.0, "sigma2": 444.44444444444446, "x0": 32.0, "dt": 0.001,
    "times": [0.144, 0.244, 0.444], "paths": 100000, "wrap_period": 64.0, "bins": 64,
    "max_sample_rows": 10000
  }
})");
}

namespace detail {

inline json::json_pointer pointer(const std::string &dotted) {
    std::string p;
    std::stringstream ss(dotted);
    std::string part;
    while (std::getline(ss, part, '.')) p += "/" + part;
    return json::json_pointer(p);
}

// Copies `patch` onto `base`, refusing keys that base does not define.
inline void overlay(json &base, const json &patch, const std::string &path) {
    if (!patch.is_object()) {
        throw ConfigError((path.empty() ? std::string("config") : path) + ": expected an object");
    }
    for (auto it = patch.begin(); it != patch.end(); ++it) {
        const std::string key = path.empty() ? it.key() : path + "." + it.key();
        if (!base.contains(it.key())) throw ConfigError("unknown config key: " + key);
        json &slot = base[it.key()];
        if (slot.is_object()) {
            overlay(slot, it.value(), key);
        } else {
            slot = it.value();
        }
    }
}

}  // namespace detail

/// Typed, path-named access to a resolved config.
class Config {
   public:
    explicit Config(json root) : root_(std::move(root)) {}

    const json &raw() const { return root_; }

    const json &at(const std::string &path) const {
        const auto ptr = detail::pointer(path);
        if (!root_.contains(ptr)) throw ConfigError(path + ": missing");
        return root_.at(ptr);
    }

    double number(const std::string &path) const {
        const json &v = at(path);
        if (!v.is_number()) throw ConfigError(path + ": expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigError(path + ": must be finite");
        return d;
    }

    std::int64_t integer(const std::string &path) const {
        const json &v = at(path);
        if (v.is_number_integer()) return v.get<std::int64_t>();
        if (v.is_number_float()) {
            const double d = v.get<double>();
            if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<std::int64_t>(d);
        }
        throw ConfigError(path + ": expected an integer");
    }

    std::size_t count(const std::string &path, std::int64_t min_value) const {
        const std::int64_t v = integer(path);
        if (v < min_value) throw ConfigError(path + ": must be >= " + std::to_string(min_value));
        return static_cast<std::size_t>(v);
    }

    std::string text(const std::string &path) const {
        const json &v = at(path);
        if (!v.is_string()) throw ConfigError(path + ": expected a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const std::string &path) const {
        const json &v = at(path);
        if (!v.is_array()) throw ConfigError(path + ": expected an array");
        std::vector<double> out;
        for (const auto &e : v) {
            if (!e.is_number()) throw ConfigError(path + ": expected an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    double positive(const std::string &path) const {
        const double d = number(path);
        if (!(d > 0.0)) throw ConfigError(path + ": must be positive");
        return d;
    }

    double non_negative(const std::string &path) const {
        const double d = number(path);
        if (d < 0.0) throw ConfigError(path + ": must be >= 0");
        return d;
    }

    std::string experiment() const { return text("experiment"); }
    std::uint64_t seed() const {
        if (at("seed").is_number_unsigned()) return at("seed").get<std::uint64_t>();
        const std::int64_t s = integer("seed");
        if (s < 0) throw ConfigError("seed: must be a non-negative integer");
        return static_cast<std::uint64_t>(s);
    }

   private:
    json root_;
};

inline MapBasis parse_basis(const Config &c, const std::string &path) {
    const std::string b = c.text(path);
    if (b == "ZH") return MapBasis::ZH;
    if (b == "X") return MapBasis::X;
    throw ConfigError(path + ": expected \"ZH\" or \"X\"");
}

inline AnsatzKind parse_kind(const Config &c, const std::string &path) {
    const std::string k = c.text(path);
    if (k == "HEA") return AnsatzKind::HEA_XZX_CNOT;
    if (k == "REALAMP") return AnsatzKind::REALAMP_RY_CZ;
    throw ConfigError(path + ": expected \"HEA\" or \"REALAMP\"");
}

inline std::size_t register_size(const Config &c) {
    const std::size_t n = c.count("model.n_qubits", 1);
    if (n > 20) throw ConfigError("model.n_qubits: must be <= 20");
    return n;
}

inline std::size_t checked_width(const Config &c, const std::string &path, std::size_t n) {
    const std::size_t w = c.count(path, 1);
    if (w > n) {
        throw ConfigError(path + ": width " + std::to_string(w) + " exceeds model.n_qubits = " + std::to_string(n));
    }
    return w;
}

inline GaussianTask gaussian_task(const Config &c) {
    GaussianTask t;
    t.n_qubits = register_size(c);
    t.basis = parse_basis(c, "model.basis");
    t.kind = parse_kind(c, "model.ansatz.kind");
    t.depth = c.count("model.ansatz.depth", 0);
    t.width = checked_width(c, "model.ansatz.width", t.n_qubits);
    t.mu = c.number("target.mu");
    t.sigma = c.positive("target.sigma");
    t.stride = c.count("loss.stride", 1);
    t.epochs = c.count("training.epochs", 0);
    t.lr = c.positive("training.lr");
    t.init_scale = c.non_negative("training.init_scale");
    return t;
}

inline double eta(const Config &c) { return c.non_negative("loss.eta"); }

inline std::uint64_t shots(const Config &c, const std::string &path) {
    const std::int64_t s = c.integer(path);
    if (s <= 0) throw ConfigError(path + ": must be >= 1 (got " + std::to_string(s) + ")");
    return static_cast<std::uint64_t>(s);
}

inline std::size_t extended_qubits(const Config &c, std::size_t n) {
    const std::size_t m = c.count("sampling.extended_qubits", 0);
    if (m != 0 && (m < n || m > kMaxQubits)) {
        throw ConfigError("sampling.extended_qubits: must be 0 or lie in [model.n_qubits, " +
                          std::to_string(kMaxQubits) + "]");
    }
    return m;
}

inline FpeTask fpe_task(const Config &c) {
    FpeTask t;
    t.n_qubits = register_size(c);
    t.kind = parse_kind(c, "model.ansatz.kind");
    t.depth = c.count("model.ansatz.depth", 0);
    t.width = checked_width(c, "model.ansatz.width", t.n_qubits);
    t.ou = FpeParams{c.number("fpe.mu"), c.positive("fpe.sigma2"), c.positive("fpe.nu")};
    t.stride = c.count("fpe.stride", 1);
    t.stage1_epochs = c.count("fpe.stage1_epochs", 0);
    t.stage1_lr = c.positive("fpe.stage1_lr");
    t.stage2_epochs = c.count("fpe.stage2_epochs", 0);
    t.stage2_lr = c.positive("fpe.stage2_lr");
    t.eta = eta(c);
    t.init_scale = c.non_negative("training.init_scale");
    return t;
}

inline EvolutionTask evolution_task(const Config &c) {
    EvolutionTask t;
    GaussianTask &p = t.pretrain;
    p.n_qubits = register_size(c);
    p.basis = MapBasis::ZH;
    p.kind = parse_kind(c, "evolution.pretrain.kind");
    p.depth = c.count("evolution.pretrain.depth", 0);
    p.width = checked_width(c, "evolution.pretrain.width", p.n_qubits);
    p.epochs = c.count("evolution.pretrain.epochs", 0);
    p.lr = c.positive("evolution.pretrain.lr");
    p.init_scale = c.non_negative("training.init_scale");
    p.mu = c.number("target.mu");
    t.variance_at_t0 = c.positive("evolution.variance_at_t0");
    p.sigma = std::sqrt(t.variance_at_t0);
    t.t0 = c.positive("evolution.t0");
    t.diffusion_rate = c.non_negative("evolution.diffusion_rate");
    t.dt = c.positive("evolution.dt");
    t.steps = c.count("evolution.steps", 0);
    t.snapshot_offsets = c.numbers("evolution.snapshot_offsets");
    const double horizon = t.dt * static_cast<double>(t.steps);
    for (double s : t.snapshot_offsets) {
        if (s < 0.0 || s > horizon + 1e-9) {
            throw ConfigError("evolution.snapshot_offsets: " + std::to_string(s) + " lies outside [0, dt * steps]");
        }
    }
    t.regularization = c.non_negative("evolution.regularization");
    t.shots = shots(c, "sampling.shots");
    t.reference_paths = shots(c, "evolution.reference_paths");
    return t;
}

inline CopulaTask copula_task(const Config &c) {
    CopulaTask t;
    t.n_per_register = c.count("copula.n_per_register", 1);
    if (2 * t.n_per_register > kMaxQubits) {
        throw ConfigError("copula.n_per_register: must be <= " + std::to_string(kMaxQubits / 2));
    }
    const std::string l = c.text("copula.locals");
    if (l == "identity") {
        t.locals = CopulaLocals::Identity;
    } else if (l == "hadamard") {
        t.locals = CopulaLocals::Hadamard;
    } else if (l == "partial_rotation") {
        t.locals = CopulaLocals::PartialRotation;
    } else {
        throw ConfigError("copula.locals: expected identity, hadamard or partial_rotation");
    }
    t.x_angle = c.number("copula.x_angle");
    t.y_angle = c.number("copula.y_angle");
    t.shots = shots(c, "copula.shots");
    t.marginal1 = {c.number("copula.marginals.mu1"), c.positive("copula.marginals.sigma1")};
    t.marginal2 = {c.number("copula.marginals.mu2"), c.positive("copula.marginals.sigma2")};
    return t;
}

inline SdeTask sde_task(const Config &c) {
    SdeTask t;
    t.params = OuParams{c.number("sde.mu"), c.non_negative("sde.nu"), c.non_negative("sde.sigma2")};
    t.x0 = c.number("sde.x0");
    t.dt = c.positive("sde.dt");
    t.times = c.numbers("sde.times");
    if (t.times.empty()) throw ConfigError("sde.times: need at least one time");
    for (double v : t.times) {
        if (v < 0.0) throw ConfigError("sde.times: must be >= 0");
    }
    t.paths = shots(c, "sde.paths");
    t.wrap_period = c.non_negative("sde.wrap_period");
    t.bins = c.count("sde.bins", 1);
    return t;
}

/// Range checks run for every section so a manifest never records an
/// unusable value; checks that tie a section to the register size only run
/// for the experiment that reads that section.
inline void validate(const Config &c) {
    const std::string e = c.experiment();
    if (std::find(experiment_names().begin(), experiment_names().end(), e) == experiment_names().end()) {
        throw ConfigError("experiment: unknown experiment '" + e + "'");
    }
    c.seed();
    if (c.text("output_dir").empty()) throw ConfigError("output_dir: must not be empty");
    const GaussianTask g = gaussian_task(c);
    eta(c);
    shots(c, "sampling.shots");
    extended_qubits(c, g.n_qubits);
    c.count("sampling.max_sample_rows", 0);
    for (double d : c.numbers("scan.depths")) {
        if (d < 0 || std::floor(d) != d) throw ConfigError("scan.depths: expected non-negative integers");
    }
    for (double w : c.numbers("scan.widths")) {
        if (w < 1 || std::floor(w) != w) throw ConfigError("scan.widths: expected positive integers");
        if (e == "scan" && w > static_cast<double>(g.n_qubits)) {
            throw ConfigError("scan.widths: width " + std::to_string(static_cast<long>(w)) +
                              " exceeds model.n_qubits = " + std::to_string(g.n_qubits));
        }
    }
    fpe_task(c);
    c.positive("evolution.dt");
    shots(c, "evolution.reference_paths");
    if (e == "evolve") evolution_task(c);
    copula_task(c);
    sde_task(c);
    c.count("sde.max_sample_rows", 0);
    const auto theta = c.numbers("model.theta");
    if (!theta.empty() && theta.size() != g.ansatz().n_params()) {
        throw ConfigError("model.theta: expected " + std::to_string(g.ansatz().n_params()) + " angles, got " +
                          std::to_string(theta.size()));
    }
}

/// Parses "a.b.c=value"; the value is read as JSON when possible, else as a string.
inline void apply_override(json &cfg, const std::string &assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("--set expects key=value, got '" + assignment + "'");
    }
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    const auto ptr = detail::pointer(key);
    if (!cfg.contains(ptr)) throw ConfigError("unknown config key: " + key);
    if (cfg.at(ptr).is_object()) throw ConfigError(key + ": cannot replace a whole section");
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error &) {
        value = raw;
    }
    cfg[ptr] = value;
}

struct Request {
    std::string experiment;
    std::optional<fs::path> config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<fs::path> out_dir;
};

/// Defaults, then the config file (a manifest is accepted and its recorded
/// config reused), then --set overrides, then --seed and --out.
inline Config resolve(const Request &req) {
    json cfg = default_config();
    if (req.config_path) {
        std::ifstream in(*req.config_path);
        if (!in) throw ConfigError("cannot read config file " + req.config_path->string());
        json file;
        try {
            file = json::parse(in);
        } catch (const json::parse_error &e) {
            throw ConfigError("config file " + req.config_path->string() + " is not valid JSON: " + e.what());
        }
        if (file.is_object() && file.contains("manifest_version") && file.contains("config")) file = file["config"];
        if (file.is_object() && file.contains("experiment") && file["experiment"] != req.experiment) {
            throw ConfigError("experiment: config is for '" + file["experiment"].dump() + "', not '" + req.experiment + "'");
        }
        detail::overlay(cfg, file, "");
    }
    for (const auto &o : req.overrides) apply_override(cfg, o);
    cfg["experiment"] = req.experiment;
    if (req.seed) cfg["seed"] = *req.seed;
    if (req.out_dir) cfg["output_dir"] = req.out_dir->string();
    // Seed 0 asks for a fresh seed; record the drawn one so the manifest replays.
    // Kept below 2^53 so the value survives JSON readers that use doubles.
    if (cfg["seed"].is_number_integer() && cfg["seed"].get<std::int64_t>() == 0) {
        cfg["seed"] = (resolve_seed(0) & ((std::uint64_t{1} << 53) - 1)) | 1;
    }
    Config c(std::move(cfg));
    validate(c);
    return c;
}

/// CSV with a header row; reals carry 17 significant digits.
class CsvWriter {
   public:
    CsvWriter(const fs::path &path, const std::vector<std::string> &header) : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot write " + path.string());
        line(header);
    }

    static std::string real(double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }
    static std::string whole(std::uint64_t v) { return std::to_string(v); }

    void line(const std::vector<std::string> &cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

   private:
    std::ofstream out_;
};

inline std::string sha256_file(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    EVP_MD_CTX *ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw std::runtime_error("sha256 init failed");
    }
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return hex.str();
}

/// Written files plus scalar results for the manifest.
struct Artifacts {
    fs::path dir;
    std::vector<std::string> files;
    json metrics = json::object();

    CsvWriter csv(const std::string &name, const std::vector<std::string> &header) {
        files.push_back(name);
        return CsvWriter(dir / name, header);
    }
};

/// Normalized frequencies of integer outcomes over `bins` bins.
inline std::vector<double> bin_frequencies(const std::vector<std::uint64_t> &samples, std::size_t bins) {
    if (samples.empty()) throw std::invalid_argument("histogram: empty sample set");
    if (bins == 0) throw std::invalid_argument("histogram: bins must be >= 1");
    std::vector<double> freq(bins, 0.0);
    for (auto v : samples) {
        if (v >= bins) throw std::invalid_argument("histogram: outcome " + std::to_string(v) + " outside the bins");
        freq[v] += 1.0;
    }
    for (auto &f : freq) f /= static_cast<double>(samples.size());
    return freq;
}

namespace detail {

using R = CsvWriter;

inline void write_history(Artifacts &a, const TrainResult &r) {
    auto w = a.csv("loss_history.csv", {"epoch", "data_loss", "diff_loss", "full_loss"});
    for (const auto &row : r.history) {
        w.line({R::whole(row.epoch), R::real(row.loss.data), R::real(row.loss.diff), R::real(row.loss.full)});
    }
}

inline void write_theta(Artifacts &a, const std::vector<double> &theta) {
    auto w = a.csv("theta.csv", {"index", "theta"});
    for (std::size_t k = 0; k < theta.size(); ++k) w.line({R::whole(k), R::real(theta[k])});
}

inline void write_pdf(Artifacts &a, const DqgmModel &m, const TrainingGrid &g) {
    const auto vals = eval_grid(m, g.points, 2);
    auto pdf = a.csv("pdf.csv", {"x", "p_model", "p_target"});
    auto der = a.csv("derivatives.csv", {"x", "dp", "d2p"});
    for (std::size_t i = 0; i < g.size(); ++i) {
        pdf.line({R::real(g.points[i]), R::real(vals[i].p), R::real(g.target ? (*g.target)[i] : 0.0)});
        der.line({R::real(g.points[i]), R::real(vals[i].dp), R::real(vals[i].d2p)});
    }
}

// Histogram of the bit-basis sampler; with an extended register the x column
// is the fine-bin position.
inline std::vector<double> write_model_histogram(Artifacts &a, const DqgmModel &m, std::uint64_t n_shots,
                                                 std::size_t extended, std::uint64_t seed, std::size_t max_rows) {
    const std::size_t n = m.n_qubits();
    const std::size_t mq = extended == 0 ? n : extended;
    const auto probs = simulate(build_sampling_circuit(m, extended)).probabilities();
    const auto idx = sample_indices(probs, n_shots, resolve_seed(seed));
    const auto freq = bin_frequencies(idx, probs.size());
    auto h = a.csv("histogram.csv", {"bin", "x", "frequency", "probability"});
    for (std::size_t y = 0; y < freq.size(); ++y) {
        h.line({R::whole(y), R::real(extended_bin_position(y, n, mq)), R::real(freq[y]), R::real(probs[y])});
    }
    auto s = a.csv("samples.csv", {"shot", "outcome", "x"});
    for (std::size_t i = 0; i < std::min<std::size_t>(max_rows, idx.size()); ++i) {
        s.line({R::whole(i), R::whole(idx[i]), R::real(extended_bin_position(idx[i], n, mq))});
    }
    a.metrics["shots"] = n_shots;
    a.metrics["histogram_bins"] = freq.size();
    a.metrics["total_variation_to_exact"] = total_variation(freq, probs);
    return freq;
}

inline DqgmModel trained_or_given(const Config &c, Artifacts &a, PdfFit *fit_out) {
    const GaussianTask task = gaussian_task(c);
    const auto theta = c.numbers("model.theta");
    if (!theta.empty()) {
        a.metrics["theta_source"] = "config";
        return make_model(PhaseMapSpec::standard(task.n_qubits, task.basis), task.ansatz(), theta);
    }
    PdfFit fit = fit_gaussian(task, c.seed());
    write_history(a, fit.result);
    a.metrics["theta_source"] = "trained";
    a.metrics["data_mse"] = fit.data_mse;
    a.metrics["generalized_mse"] = fit.generalized_mse;
    DqgmModel m = fit.result.model;
    if (fit_out) *fit_out = std::move(fit);
    return m;
}

inline std::uint64_t sub_seed(const Config &c, std::uint64_t stream) {
    return derive_seed(resolve_seed(c.seed()), stream);
}

inline void run_train(const Config &c, Artifacts &a) {
    PdfFit fit;
    const DqgmModel m = trained_or_given(c, a, &fit);
    if (fit.generalized.points.empty()) {
        const GaussianTask t = gaussian_task(c);
        fit.grid = integer_grid(t.n_qubits, t.stride);
        attach_target(fit.grid, [&](double x) { return gaussian_pdf(x, t.mu, t.sigma); }, t.n_qubits);
        fit.generalized = generalized_grid(fit.grid);
        attach_target(fit.generalized, [&](double x) { return gaussian_pdf(x, t.mu, t.sigma); }, t.n_qubits);
        a.metrics["data_mse"] = data_loss(m, fit.grid);
        a.metrics["generalized_mse"] = data_loss(m, fit.generalized);
    }
    write_pdf(a, m, fit.generalized);
    write_theta(a, m.theta);
}

inline void run_sample(const Config &c, Artifacts &a) {
    const DqgmModel m = trained_or_given(c, a, nullptr);
    write_theta(a, m.theta);
    const auto freq = write_model_histogram(a, m, shots(c, "sampling.shots"), extended_qubits(c, m.n_qubits()),
                                            sub_seed(c, streams::kSampling), c.count("sampling.max_sample_rows", 0));
    const GaussianTask t = gaussian_task(c);
    const auto target = integer_target([&](double x) { return gaussian_pdf(x, t.mu, t.sigma); }, t.n_qubits);
    const std::size_t factor = freq.size() / target.size();
    a.metrics["total_variation_to_target"] = total_variation(aggregate_bins(freq, factor), target);
}

inline void run_scan(const Config &c, Artifacts &a) {
    const GaussianTask base = gaussian_task(c);
    auto w = a.csv("quality.csv", {"depth", "width", "data_mse", "generalized_mse"});
    std::size_t cells = 0;
    for (double d : c.numbers("scan.depths")) {
        for (double wd : c.numbers("scan.widths")) {
            GaussianTask t = base;
            t.depth = static_cast<std::size_t>(d);
            t.width = static_cast<std::size_t>(wd);
            const PdfFit fit = fit_gaussian(t, c.seed());
            w.line({R::whole(t.depth), R::whole(t.width), R::real(fit.data_mse), R::real(fit.generalized_mse)});
            ++cells;
        }
    }
    a.metrics["cells"] = cells;
}

inline void run_fpe(const Config &c, Artifacts &a) {
    const FpeTask t = fpe_task(c);
    const FpeFit fit = fit_fpe(t, c.seed());
    write_history(a, fit.result);
    write_pdf(a, fit.result.model, fit.generalized);
    write_theta(a, fit.result.model.theta);
    auto q = a.csv("quality.csv", {"stage", "data_loss", "diff_loss", "full_loss", "max_dp_error", "residual_rms"});
    const FpeQuality *quals[] = {&fit.stage1, &fit.stage2};
    for (std::size_t s = 0; s < 2; ++s) {
        const LossValues &lv = fit.result.stages[s].final;
        q.line({R::whole(s + 1), R::real(lv.data), R::real(lv.diff), R::real(lv.full), R::real(quals[s]->max_dp_error),
                R::real(quals[s]->residual_rms)});
    }
    a.metrics["stage1_final_full_loss"] = fit.result.stages[0].final.full;
    a.metrics["stage2_final_full_loss"] = fit.result.stages[1].final.full;
    a.metrics["stage1_epochs"] = t.stage1_epochs;
    write_model_histogram(a, fit.result.model, shots(c, "sampling.shots"), extended_qubits(c, t.n_qubits),
                          sub_seed(c, streams::kSampling), c.count("sampling.max_sample_rows", 0));
}

inline void run_evolve(const Config &c, Artifacts &a) {
    const EvolutionTask t = evolution_task(c);
    const EvolutionRun run = run_evolution(t, c.seed());
    write_history(a, run.pretrain.result);
    {
        auto w = a.csv("evolution.csv", {"time", "residual_norm"});
        for (std::size_t i = 0; i < run.trace.times.size(); ++i) {
            w.line({R::real(run.trace.times[i]), R::real(run.trace.residual_norms[i])});
        }
    }
    auto th = a.csv("theta_snapshots.csv", {"time", "index", "theta"});
    auto h = a.csv("histogram.csv", {"time", "bin", "frequency"});
    auto q = a.csv("quality.csv", {"time", "model_variance", "exact_variance", "reference_variance", "relative_error",
                                   "normalization"});
    double worst = 0.0, drift = 0.0;
    for (const auto &s : run.snapshots) {
        for (std::size_t k = 0; k < s.theta.size(); ++k) th.line({R::real(s.time), R::whole(k), R::real(s.theta[k])});
        for (std::size_t b = 0; b < s.frequencies.size(); ++b) {
            h.line({R::real(s.time), R::whole(b), R::real(s.frequencies[b])});
        }
        const double rel = s.model_variance / s.reference_variance - 1.0;
        worst = std::max(worst, std::abs(rel));
        drift = std::max(drift, std::abs(s.normalization - 1.0));
        q.line({R::real(s.time), R::real(s.model_variance), R::real(s.exact_variance), R::real(s.reference_variance),
                R::real(rel), R::real(s.normalization)});
    }
    a.metrics["diffusion_rate"] = t.rate();
    a.metrics["pretrain_data_mse"] = run.pretrain.data_mse;
    a.metrics["max_relative_variance_error"] = worst;
    a.metrics["max_normalization_drift"] = drift;
}

inline void run_copula_experiment(const Config &c, Artifacts &a) {
    const CopulaTask t = copula_task(c);
    const CopulaSample s = run_copula(t, c.seed());
    {
        auto w = a.csv("scatter.csv", {"x1", "x2"});
        for (const auto &p : s.data) w.line({R::real(p.first), R::real(p.second)});
    }
    {
        auto w = a.csv("samples.csv", {"z1", "z2"});
        for (const auto &p : s.latent) w.line({R::whole(p.z1), R::whole(p.z2)});
    }
    auto q = a.csv("quality.csv", {"metric", "value"});
    const std::pair<const char *, double> rows[] = {{"latent_correlation", s.latent_correlation},
                                                    {"data_correlation", s.data_correlation},
                                                    {"mismatch_fraction", s.mismatch_fraction},
                                                    {"mean1", s.mean1},
                                                    {"sd1", s.sd1},
                                                    {"mean2", s.mean2},
                                                    {"sd2", s.sd2}};
    for (const auto &[name, v] : rows) {
        q.line({name, R::real(v)});
        a.metrics[name] = v;
    }
    a.metrics["locals"] = copula_locals_name(t.locals);
}

inline void run_sde(const Config &c, Artifacts &a) {
    const SdeTask t = sde_task(c);
    const auto snaps = run_sde_reference(t, c.seed());
    auto q = a.csv("quality.csv", {"time", "mean", "variance", "analytic_mean", "analytic_variance"});
    auto h = a.csv("histogram.csv", {"time", "bin_lo", "bin_hi", "frequency"});
    auto s = a.csv("samples.csv", {"path", "time", "value"});
    const std::size_t max_rows = c.count("sde.max_sample_rows", 0);
    for (const auto &snap : snaps) {
        q.line({R::real(snap.time), R::real(snap.mean), R::real(snap.variance), R::real(snap.analytic_mean),
                R::real(snap.analytic_variance)});
        for (std::size_t b = 0; b < snap.histogram.counts.size(); ++b) {
            h.line({R::real(snap.time), R::real(snap.histogram.edges[b]), R::real(snap.histogram.edges[b + 1]),
                    R::real(snap.histogram.counts[b])});
        }
        for (std::size_t i = 0; i < std::min(max_rows, snap.values.size()); ++i) {
            s.line({R::whole(i), R::real(snap.time), R::real(snap.values[i])});
        }
    }
    a.metrics["paths"] = t.paths;
}

inline void run_spectrum(const Config &c, Artifacts &a) {
    const GaussianTask t = gaussian_task(c);
    auto theta = c.numbers("model.theta");
    if (theta.empty()) {
        theta = random_theta(t.ansatz().n_params(), std::numbers::pi, c.seed(), streams::kSpectrum);
        a.metrics["theta_source"] = "random";
    } else {
        a.metrics["theta_source"] = "config";
    }
    const DqgmModel m = make_model(PhaseMapSpec::standard(t.n_qubits, t.basis), t.ansatz(), theta);
    write_theta(a, theta);
    const SpectrumReport rep = model_spectrum(m);
    {
        auto w = a.csv("spectrum.csv", {"k", "re", "im", "multiplicity"});
        for (const auto &[k, v] : rep.spectrum.coefficients) {
            w.line({std::to_string(k), R::real(v.real()), R::real(v.imag()), R::whole(frequency_multiplicity(t.n_qubits, k))});
        }
    }
    TrainingGrid g = uniform_grid(0.0, std::ldexp(1.0, static_cast<int>(t.n_qubits)), 20 * (std::size_t{1} << t.n_qubits));
    const auto vals = eval_grid(m, g.points, 2);
    auto pdf = a.csv("pdf.csv", {"x", "p_model", "p_series"});
    for (std::size_t i = 0; i < g.size(); ++i) {
        pdf.line({R::real(g.points[i]), R::real(vals[i].p), R::real(rep.spectrum.evaluate(g.points[i]))});
    }
    a.metrics["c0"] = rep.c0;
    a.metrics["band_residual"] = rep.band_residual;
}

}  // namespace detail

struct RunResult {
    fs::path manifest;
    json manifest_json;
};

/// Runs the resolved experiment, writes its CSV files and manifest.json
/// into `output_dir`.
inline RunResult run(const Config &c) {
    const fs::path out_dir = c.text("output_dir");
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir)) {
        throw std::runtime_error("cannot create output directory " + out_dir.string());
    }
    const auto start = std::chrono::steady_clock::now();
    Artifacts a{out_dir, {}, json::object()};
    const std::string e = c.experiment();
    if (e == "train") {
        detail::run_train(c, a);
    } else if (e == "sample") {
        detail::run_sample(c, a);
    } else if (e == "scan") {
        detail::run_scan(c, a);
    } else if (e == "fpe_train") {
        detail::run_fpe(c, a);
    } else if (e == "evolve") {
        detail::run_evolve(c, a);
    } else if (e == "copula") {
        detail::run_copula_experiment(c, a);
    } else if (e == "sde_reference") {
        detail::run_sde(c, a);
    } else if (e == "spectrum") {
        detail::run_spectrum(c, a);
    } else {
        throw ConfigError("experiment: unknown experiment '" + e + "'");
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    json m;
    m["manifest_version"] = kManifestVersion;
    m["tool"] = "dqgm";
    m["version"] = kToolVersion;
    m["experiment"] = e;
    m["seed"] = c.seed();
    m["config"] = c.raw();
    m["threads"] = thread_limit();
    m["wall_time_seconds"] = secs;
    m["metrics"] = a.metrics;
    json outs = json::array();
    for (const auto &f : a.files) {
        const fs::path p = out_dir / f;
        outs.push_back({{"file", f}, {"bytes", fs::file_size(p)}, {"sha256", sha256_file(p)}});
    }
    m["outputs"] = outs;
    const fs::path mp = out_dir / "manifest.json";
    std::ofstream mf(mp, std::ios::binary);
    if (!mf) throw std::runtime_error("cannot write " + mp.string());
    mf << m.dump(2) << '\n';
    return {mp, m};
}

/// Compares the checksums recorded in a manifest with the files next to it.
/// Returns the names of files that differ or are missing.
inline std::vector<std::string> verify_manifest(const fs::path &manifest) {
    std::ifstream in(manifest);
    if (!in) throw std::runtime_error("cannot read " + manifest.string());
    const json m = json::parse(in);
    std::vector<std::string> bad;
    for (const auto &o : m.at("outputs")) {
        const fs::path p = manifest.parent_path() / o.at("file").get<std::string>();
        if (!fs::exists(p) || sha256_file(p) != o.at("sha256").get<std::string>()) bad.push_back(o.at("file"));
    }
    return bad;
}

}  // namespace dqgm::harness

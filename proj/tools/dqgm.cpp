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


// dqgm <subcommand> --config <file> [--set k=v]... [--seed S] [--out DIR]

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dqgm/harness.hpp"

namespace {

struct Flags {
    std::string config;
    std::vector<std::string> sets;
    std::string seed;
    std::string out;
};

const char *describe(const std::string &name) {
    if (name == "train") return "fit the model to a Gaussian target";
    if (name == "sample") return "train (or load theta) and sample in the bit basis";
    if (name == "scan") return "depth x width sweep of fit quality";
    if (name == "fpe_train") return "two-stage fit of the stationary Fokker-Planck solution";
    if (name == "evolve") return "pretrain then evolve parameters in time";
    if (name == "copula") return "two-register copula sampling";
    if (name == "sde_reference") return "Euler-Maruyama reference ensemble";
    return "frequency spectrum of a model";
}

}  // namespace

int main(int argc, char **argv) {
    namespace h = dqgm::harness;
    CLI::App app{"Differentiable quantum generative models"};
    app.require_subcommand(1);
    app.set_version_flag("--version", h::kToolVersion);

    Flags flags;
    for (const auto &name : h::experiment_names()) {
        auto *sub = app.add_subcommand(name, describe(name));
        sub->add_option("--config", flags.config, "JSON config or a previous manifest.json");
        sub->add_option("--set", flags.sets, "override a dotted key, e.g. training.epochs=200")->take_all();
        sub->add_option("--seed", flags.seed, "master seed (non-negative integer)");
        sub->add_option("--out", flags.out, "output directory");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e);
    }

    h::Request req;
    req.experiment = app.get_subcommands().front()->get_name();
    if (!flags.config.empty()) req.config_path = flags.config;
    req.overrides = flags.sets;
    if (!flags.out.empty()) req.out_dir = flags.out;

    try {
        if (!flags.seed.empty()) {
            std::size_t used = 0;
            unsigned long long s = 0;
            try {
                if (flags.seed.front() == '-') throw std::invalid_argument("negative");
                s = std::stoull(flags.seed, &used);
            } catch (const std::exception &) {
                used = 0;
            }
            if (used != flags.seed.size()) throw h::ConfigError("seed: expected a non-negative integer");
            req.seed = s;
        }
        const h::Config cfg = h::resolve(req);
        const auto result = h::run(cfg);
        std::printf("%s: wrote %s\n", req.experiment.c_str(), result.manifest.string().c_str());
        return 0;
    } catch (const h::ConfigError &e) {
        std::fprintf(stderr, "dqgm: invalid config: %s\n", e.what());
        return 2;
    } catch (const std::exception &e) {
        std::fprintf(stderr, "dqgm: %s\n", e.what());
        return 1;
    }
}

// SPDX-License-Identifier: Apache-2.0
//
// uavsec: secrecy-rate simulation and solvers for multi-UAV RSMA downlinks
// Copyright (C) 2026 The uavsec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
#include "uavsec/error.hpp"
#include "uavsec/harness.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Secrecy-rate training, evaluation and oracle runs for multi-UAV RSMA downlinks"};
    app.set_version_flag("--version", uavsec::kVersion);
    app.require_subcommand(1);

    uavsec::RunRequest req;
    std::uint64_t seed = 0;
    std::string out;
    const std::pair<const char*, const char*> commands[] = {
        {"train", "train the configured method; writes training_log.csv and checkpoints"},
        {"eval", "evaluate a checkpoint (or the oracle policy); writes eval_rates.csv and cdf.csv"},
        {"oracle", "random-search beamforming oracle on seeded instances; writes oracle.csv"},
        {"sweep", "one run per value of sweep.key; writes sweep.csv"},
        {"compare", "train and evaluate every method in compare.methods; writes summary.csv"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", req.config_path, "configuration file")->required();
        sub->add_option("--seed", seed, "run seed (overrides the config)");
        sub->add_option("--out", out, "output directory (overrides the config)");
        sub->add_option("--set", req.overrides, "key=value override, repeatable");
        sub->callback([&, sub, name] {
            req.command = uavsec::command_from_string(name);
            if (sub->count("--seed") > 0) req.seed = seed;
            if (sub->count("--out") > 0) req.out_dir = out;
        });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    return uavsec::run(req, std::cerr);
}

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
#pragma once

#include "uavsec/marl.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace uavsec {

inline constexpr const char* kVersion = "0.1.0";

struct ExperimentConfig {
    TrainConfig train;  // scenario, solver, training and reward sections
    std::size_t eval_episodes = 20;
    std::uint64_t eval_seed = 1001;
    std::string checkpoint;  // eval input; empty means <output_dir>/checkpoints/checkpoint_final.txt
    OraclePolicyConfig oracle_policy;
    std::size_t oracle_instances = 20;
    std::size_t oracle_samples = 1'000'000;
    std::string sweep_key;                  // dotted config key
    std::vector<std::string> sweep_values;  // YAML scalars
    std::vector<Method> compare;            // methods of the compare command
    std::size_t cdf_bins = 0;               // 0: one point per distinct sample
    std::string output_dir = "out";
    std::string canonical;     // merged configuration text, hashed for provenance
    std::uint64_t config_hash = 0;
};

/// FNV-1a, 64 bit.
std::uint64_t fnv1a64(const std::string& text) noexcept;

/// Parses YAML text after applying `key=value` overrides (dotted keys, YAML values).
/// Throws ConfigError naming the offending key.
ExperimentConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {});
/// Throws ConfigError when the file is missing or unreadable.
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// "# uavsec version=<v> config_hash=<hex> seed=<n>"
std::string provenance_line(const ExperimentConfig& cfg);

struct CdfPoint {
    double rate = 0.0;
    double fraction = 0.0;
};

/// Right-continuous empirical CDF. With bins = 0 there is one point per distinct sample;
/// otherwise `bins` points spaced evenly from the minimum to the maximum. Throws EmptySamples.
std::vector<CdfPoint> emit_cdf(std::vector<double> samples, std::size_t bins = 0);

struct MethodRun {
    Method method = Method::DunDrl;
    std::vector<EvalStep> steps;
};

struct SummaryRow {
    Method method = Method::DunDrl;
    double mean_total_secrecy = 0.0;
    double percent_of_oracle = 0.0;
    double violation_rate = 0.0;  // fraction of steps with any positive penalty
};

/// Percentages against the oracle run of the same set. Throws MissingRun.
std::vector<SummaryRow> compare_methods(const std::vector<MethodRun>& runs);

struct OracleRow {
    std::size_t instance = 0;
    std::uint64_t instance_seed = 0;
    double best_value = 0.0;
    double best_alpha = 0.0;
    std::size_t samples = 0;
    double hnet_value = 0.0;
};

/// Random-search beamforming oracle and untrained exact HNet on seeded slot-0 instances.
std::vector<OracleRow> oracle_instances(const ExperimentConfig& cfg, std::size_t instances, std::size_t samples);
/// Reads the instance table written by the oracle command. Throws IoError.
std::vector<OracleRow> read_oracle_csv(const std::string& path);
/// Slot-0 channels of an oracle instance.
ChannelSet oracle_instance_channels(const ExperimentConfig& cfg, std::uint64_t instance_seed);

void write_training_log(std::ostream& out, const ExperimentConfig& cfg, const std::vector<EpisodeLog>& log);
void write_eval_rates(std::ostream& out, const ExperimentConfig& cfg, const std::vector<EvalStep>& steps);
void write_cdf(std::ostream& out, const ExperimentConfig& cfg, const std::vector<CdfPoint>& cdf);
void write_summary(std::ostream& out, const ExperimentConfig& cfg, const std::vector<SummaryRow>& rows);
void write_oracle(std::ostream& out, const ExperimentConfig& cfg, const std::vector<OracleRow>& rows);

enum class Command { Train, Eval, Oracle, Sweep, Compare };
Command command_from_string(const std::string& name);

struct RunRequest {
    Command command = Command::Train;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::vector<std::string> overrides;
};

/// Executes one command and writes its CSV files. Returns 0, or 2 for ConfigError,
/// 3 for IoError and 1 for other failures; messages go to `err`.
int run(const RunRequest& req, std::ostream& err);

} // namespace uavsec

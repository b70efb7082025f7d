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
#include "uavsec/harness.hpp"

#include "uavsec/error.hpp"
#include "uavsec/hnet.hpp"
#include "uavsec/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace uavsec {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool any_violation(const Violations& v) {
    return v.rho_r > 0.0 || v.rho_w > 0.0 || v.rho_neg_r > 0.0 || v.rho_q1 > 0.0 || v.rho_q0 > 0.0 || v.rho_qf > 0.0;
}

std::string violation_cols(const Violations& v) {
    return num(v.rho_r) + "," + num(v.rho_w) + "," + num(v.rho_neg_r) + "," + num(v.rho_q1) + "," + num(v.rho_q0) +
           "," + num(v.rho_qf);
}

constexpr const char* kViolationHeader = "rho_r,rho_w,rho_neg_r,rho_q1,rho_q0,rho_qF";

} // namespace

std::vector<CdfPoint> emit_cdf(std::vector<double> samples, std::size_t bins) {
    if (samples.empty()) throw Error(ErrorCode::EmptySamples, "CDF of an empty sample set");
    for (double s : samples)
        if (!std::isfinite(s)) throw Error(ErrorCode::NonFinite, "CDF sample is not finite");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    std::vector<CdfPoint> out;
    auto count_le = [&](double x) {
        return static_cast<double>(std::upper_bound(samples.begin(), samples.end(), x) - samples.begin());
    };
    if (bins == 0) {
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (i + 1 < samples.size() && samples[i + 1] == samples[i]) continue;
            out.push_back({samples[i], static_cast<double>(i + 1) / n});
        }
    } else {
        const double lo = samples.front(), hi = samples.back();
        for (std::size_t j = 0; j < bins; ++j) {
            const double x = (j + 1 == bins) ? hi : lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(bins - 1);
            out.push_back({x, count_le(x) / n});
        }
    }
    out.back().fraction = 1.0;
    return out;
}

namespace {

double mean_secrecy(const std::vector<EvalStep>& steps) {
    double s = 0.0;
    for (const auto& st : steps) s += st.rates.total_secrecy;
    return steps.empty() ? 0.0 : s / static_cast<double>(steps.size());
}

SummaryRow summarize(Method method, const std::vector<EvalStep>& steps) {
    if (steps.empty()) throw Error(ErrorCode::MissingRun, to_string(method) + " run has no steps");
    SummaryRow row;
    row.method = method;
    row.mean_total_secrecy = mean_secrecy(steps);
    std::size_t bad = 0;
    for (const auto& st : steps) bad += any_violation(st.violations) ? 1 : 0;
    row.violation_rate = static_cast<double>(bad) / static_cast<double>(steps.size());
    return row;
}

} // namespace

std::vector<SummaryRow> compare_methods(const std::vector<MethodRun>& runs) {
    const auto oracle = std::find_if(runs.begin(), runs.end(), [](const MethodRun& r) { return r.method == Method::Oracle; });
    if (oracle == runs.end()) throw Error(ErrorCode::MissingRun, "comparison needs an oracle run");
    const double reference = summarize(Method::Oracle, oracle->steps).mean_total_secrecy;
    std::vector<SummaryRow> rows;
    for (const auto& r : runs) {
        SummaryRow row = summarize(r.method, r.steps);
        if (&r == &*oracle) {
            row.percent_of_oracle = 100.0;
        } else {
            row.percent_of_oracle = reference > 0.0 ? 100.0 * row.mean_total_secrecy / reference : 0.0;
        }
        rows.push_back(row);
    }
    return rows;
}

ChannelSet oracle_instance_channels(const ExperimentConfig& cfg, std::uint64_t instance_seed) {
    const EnvConfig& e = cfg.train.env;
    const Scenario scn = init_scenario(e.constants, e.placement, e.start, e.terminal, instance_seed);
    return gen_channels(scn, 0, instance_seed);
}

std::vector<OracleRow> oracle_instances(const ExperimentConfig& cfg, std::size_t instances, std::size_t samples) {
    const SystemConstants& c = cfg.train.env.constants;
    const HNetParams hp = HNetParams::defaults(cfg.train.hnet_blocks);
    std::vector<OracleRow> rows;
    for (std::size_t i = 0; i < instances; ++i) {
        OracleRow row;
        row.instance = i;
        row.instance_seed = mix_seed(cfg.train.seed, i);
        const ChannelSet ch = oracle_instance_channels(cfg, row.instance_seed);
        const BeamOracleResult br = brute_force_beamform(ch, c, samples, mix_seed(row.instance_seed, 1));
        row.best_value = br.best_value;
        row.best_alpha = br.best_alpha;
        row.samples = br.samples_evaluated;
        row.hnet_value = compute_rates(ch, hnet_forward(ch, hp, c), c).total_secrecy;
        rows.push_back(row);
    }
    return rows;
}

std::vector<OracleRow> read_oracle_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    std::vector<OracleRow> rows;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            header = true;
            continue;
        }
        std::stringstream ss(line);
        std::vector<std::string> f;
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        if (f.size() != 6) throw Error(ErrorCode::IoError, "malformed oracle row in '" + path + "'");
        try {
            OracleRow r;
            r.instance = std::stoull(f[0]);
            r.instance_seed = std::stoull(f[1]);
            r.best_value = std::stod(f[2]);
            r.best_alpha = std::stod(f[3]);
            r.samples = std::stoull(f[4]);
            r.hnet_value = std::stod(f[5]);
            rows.push_back(r);
        } catch (const std::exception&) {
            throw Error(ErrorCode::IoError, "malformed oracle row in '" + path + "'");
        }
    }
    if (!header) throw Error(ErrorCode::IoError, "'" + path + "' has no header");
    return rows;
}

void write_training_log(std::ostream& out, const ExperimentConfig& cfg, const std::vector<EpisodeLog>& log) {
    out << provenance_line(cfg) << "\n";
    out << "episode,step_count,mean_reward,total_secrecy," << kViolationHeader << "\n";
    for (const auto& r : log) {
        out << r.episode << "," << r.step_count << "," << num(r.mean_reward) << "," << num(r.total_secrecy) << ","
            << violation_cols(r.violations) << "\n";
    }
}

void write_eval_rates(std::ostream& out, const ExperimentConfig& cfg, const std::vector<EvalStep>& steps) {
    const std::size_t k = cfg.train.env.constants.num_users;
    out << provenance_line(cfg) << "\n";
    out << "episode,slot,reward,total_secrecy";
    for (std::size_t i = 0; i < k; ++i) out << ",secrecy_" << i;
    out << "," << kViolationHeader << "\n";
    for (const auto& s : steps) {
        out << s.episode << "," << s.slot << "," << num(s.reward) << "," << num(s.rates.total_secrecy);
        for (double v : s.rates.secrecy) out << "," << num(v);
        out << "," << violation_cols(s.violations) << "\n";
    }
}

void write_cdf(std::ostream& out, const ExperimentConfig& cfg, const std::vector<CdfPoint>& cdf) {
    out << provenance_line(cfg) << "\n";
    out << "rate,cumulative_fraction\n";
    for (const auto& p : cdf) out << num(p.rate) << "," << num(p.fraction) << "\n";
}

void write_summary(std::ostream& out, const ExperimentConfig& cfg, const std::vector<SummaryRow>& rows) {
    out << provenance_line(cfg) << "\n";
    out << "method,mean_total_secrecy,percent_of_oracle,violation_rate\n";
    for (const auto& r : rows) {
        out << to_string(r.method) << "," << num(r.mean_total_secrecy) << "," << num(r.percent_of_oracle) << ","
            << num(r.violation_rate) << "\n";
    }
}

void write_oracle(std::ostream& out, const ExperimentConfig& cfg, const std::vector<OracleRow>& rows) {
    out << provenance_line(cfg) << "\n";
    out << "instance,instance_seed,best_value,best_alpha,samples,hnet_value\n";
    for (const auto& r : rows) {
        out << r.instance << "," << r.instance_seed << "," << num(r.best_value) << "," << num(r.best_alpha) << ","
            << r.samples << "," << num(r.hnet_value) << "\n";
    }
}

Command command_from_string(const std::string& name) {
    if (name == "train") return Command::Train;
    if (name == "eval") return Command::Eval;
    if (name == "oracle") return Command::Oracle;
    if (name == "sweep") return Command::Sweep;
    if (name == "compare") return Command::Compare;
    throw Error(ErrorCode::ConfigError, "unknown command '" + name + "'");
}

namespace {

template <class Writer>
void write_file(const fs::path& path, Writer&& w) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    w(out);
    if (!out) throw Error(ErrorCode::IoError, "write to '" + path.string() + "' failed");
}

ExperimentConfig resolve(const RunRequest& req, const std::vector<std::string>& extra = {}) {
    std::vector<std::string> ov = req.overrides;
    ov.insert(ov.end(), extra.begin(), extra.end());
    ExperimentConfig cfg = load_config(req.config_path, ov);
    if (req.seed) cfg.train.seed = *req.seed;
    if (req.out_dir) cfg.output_dir = *req.out_dir;
    return cfg;
}

/// Trains when the method has agents, then evaluates without exploration.
std::vector<EvalStep> train_and_evaluate(const ExperimentConfig& cfg, Method method, std::vector<EpisodeLog>* log) {
    TrainConfig t = cfg.train;
    t.method = method;
    if (method == Method::Oracle) return evaluate_oracle(t, cfg.oracle_policy, cfg.eval_episodes, cfg.eval_seed);
    t.checkpoint_dir.clear();
    TrainResult r = train(t);
    if (log) *log = r.log;
    return evaluate(t, r.checkpoint, cfg.eval_episodes, cfg.eval_seed);
}

std::vector<double> per_user_secrecy(const std::vector<EvalStep>& steps) {
    std::vector<double> s;
    for (const auto& st : steps) s.insert(s.end(), st.rates.secrecy.begin(), st.rates.secrecy.end());
    return s;
}

void run_command(const RunRequest& req) {
    const ExperimentConfig cfg = resolve(req);
    const fs::path out = cfg.output_dir;
    switch (req.command) {
    case Command::Train: {
        if (cfg.train.method == Method::Oracle) {
            throw Error(ErrorCode::ConfigError, "key 'method': oracle has nothing to train");
        }
        TrainConfig t = cfg.train;
        t.checkpoint_dir = (out / "checkpoints").string();
        const TrainResult r = train(t);
        write_file(out / "training_log.csv", [&](std::ostream& o) { write_training_log(o, cfg, r.log); });
        break;
    }
    case Command::Eval: {
        std::vector<EvalStep> steps;
        if (cfg.train.method == Method::Oracle) {
            steps = evaluate_oracle(cfg.train, cfg.oracle_policy, cfg.eval_episodes, cfg.eval_seed);
        } else {
            const std::string path =
                cfg.checkpoint.empty() ? (out / "checkpoints" / "checkpoint_final.txt").string() : cfg.checkpoint;
            steps = evaluate(cfg.train, nn::load_checkpoint(path), cfg.eval_episodes, cfg.eval_seed);
        }
        write_file(out / "eval_rates.csv", [&](std::ostream& o) { write_eval_rates(o, cfg, steps); });
        const auto cdf = emit_cdf(per_user_secrecy(steps), cfg.cdf_bins);
        write_file(out / "cdf.csv", [&](std::ostream& o) { write_cdf(o, cfg, cdf); });
        break;
    }
    case Command::Oracle: {
        const auto rows = oracle_instances(cfg, cfg.oracle_instances, cfg.oracle_samples);
        write_file(out / "oracle.csv", [&](std::ostream& o) { write_oracle(o, cfg, rows); });
        break;
    }
    case Command::Sweep: {
        if (cfg.sweep_key.empty()) throw Error(ErrorCode::ConfigError, "key 'sweep.key': missing");
        if (cfg.sweep_values.empty()) throw Error(ErrorCode::ConfigError, "key 'sweep.values': missing");
        const std::string column = cfg.sweep_key.substr(cfg.sweep_key.rfind('.') + 1);
        std::ostringstream body;
        body << column << ",method,seed,mean_total_secrecy,violation_rate\n";
        for (std::size_t i = 0; i < cfg.sweep_values.size(); ++i) {
            ExperimentConfig point = resolve(req, {cfg.sweep_key + "=" + cfg.sweep_values[i]});
            point.train.seed = cfg.train.seed + i;
            const auto steps = train_and_evaluate(point, point.train.method, nullptr);
            const SummaryRow row = summarize(point.train.method, steps);
            body << cfg.sweep_values[i] << "," << to_string(point.train.method) << "," << point.train.seed << ","
                 << num(row.mean_total_secrecy) << "," << num(row.violation_rate) << "\n";
        }
        write_file(out / "sweep.csv", [&](std::ostream& o) { o << provenance_line(cfg) << "\n" << body.str(); });
        break;
    }
    case Command::Compare: {
        std::vector<MethodRun> runs;
        for (Method m : cfg.compare) {
            std::vector<EpisodeLog> log;
            runs.push_back({m, train_and_evaluate(cfg, m, &log)});
            if (m != Method::Oracle) {
                write_file(out / (to_string(m) + "_training_log.csv"),
                           [&](std::ostream& o) { write_training_log(o, cfg, log); });
            }
        }
        const auto rows = compare_methods(runs);
        write_file(out / "summary.csv", [&](std::ostream& o) { write_summary(o, cfg, rows); });
        break;
    }
    }
}

} // namespace

int run(const RunRequest& req, std::ostream& err) {
    try {
        run_command(req);
        return 0;
    } catch (const Error& e) {
        err << "uavsec: " << e.what() << "\n";
        switch (e.code()) {
        case ErrorCode::ConfigError:
        case ErrorCode::InvalidConfig: return 2;
        case ErrorCode::IoError: return 3;
        default: return 1;
        }
    } catch (const fs::filesystem_error& e) {
        err << "uavsec: IoError: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "uavsec: " << e.what() << "\n";
        return 1;
    }
}

} // namespace uavsec

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
// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit when any fails.

#include "scalar_oracle.hpp"
#include "support.hpp"
#include "uavsec/enn.hpp"
#include "uavsec/error.hpp"
#include "uavsec/harness.hpp"
#include "uavsec/hnet.hpp"
#include "uavsec/marl.hpp"
#include "uavsec/neural.hpp"
#include "uavsec/numkernel.hpp"
#include "uavsec/rates.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace uavsec;
using namespace uavsec::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Context {
    fs::path source;
    fs::path work;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + p.string() + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_command(Command cmd, const fs::path& config, const fs::path& out, std::vector<std::string> overrides,
                std::optional<std::uint64_t> seed = std::nullopt) {
    RunRequest req;
    req.command = cmd;
    req.config_path = config.string();
    req.out_dir = out.string();
    req.overrides = std::move(overrides);
    req.seed = seed;
    return run(req, std::cerr);
}

// Mean-reward column of a training log, one entry per episode.
std::vector<double> log_rewards(const fs::path& csv) {
    std::istringstream in(slurp(csv));
    std::vector<double> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("episode", 0) == 0) continue;
        std::stringstream row(line);
        std::string cell;
        for (int col = 0; col < 3; ++col) std::getline(row, cell, ',');
        out.push_back(std::stod(cell));
    }
    return out;
}

double mean(const std::vector<double>& v, std::size_t begin, std::size_t end) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += v[i];
    return s / static_cast<double>(end - begin);
}

// ---------------------------------------------------------------------------

Outcome numerical_kernels(const Context&) {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(101);
    double chol = 0.0, eig = 0.0, tri = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(trial % 7);
        const ComplexMatrix m = random_hpd(n, rng);
        const ComplexMatrix c = cholesky(m);
        chol = std::max(chol, fro_norm(mul_adjoint(c, c) - m) / fro_norm(m));
        tri = std::max(tri, fro_norm(c * inv_lower_triangular(c) - ComplexMatrix::identity(n)));

        const ComplexMatrix s = random_hpsd(n, rng);
        const std::size_t d = 1 + static_cast<std::size_t>(trial % n);
        const EigenPairs ep = dominant_eigvecs(s, d);
        for (std::size_t j = 0; j < d; ++j) {
            const ComplexMatrix v = ep.vectors.col(j);
            eig = std::max(eig, fro_norm(s * v - v * cplx(ep.values[j])) / fro_norm(s));
        }
    }
    const double t = seconds_since(t0);
    const bool pass = chol <= 1e-10 && eig <= 1e-8 && tri <= 1e-10 && t < 10.0;
    return {pass, fmt("cholesky %.2e (<=1e-10), eigen residual %.2e (<=1e-8), triangular inverse %.2e (<=1e-10) "
                      "over 1000 matrices each; %.2f s (<10 s)",
                      chol, eig, tri, t)};
}

Outcome rate_model(const Context&) {
    std::mt19937_64 rng(202);
    std::uniform_int_distribution<std::size_t> u_count(1, 2), k_count(1, 4), i_count(1, 3), m_count(1, 4);
    std::uniform_real_distribution<double> log_scale(-3.0, 1.0);
    double worst = 0.0;
    auto rel = [&](double a, double b) { worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b))); };
    for (int trial = 0; trial < 500; ++trial) {
        SystemConstants c = sizes(u_count(rng), k_count(rng), i_count(rng), m_count(rng), 1, 1);
        c.noise_user_w = std::pow(10.0, log_scale(rng));
        c.noise_eave_w = std::pow(10.0, log_scale(rng));
        const ChannelSet ch = random_channels(c, rng, std::pow(10.0, log_scale(rng)));
        const BeamformingSolution s = random_solution(c, rng);
        const RateReport r = compute_rates(ch, s, c);
        const ScalarOracle o{ch, s, c};
        for (std::size_t k = 0; k < c.num_users; ++k) {
            rel(r.sinr_private[k], o.private_sinr(k));
            rel(r.sinr_common[k], o.common_sinr(k));
            rel(r.rate_private[k], std::log2(1.0 + o.private_sinr(k)));
            double wiretap = 0.0;
            for (std::size_t i = 0; i < c.num_eaves; ++i) {
                rel(r.sinr_eave[k * c.num_eaves + i], o.eave_sinr(k, i));
                wiretap = std::max(wiretap, std::log2(1.0 + o.eave_sinr(k, i)));
            }
            rel(r.secrecy[k], std::max(0.0, std::log2(1.0 + o.private_sinr(k)) - wiretap));
        }
        for (std::size_t u = 0; u < c.num_uavs; ++u)
            for (std::size_t i = 0; i < c.num_eaves; ++i)
                rel(r.sinr_eave_common[u * c.num_eaves + i], o.eave_common_sinr(u, i));
    }

    // [x]⁺ clamp and worst-case eavesdropper on dyadic values, compared exactly.
    RateReport r;
    r.num_uavs = 1;
    r.num_users = 1;
    r.num_eaves = 2;
    r.rate_private = {3.0};
    BeamformingSolution s;
    s.alloc = {0.25};
    r.rate_eave = {1.0, 2.5};
    const bool worst_case = secrecy_rate(r, s).per_link[0] == 0.75 && secrecy_rate(r, s, 0).per_link[0] == 2.25;
    r.rate_eave = {3.5, 4.0};
    const bool clamp = secrecy_rate(r, s).per_link[0] == 0.25;
    s.alloc = {0.0};
    const bool zero = secrecy_rate(r, s).total == 0.0;

    const bool pass = worst <= 1e-12 && worst_case && clamp && zero;
    return {pass, fmt("max relative deviation from the scalar re-derivation %.2e (<=1e-12) on 500 instances; "
                      "worst-case eavesdropper example %s, clamp examples %s",
                      worst, worst_case ? "exact" : "WRONG", clamp && zero ? "exact" : "WRONG")};
}

Outcome tightness(const Context&) {
    const auto t0 = std::chrono::steady_clock::now();
    SystemConstants c = sizes(2, 8, 2, 4, 2, 2);
    c.noise_user_w = c.noise_eave_w = 0.1;
    std::mt19937_64 rng(303);
    double aux = 0.0, budget = 0.0, power = 0.0, negativity = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const ChannelSet ch = random_channels(c, rng, 1.0);
        BeamformingSolution s = random_solution(c, rng);
        project_power(s, ch.served_users, c.power_w, 0.5);
        update_aux(ch, s, c);
        const KktResiduals k = kkt_residuals(ch, s, c);
        aux = std::max({aux, k.common_aux, k.eave_aux, k.private_aux});

        const RateReport pre = enforce_common_secrecy(ch, s, c);
        s.alloc = allocate_common(pre, ch.served_users);
        for (double v : compute_rates(ch, s, c).residuals.secrecy_budget) budget = std::max(budget, std::abs(v));

        const BeamformingSolution h = hnet_forward(ch, HNetParams::defaults(6), c);
        const RateReport r = compute_rates(ch, h, c);
        for (double v : r.residuals.power) power = std::max(power, v / c.power_w);
        negativity = std::max(negativity, r.residuals.negativity);
        for (double a : h.alloc)
            if (a < 0.0) negativity = std::max(negativity, -a);
    }
    const double t = seconds_since(t0);
    const bool pass = aux <= 1e-10 && budget == 0.0 && power <= 1e-9 && negativity == 0.0 && t < 30.0;
    return {pass, fmt("auxiliary constraints after update_aux %.2e (<=1e-10), secrecy budget after allocate_common "
                      "%.2e (=0), hnet power %.2e (<=1e-9), hnet negativity %.2e (=0) on 100 instances; %.2f s (<30 s)",
                      aux, budget, power, negativity, t)};
}

Outcome competitiveness(const Context& ctx) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto frozen = read_oracle_csv((ctx.source / "tests/data/v1/oracle_tiny.csv").string());
    const ExperimentConfig cfg = load_config((ctx.source / "configs/tiny.yaml").string());
    const auto fresh = oracle_instances(cfg, cfg.oracle_instances, cfg.oracle_samples);
    bool reproduced = fresh.size() == frozen.size();
    double hnet = 0.0, oracle = 0.0, per_instance = 0.0;
    for (std::size_t i = 0; reproduced && i < fresh.size(); ++i) {
        reproduced = fresh[i].instance_seed == frozen[i].instance_seed && fresh[i].best_value == frozen[i].best_value &&
                     fresh[i].samples == 1'000'000;
        hnet += fresh[i].hnet_value;
        oracle += frozen[i].best_value;
        per_instance += fresh[i].hnet_value / frozen[i].best_value / static_cast<double>(frozen.size());
    }
    const double ratio = oracle > 0.0 ? hnet / oracle : 0.0;
    const double t = seconds_since(t0);
    const bool pass = reproduced && frozen.size() == 20 && ratio >= 0.8 && t < 300.0;
    return {pass, fmt("hnet (6 blocks, beta 1, alpha 0.5) / oracle = %.3f (>=0.8) over %zu instances, per-instance mean "
                      "%.3f; fixture regeneration %s; %.1f s (<300 s)",
                      ratio, frozen.size(), per_instance, reproduced ? "bit-identical" : "DIFFERS", t)};
}

Outcome gradients(const Context&) {
    const auto t0 = std::chrono::steady_clock::now();
    auto tensor = [](std::vector<std::size_t> shape, std::uint64_t seed) {
        nn::Tensor x(std::move(shape));
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> n01;
        for (double& v : x.values()) v = n01(rng);
        return x;
    };
    // Redraws the input until no activation sits within the kink margin.
    auto check = [&](const nn::Network& net, std::vector<std::size_t> shape, nn::Mode mode) {
        for (std::uint64_t seed = 1; seed < 200; ++seed) {
            const auto r = nn::grad_check(net, tensor(shape, seed), mode, seed);
            if (!r.near_kink) return r.max_rel_error;
        }
        return std::numeric_limits<double>::infinity();
    };
    std::map<std::string, double> err;
    auto single = [](std::unique_ptr<nn::Layer> first, std::unique_ptr<nn::Layer> second = nullptr) {
        nn::Network net;
        net.add(std::move(first));
        if (second) net.add(std::move(second));
        net.init(7);
        return net;
    };
    err["dense"] = check(single(nn::make_dense(12, 9)), {4, 12}, nn::Mode::Train);
    err["conv3x3"] = check(single(nn::make_conv3x3(3, 4)), {2, 3, 5, 5}, nn::Mode::Train);
    err["batchnorm"] = std::max(check(single(nn::make_dense(6, 5), nn::make_batchnorm(5)), {8, 6}, nn::Mode::Train),
                                check(single(nn::make_conv3x3(2, 3), nn::make_batchnorm(3)), {3, 2, 4, 4}, nn::Mode::Train));
    err["relu"] = check(single(nn::make_dense(10, 8), nn::make_relu()), {4, 10}, nn::Mode::Train);
    err["maxpool"] = check(single(nn::make_conv3x3(2, 2), nn::make_maxpool()), {2, 2, 6, 6}, nn::Mode::Train);
    err["tanh"] = check(single(nn::make_dense(10, 8), nn::make_tanh()), {4, 10}, nn::Mode::Train);
    err["enn"] = check(make_enn(2, 2, 9), {4, 8}, nn::Mode::Train);
    err["cnn_actor"] = check(make_trajectory_actor(2, 16, 9), {3, kRasterChannels, 16, 16}, nn::Mode::Train);
    double worst = 0.0;
    std::string parts;
    for (const auto& [name, e] : err) {
        worst = std::max(worst, e);
        parts += fmt("%s %.1e, ", name.c_str(), e);
    }
    const double t = seconds_since(t0);
    return {worst <= 1e-4 && t < 60.0, parts + fmt("max %.2e (<=1e-4); %.1f s (<60 s)", worst, t)};
}

Outcome enn_fidelity_check(const Context&) {
    const auto t0 = std::chrono::steady_clock::now();
    nn::Network net = make_enn(2, 2, 3);
    const EnnTrainReport rep = pretrain_enn(net, 2, 2, {});
    const double train_s = seconds_since(t0);
    const LearnedEigenSolver solver(std::move(net), 2, 2);
    const EnnFidelity f = enn_fidelity(solver, 2, 1000, 0xfeed);
    const bool pass = f.count == 1000 && f.max_angle <= 0.1 && train_s <= 300.0;
    return {pass, fmt("max angle %.4f rad (<=0.1), mean %.4f rad over %zu held-out matrices after %zu steps "
                      "(final loss %.2e); pre-training %.1f s (<=300 s)",
                      f.max_angle, f.mean_angle, f.count, rep.steps, rep.final_loss, train_s)};
}

Outcome toy_learning(const Context& ctx) {
    const fs::path config = ctx.source / "configs/toy.yaml";
    std::string detail;
    bool pass = true;
    for (std::uint64_t seed : {1, 2, 3}) {
        const fs::path out = ctx.work / ("toy_seed" + std::to_string(seed));
        const auto t0 = std::chrono::steady_clock::now();
        const int code = run_command(Command::Train, config, out, {}, seed);
        const double t = seconds_since(t0);
        if (code != 0) return {false, fmt("seed %llu: train exited with %d", static_cast<unsigned long long>(seed), code)};
        const auto r = log_rewards(out / "training_log.csv");
        if (r.size() != 200) return {false, fmt("seed %llu: %zu log rows, expected 200", static_cast<unsigned long long>(seed), r.size())};
        const double first = mean(r, 0, 20), last = mean(r, 180, 200);
        pass = pass && last > first && t < 600.0;
        detail += fmt("seed %llu: first-20 %.4f, last-20 %.4f, %.0f s; ", static_cast<unsigned long long>(seed), first,
                      last, t);
    }

    // Ordering at toy scale: the seed-3 run above, single_drl on the same seed, and the oracle
    // policy, evaluated on identical fading seeds.
    ExperimentConfig cfg = load_config(config.string());
    cfg.train.seed = 3;
    const fs::path single_out = ctx.work / "toy_single_seed3";
    if (run_command(Command::Train, config, single_out, {"method=single_drl"}, 3) != 0) {
        return {false, detail + "single_drl training failed"};
    }
    std::vector<MethodRun> runs;
    TrainConfig t = cfg.train;
    t.method = Method::DunDrl;
    runs.push_back({Method::DunDrl, evaluate(t, nn::load_checkpoint((ctx.work / "toy_seed3/checkpoints/checkpoint_final.txt").string()),
                                             cfg.eval_episodes, cfg.eval_seed)});
    t.method = Method::SingleDrl;
    runs.push_back({Method::SingleDrl,
                    evaluate(t, nn::load_checkpoint((single_out / "checkpoints/checkpoint_final.txt").string()),
                             cfg.eval_episodes, cfg.eval_seed)});
    t.method = Method::Oracle;
    runs.push_back({Method::Oracle, evaluate_oracle(t, cfg.oracle_policy, cfg.eval_episodes, cfg.eval_seed)});
    const auto rows = compare_methods(runs);
    const double dun = rows[0].percent_of_oracle, single = rows[1].percent_of_oracle;
    pass = pass && dun > single;
    detail += fmt("percent of oracle: dun_drl %.2f, single_drl %.2f (dun_drl > single_drl)", dun, single);
    return {pass, detail};
}

Outcome determinism(const Context& ctx) {
    const fs::path config = ctx.source / "configs/tiny.yaml";
    const std::vector<std::string> ov = {"training.episodes=6", "oracle.instances=3", "oracle.samples=5000",
                                         "evaluation.episodes=2"};
    std::vector<std::string> files;
    for (const char* run_dir : {"det_a", "det_b"}) {
        const fs::path out = ctx.work / run_dir;
        fs::remove_all(out);
        for (const char* method : {"dun_drl", "single_drl"}) {
            auto o = ov;
            o.push_back(std::string("method=") + method);
            const fs::path sub = out / method;
            if (run_command(Command::Train, config, sub, o) != 0 || run_command(Command::Eval, config, sub, o) != 0) {
                return {false, std::string("run failed for ") + method};
            }
        }
        if (run_command(Command::Oracle, config, out / "oracle", ov) != 0) return {false, "oracle command failed"};
        auto sw = ov;
        sw.push_back("method=oracle");
        sw.push_back("evaluation.episodes=1");
        if (run_command(Command::Sweep, config, out / "sweep", sw) != 0) return {false, "sweep command failed"};
    }
    std::size_t compared = 0;
    for (const auto& entry : fs::recursive_directory_iterator(ctx.work / "det_a")) {
        if (!entry.is_regular_file()) continue;
        const fs::path rel = fs::relative(entry.path(), ctx.work / "det_a");
        const fs::path other = ctx.work / "det_b" / rel;
        if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) {
            return {false, "differs: " + rel.string()};
        }
        ++compared;
    }
    return {compared >= 10, fmt("%zu files byte-identical across two runs (training logs, eval rates, cdf, oracle, "
                                "sweep, checkpoints)",
                                compared)};
}

Outcome environment(const Context& ctx) {
    const ExperimentConfig cfg = load_config((ctx.source / "configs/default.yaml").string());
    const SystemConstants& c = cfg.train.env.constants;
    Env env(cfg.train.env);
    const HNetParams hp = HNetParams::defaults(cfg.train.hnet_blocks);
    std::size_t episodes = 0, min_len = 1000, max_len = 0, dirty = 0, steps = 0;
    double lo = 1.0, hi = -1.0;
    for (std::uint64_t ep = 0; ep < 5; ++ep) {
        env.reset(mix_seed(77, ep));
        std::size_t len = 0;
        while (!env.done()) {
            const StepOutput s = env.step(hnet_forward(env.channels(), hp, c), std::vector<Move>(c.num_uavs));
            lo = std::min(lo, s.reward);
            hi = std::max(hi, s.reward);
            if (!s.info.violations.beamforming_clean()) ++dirty;
            ++len;
            ++steps;
        }
        min_len = std::min(min_len, len);
        max_len = std::max(max_len, len);
        ++episodes;
    }
    // Oversized random beams and full-speed moves push the penalties as far as they go.
    std::mt19937_64 rng(78);
    std::uniform_real_distribution<double> heading(-3.2, 3.2);
    for (std::uint64_t ep = 0; ep < 3; ++ep) {
        env.reset(mix_seed(79, ep));
        std::size_t len = 0;
        while (!env.done()) {
            BeamformingSolution b = random_solution(c, rng);
            for (auto& w : b.common) w *= cplx(1e3);
            for (auto& a : b.alloc) a = -5.0;
            std::vector<Move> moves(c.num_uavs);
            for (auto& m : moves) m = {10.0 * c.max_step_m(), heading(rng)};
            const StepOutput s = env.step(b, moves);
            lo = std::min(lo, s.reward);
            hi = std::max(hi, s.reward);
            ++len;
        }
        min_len = std::min(min_len, len);
        max_len = std::max(max_len, len);
    }
    const bool pass = min_len == 10 && max_len == 10 && c.horizon == 10 && lo > -1.0 && hi < 1.0 && dirty == 0;
    return {pass, fmt("episode length %zu..%zu (=10); rewards in [%.17g, %.17g] (strictly inside (-1, 1)); "
                      "%zu of %zu HNet-driven steps with beamforming penalties (=0)",
                      min_len, max_len, lo, hi, dirty, steps)};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance gate"};
    std::set<int> only;
    std::string source = UAVSEC_SOURCE_DIR;
    std::string work = (fs::temp_directory_path() / "uavsec_acceptance").string();
    app.add_option("--only", only, "criteria to run (default: all)");
    app.add_option("--source", source, "source tree holding configs/ and tests/data/");
    app.add_option("--work", work, "scratch directory for run outputs");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<const char*, std::function<Outcome(const Context&)>>> criteria = {
        {"numerical kernels", numerical_kernels},
        {"rate model vs scalar re-derivation", rate_model},
        {"tightness identities", tightness},
        {"solver competitiveness", competitiveness},
        {"gradient exactness", gradients},
        {"ENN fidelity", enn_fidelity_check},
        {"toy learning progress", toy_learning},
        {"determinism", determinism},
        {"environment contract", environment},
    };
    const Context ctx{source, work};
    fs::create_directories(ctx.work);
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && only.count(id) == 0) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second(ctx);
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::printf("criterion %d %s: %s; %s [%.1f s]\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first,
                    o.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}

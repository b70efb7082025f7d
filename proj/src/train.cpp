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
#include "uavsec/enn.hpp"
#include "uavsec/error.hpp"
#include "uavsec/marl.hpp"
#include "uavsec/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <memory>
#include <numbers>

namespace uavsec {

namespace {

struct Agents {
    std::shared_ptr<const LearnedEigenSolver> enn;
    std::unique_ptr<HNetAgent> hnet;
    std::unique_ptr<TrajectoryAgent> traj;
    std::unique_ptr<SingleAgent> single;
};

struct Decision {
    BeamformingSolution beams;
    std::vector<Move> moves;
    std::vector<double> beam_state, beam_action;  // HNet agent, or the single agent's state and raw action
    std::vector<double> traj_obs, traj_action;
};

std::uint64_t layout_seed(const TrainConfig& cfg) { return cfg.env.layout_seed.value_or(cfg.seed); }

Env make_env(const TrainConfig& cfg) {
    EnvConfig e = cfg.env;
    e.layout_seed = layout_seed(cfg);
    return Env(std::move(e));
}

Agents make_agents(const TrainConfig& cfg, const Env& env) {
    const auto& c = cfg.env.constants;
    Agents a;
    if (cfg.method == Method::DunDrl) {
        if (cfg.eig_mode == EigMode::Learned) {
            nn::Network net = make_enn(c.rx_antennas, c.streams, mix_seed(cfg.seed, 5));
            EnnTrainConfig ec;
            ec.steps = cfg.enn_steps;
            ec.seed = mix_seed(cfg.seed, 6);
            pretrain_enn(net, c.rx_antennas, c.streams, ec);
            a.enn = std::make_shared<LearnedEigenSolver>(std::move(net), c.rx_antennas, c.streams);
        }
        a.hnet = std::make_unique<HNetAgent>(c, cfg.hnet_blocks, cfg.ddpg, mix_seed(cfg.seed, 3), a.enn);
        a.traj = std::make_unique<TrajectoryAgent>(c, cfg.env.raster, cfg.ddpg, mix_seed(cfg.seed, 4));
    } else if (cfg.method == Method::SingleDrl) {
        a.single = std::make_unique<SingleAgent>(c, single_state(env).size(), cfg.ddpg, mix_seed(cfg.seed, 3));
    } else {
        throw Error(ErrorCode::InvalidConfig, "method 'oracle' has no trainable agents");
    }
    return a;
}

Decision decide(const Agents& a, const Env& env, double sigma, std::mt19937_64& rng) {
    const auto& c = env.config().constants;
    Decision d;
    if (a.hnet) {
        d.beam_state = env.beam_state();
        d.beams = a.hnet->act(env.channels(), sigma, rng);
        d.beam_action = beam_action_features(env.channels(), d.beams, c);
        d.traj_obs = env.trajectory_observation();
        d.traj_action = a.traj->act(d.traj_obs, sigma, rng);
        for (std::size_t u = 0; u < c.num_uavs; ++u)
            d.moves.push_back(squash_move(d.traj_action[2 * u], d.traj_action[2 * u + 1], c.max_step_m()));
    } else {
        d.beam_state = single_state(env);
        d.beam_action = a.single->act(d.beam_state, sigma, rng);
        d.beams = a.single->decode_beams(d.beam_action, env.channels());
        d.moves = a.single->decode_moves(d.beam_action);
    }
    return d;
}

nn::Checkpoint snapshot(const Agents& a, const TrainConfig& cfg) {
    nn::Checkpoint ck;
    ck.seed = cfg.seed;
    ck.vectors["method"] = {static_cast<double>(cfg.method)};
    if (a.hnet) {
        ck.vectors["hnet_beta"] = a.hnet->params().beta;
        ck.vectors["hnet_alpha"] = a.hnet->params().alpha;
        ck.networks["beam_critic"] = a.hnet->critic().online();
        ck.networks["trajectory_actor"] = a.traj->actor();
        ck.networks["trajectory_critic_trunk"] = a.traj->critic_trunk();
        ck.networks["trajectory_critic_head"] = a.traj->critic_head();
        if (a.enn) ck.networks["enn"] = a.enn->network();
    } else {
        ck.networks["single_actor"] = a.single->actor();
        ck.networks["single_critic"] = a.single->critic().online();
    }
    return ck;
}

const nn::Network& need_network(const nn::Checkpoint& ck, const std::string& name) {
    const auto it = ck.networks.find(name);
    if (it == ck.networks.end()) throw Error(ErrorCode::IoError, "checkpoint lacks network '" + name + "'");
    return it->second;
}

const std::vector<double>& need_vector(const nn::Checkpoint& ck, const std::string& name) {
    const auto it = ck.vectors.find(name);
    if (it == ck.vectors.end()) throw Error(ErrorCode::IoError, "checkpoint lacks vector '" + name + "'");
    return it->second;
}

Agents restore(const TrainConfig& cfg, const Env& env, const nn::Checkpoint& ck) {
    const auto& c = cfg.env.constants;
    const auto method = static_cast<Method>(static_cast<int>(need_vector(ck, "method").at(0)));
    if (method != cfg.method) throw Error(ErrorCode::InvalidConfig, "checkpoint was trained with " + to_string(method));
    Agents a;
    if (method == Method::DunDrl) {
        if (ck.networks.count("enn") != 0) {
            a.enn = std::make_shared<LearnedEigenSolver>(need_network(ck, "enn"), c.rx_antennas, c.streams);
        }
        a.hnet = std::make_unique<HNetAgent>(c, cfg.hnet_blocks, cfg.ddpg, 0, a.enn);
        a.hnet->params().beta = need_vector(ck, "hnet_beta");
        a.hnet->params().alpha = need_vector(ck, "hnet_alpha");
        a.hnet->params().num_blocks = a.hnet->params().beta.size();
        a.hnet->params().validate();
        a.traj = std::make_unique<TrajectoryAgent>(c, cfg.env.raster, cfg.ddpg, 0);
        a.traj->set_actor(need_network(ck, "trajectory_actor"));
    } else {
        a.single = std::make_unique<SingleAgent>(c, single_state(env).size(), cfg.ddpg, 0);
        a.single->actor() = need_network(ck, "single_actor");
    }
    return a;
}

void save_if(const TrainConfig& cfg, const nn::Checkpoint& ck, const std::string& name) {
    if (cfg.checkpoint_dir.empty()) return;
    std::filesystem::create_directories(cfg.checkpoint_dir);
    nn::save_checkpoint((std::filesystem::path(cfg.checkpoint_dir) / name).string(), ck);
}

void accumulate(Violations& sum, const Violations& v) {
    sum.rho_r += v.rho_r;
    sum.rho_w += v.rho_w;
    sum.rho_neg_r += v.rho_neg_r;
    sum.rho_q1 += v.rho_q1;
    sum.rho_q0 += v.rho_q0;
    sum.rho_qf += v.rho_qf;
}

[[noreturn]] void rethrow_with(const Error& e, const std::string& where) {
    throw Error(e.code(), where + ": " + e.what());
}

} // namespace

TrainResult train(const TrainConfig& cfg) {
    cfg.env.validate();
    Env env = make_env(cfg);
    env.reset(mix_seed(cfg.seed, 1000));
    Agents agents = make_agents(cfg, env);

    TrainResult result;
    save_if(cfg, snapshot(agents, cfg), "checkpoint_initial.txt");

    ReplayBuffer beam_buf(cfg.ddpg.capacity), traj_buf(cfg.ddpg.capacity);
    std::mt19937_64 act_rng(mix_seed(cfg.seed, 1));
    std::mt19937_64 update_rng(mix_seed(cfg.seed, 2));

    for (std::size_t ep = 0; ep < cfg.episodes; ++ep) {
        try {
            env.reset(mix_seed(cfg.seed, 1000 + ep));
            const double sigma = exploration_sigma(cfg.ddpg, ep, cfg.episodes);
            EpisodeLog row;
            row.episode = ep;
            bool done = false;
            while (!done) {
                Decision d = decide(agents, env, sigma, act_rng);
                const StepOutput out = env.step(d.beams, d.moves);
                done = out.done;
                ++row.step_count;
                row.mean_reward += out.reward;
                row.total_secrecy += out.info.rates.total_secrecy;
                accumulate(row.violations, out.info.violations);

                if (agents.hnet) {
                    beam_buf.push({std::move(d.beam_state), std::move(d.beam_action), out.reward, env.beam_state(), done});
                    traj_buf.push({std::move(d.traj_obs), std::move(d.traj_action), out.reward,
                                   env.trajectory_observation(), done});
                    if (beam_buf.size() >= cfg.ddpg.batch) {
                        agents.hnet->update(beam_buf, env.scenario(), update_rng);
                        agents.traj->update(traj_buf, update_rng);
                    }
                } else {
                    beam_buf.push({std::move(d.beam_state), std::move(d.beam_action), out.reward, single_state(env), done});
                    if (beam_buf.size() >= cfg.ddpg.batch) agents.single->update(beam_buf, update_rng);
                }
            }
            row.mean_reward /= static_cast<double>(row.step_count);
            row.total_secrecy /= static_cast<double>(row.step_count);
            result.log.push_back(row);
        } catch (const Error& e) {
            rethrow_with(e, "episode " + std::to_string(ep));
        }
        if (cfg.checkpoint_every > 0 && (ep + 1) % cfg.checkpoint_every == 0) {
            save_if(cfg, snapshot(agents, cfg), "checkpoint_ep" + std::to_string(ep + 1) + ".txt");
        }
    }
    result.checkpoint = snapshot(agents, cfg);
    if (cfg.episodes > 0) save_if(cfg, result.checkpoint, "checkpoint_final.txt");
    return result;
}

std::vector<EvalStep> evaluate(const TrainConfig& cfg, const nn::Checkpoint& ckpt, std::size_t episodes,
                               std::uint64_t eval_seed) {
    cfg.env.validate();
    Env env = make_env(cfg);
    env.reset(mix_seed(eval_seed, 0));
    const Agents agents = restore(cfg, env, ckpt);
    std::mt19937_64 rng(eval_seed);
    std::vector<EvalStep> out;
    for (std::size_t ep = 0; ep < episodes; ++ep) {
        env.reset(mix_seed(eval_seed, ep));
        while (!env.done()) {
            const Decision d = decide(agents, env, 0.0, rng);
            const std::size_t slot = env.slot();
            const StepOutput s = env.step(d.beams, d.moves);
            out.push_back({ep, slot, s.reward, s.info.rates, s.info.violations});
        }
    }
    return out;
}

namespace {

Move toward(const Vec3& from, const Vec3& to, double max_step) {
    const double dx = to.x - from.x, dy = to.y - from.y;
    const double dist = std::hypot(dx, dy);
    Move m;
    m.distance_m = std::min(dist, max_step);
    double h = std::atan2(dy, dx);
    if (h < 0.0) h += 2.0 * std::numbers::pi;
    m.heading_rad = dist > 0.0 ? h : 0.0;
    return m;
}

} // namespace

std::vector<EvalStep> evaluate_oracle(const TrainConfig& cfg, const OraclePolicyConfig& oracle, std::size_t episodes,
                                      std::uint64_t eval_seed) {
    cfg.env.validate();
    const auto& c = cfg.env.constants;
    Env env = make_env(cfg);
    const HNetParams hp = HNetParams::defaults(cfg.hnet_blocks);
    std::vector<EvalStep> out;
    for (std::size_t ep = 0; ep < episodes; ++ep) {
        const std::uint64_t fading = mix_seed(eval_seed, ep);
        env.reset(fading);
        const SlotValue value = [&](const Scenario& s, std::size_t slot) {
            const ChannelSet ch = gen_channels(s, slot, fading);
            return compute_rates(ch, hnet_forward(ch, hp, c), c).total_secrecy;
        };
        while (!env.done()) {
            const std::size_t t = env.slot();
            const std::size_t left = c.horizon - t;  // moves until the terminal check
            std::vector<Move> moves;
            if (left == 1) {
                for (std::size_t u = 0; u < c.num_uavs; ++u)
                    moves.push_back(toward(env.scenario().uav_pos[u], env.scenario().terminal[u], c.max_step_m()));
            } else {
                // Compass moves close the terminal gap slower than a direct heading, so the
                // search keeps one move of slack and falls back to heading straight home.
                TrajectorySearch search;
                search.horizon = std::min(oracle.lookahead, left - 1);
                search.first_slot = t + 1;
                search.moves_to_terminal = left - 1;
                try {
                    moves = exhaustive_trajectory(env.scenario(), search, value).moves.front();
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::NoFeasiblePath) throw;
                    for (std::size_t u = 0; u < c.num_uavs; ++u)
                        moves.push_back(toward(env.scenario().uav_pos[u], env.scenario().terminal[u], c.max_step_m()));
                }
            }
            BeamformingSolution beams = hnet_forward(env.channels(), hp, c);
            const double hv = compute_rates(env.channels(), beams, c).total_secrecy;
            if (oracle.beam_samples > 0) {
                BeamOracleResult br =
                    brute_force_beamform(env.channels(), c, oracle.beam_samples, mix_seed(fading, 100 + t));
                if (br.best_value > hv) beams = std::move(br.best_solution);
            }
            const StepOutput s = env.step(beams, moves);
            out.push_back({ep, t, s.reward, s.info.rates, s.info.violations});
        }
    }
    return out;
}

} // namespace uavsec

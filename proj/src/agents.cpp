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
#include "uavsec/marl.hpp"

#include "uavsec/error.hpp"

#include <algorithm>
#include <cmath>

namespace uavsec {

namespace {

nn::Network make_mlp(std::size_t in, std::size_t hidden, std::size_t out, bool squash, std::uint64_t seed) {
    nn::Network net;
    net.add(nn::make_dense(in, hidden)).add(nn::make_relu());
    net.add(nn::make_dense(hidden, hidden)).add(nn::make_relu());
    net.add(nn::make_dense(hidden, out));
    if (squash) net.add(nn::make_tanh());
    net.init(seed);
    return net;
}

void add_conv_trunk(nn::Network& net) {
    net.add(nn::make_conv3x3(kRasterChannels, 8)).add(nn::make_batchnorm(8)).add(nn::make_relu());
    net.add(nn::make_conv3x3(8, 8)).add(nn::make_batchnorm(8)).add(nn::make_relu());
    net.add(nn::make_conv3x3(8, 8)).add(nn::make_batchnorm(8)).add(nn::make_relu());
    net.add(nn::make_maxpool()).add(nn::make_flatten());
}

std::size_t pooled_size(std::size_t raster) { return 8 * (raster / 2) * (raster / 2); }

constexpr std::size_t kTrunkFeatures = 32;

nn::Tensor stack_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t w = rows.empty() ? 0 : rows.front().size();
    nn::Tensor t({rows.size(), w});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != w) throw Error(ErrorCode::ShapeMismatch, "ragged batch");
        std::copy(rows[i].begin(), rows[i].end(), t.values().begin() + static_cast<std::ptrdiff_t>(i * w));
    }
    return t;
}

std::vector<double> concat(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a);
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

/// [B, F] and [B, A] side by side.
nn::Tensor join_columns(const nn::Tensor& f, const nn::Tensor& a) {
    const std::size_t b = f.dim(0), nf = f.dim(1), na = a.dim(1);
    nn::Tensor out({b, nf + na});
    for (std::size_t i = 0; i < b; ++i) {
        for (std::size_t j = 0; j < nf; ++j) out[i * (nf + na) + j] = f[i * nf + j];
        for (std::size_t j = 0; j < na; ++j) out[i * (nf + na) + nf + j] = a[i * na + j];
    }
    return out;
}

nn::Tensor columns(const nn::Tensor& x, std::size_t from, std::size_t count) {
    const std::size_t b = x.dim(0), w = x.dim(1);
    nn::Tensor out({b, count});
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = 0; j < count; ++j) out[i * count + j] = x[i * w + from + j];
    return out;
}

nn::Tensor raster_batch(const std::vector<const std::vector<double>*>& obs, const SystemConstants& c, std::size_t g) {
    const std::size_t per = kRasterChannels * g * g;
    nn::Tensor t({obs.size(), kRasterChannels, g, g});
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const nn::Tensor one = rasterize_trajectory(*obs[i], c, g);
        std::copy(one.values().begin(), one.values().end(), t.values().begin() + static_cast<std::ptrdiff_t>(i * per));
    }
    return t;
}

double gaussian(std::mt19937_64& rng, double sigma) {
    std::normal_distribution<double> n(0.0, sigma);
    return n(rng);
}

nn::AdamConfig adam_with(double lr) {
    nn::AdamConfig a;
    a.lr = lr;
    return a;
}

} // namespace

// ---- dense critic ------------------------------------------------------------

DenseCritic::DenseCritic(std::size_t state_dim, std::size_t action_dim, std::size_t hidden, std::uint64_t seed)
    : state_dim_(state_dim), action_dim_(action_dim), net_(make_mlp(state_dim + action_dim, hidden, 1, false, seed)),
      target_(net_) {}

double DenseCritic::value(const std::vector<double>& s, const std::vector<double>& a, bool target) const {
    const nn::Tensor x({1, state_dim_ + action_dim_}, concat(s, a));
    return (target ? target_ : net_).predict(x)[0];
}

double DenseCritic::fit(const std::vector<const Transition*>& batch, const std::vector<double>& targets,
                        const nn::AdamConfig& cfg) {
    std::vector<std::vector<double>> rows;
    rows.reserve(batch.size());
    for (const auto* t : batch) rows.push_back(concat(t->state, t->action));
    nn::ForwardCache cache;
    const nn::Tensor q = net_.forward(stack_rows(rows), nn::Mode::Train, &cache);
    const double n = static_cast<double>(batch.size());
    nn::Tensor g({batch.size(), 1});
    double loss = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const double e = q[i] - targets[i];
        loss += e * e / n;
        g[i] = 2.0 * e / n;
    }
    nn::adam_step(net_, net_.backward(cache, g), adam_, cfg);
    return loss;
}

std::vector<std::vector<double>> DenseCritic::action_gradients(const std::vector<std::vector<double>>& s,
                                                               const std::vector<std::vector<double>>& a) {
    std::vector<std::vector<double>> rows;
    rows.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) rows.push_back(concat(s[i], a[i]));
    nn::ForwardCache cache;
    net_.forward(stack_rows(rows), nn::Mode::Eval, &cache);
    const nn::Tensor ones({s.size(), 1}, 1.0);
    const nn::Tensor gin = net_.backward(cache, ones).input;
    std::vector<std::vector<double>> out(s.size(), std::vector<double>(action_dim_));
    const std::size_t w = state_dim_ + action_dim_;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < action_dim_; ++j) out[i][j] = gin[i * w + state_dim_ + j];
    return out;
}

void DenseCritic::soft_update(double tau) { nn::soft_update(target_, net_, tau); }

// ---- HNet beamforming agent ----------------------------------------------------

HNetAgent::HNetAgent(const SystemConstants& constants, std::size_t num_blocks, const DdpgConfig& cfg,
                     std::uint64_t seed, std::shared_ptr<const EigenSolver> learned)
    : constants_(constants), cfg_(cfg), params_(HNetParams::defaults(num_blocks)),
      critic_(2 * constants.rx_antennas * constants.tx_antennas * (constants.num_users + constants.num_eaves) *
                      constants.num_uavs +
                  2,
              beam_action_dim(constants), cfg.hidden, seed) {
    if (learned) {
        params_.eig_mode = EigMode::Learned;
        params_.learned = std::move(learned);
    }
    params_.validate();
    target_params_ = params_;
}

BeamformingSolution HNetAgent::act(const ChannelSet& channels, double sigma, std::mt19937_64& rng) const {
    if (sigma <= 0.0) return hnet_forward(channels, params_, constants_);
    HNetParams noisy = params_;
    for (double& a : noisy.alpha) a += gaussian(rng, sigma);
    noisy.project();
    return hnet_forward(channels, noisy, constants_);
}

UpdateStats HNetAgent::update(const ReplayBuffer& buffer, const Scenario& layout, std::mt19937_64& rng) {
    const auto batch = buffer.sample(cfg_.batch, rng);
    UpdateStats stats;

    std::vector<double> y(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const Transition& t = *batch[i];
        double q_next = 0.0;
        if (!t.done) {
            const ChannelSet ch = channels_from_state(t.next_state, layout);
            const auto a_next = beam_action_features(ch, hnet_forward(ch, target_params_, constants_), constants_);
            q_next = critic_.value(t.next_state, a_next, true);
        }
        y[i] = td_target(t.reward, t.done, cfg_.gamma, q_next);
    }
    stats.critic_loss = critic_.fit(batch, y, adam_with(cfg_.critic_lr));

    // Parameter gradient of Q(s, HNet(s; β, α)) by central differences of the action features.
    const std::size_t n = std::min(cfg_.hnet_actor_samples, batch.size());
    const std::size_t blocks = params_.num_blocks;
    std::vector<std::vector<double>> states, actions;
    std::vector<ChannelSet> chans;
    for (std::size_t i = 0; i < n; ++i) {
        chans.push_back(channels_from_state(batch[i]->state, layout));
        states.push_back(batch[i]->state);
        actions.push_back(beam_action_features(chans.back(), hnet_forward(chans.back(), params_, constants_), constants_));
    }
    const auto dq = critic_.action_gradients(states, actions);
    for (std::size_t i = 0; i < n; ++i) stats.actor_objective += critic_.value(states[i], actions[i]) / static_cast<double>(n);

    constexpr double kStep = 1e-3;
    std::vector<double> grad(2 * blocks, 0.0);  // β then α
    for (std::size_t j = 0; j < 2 * blocks; ++j) {
        const bool is_beta = j < blocks;
        const std::size_t b = is_beta ? j : j - blocks;
        const double lo = is_beta ? kBetaMin : kAlphaMin;
        const double hi = is_beta ? kBetaMax : kAlphaMax;
        const double x = is_beta ? params_.beta[b] : params_.alpha[b];
        const double xp = std::min(hi, x + kStep);
        const double xm = std::max(lo, x - kStep);
        HNetParams plus = params_, minus = params_;
        (is_beta ? plus.beta : plus.alpha)[b] = xp;
        (is_beta ? minus.beta : minus.alpha)[b] = xm;
        for (std::size_t i = 0; i < n; ++i) {
            const auto fp = beam_action_features(chans[i], hnet_forward(chans[i], plus, constants_), constants_);
            const auto fm = beam_action_features(chans[i], hnet_forward(chans[i], minus, constants_), constants_);
            double dot = 0.0;
            for (std::size_t k = 0; k < fp.size(); ++k) dot += dq[i][k] * (fp[k] - fm[k]);
            grad[j] -= dot / (xp - xm) / static_cast<double>(n);  // ascent on Q
        }
    }
    std::vector<std::span<double>> p{std::span<double>(params_.beta), std::span<double>(params_.alpha)};
    const std::vector<std::span<const double>> g{std::span<const double>(grad.data(), blocks),
                                                 std::span<const double>(grad.data() + blocks, blocks)};
    nn::adam_update(p, g, actor_adam_, adam_with(cfg_.actor_lr));
    params_.project();

    critic_.soft_update(cfg_.tau);
    for (std::size_t b = 0; b < blocks; ++b) {
        target_params_.beta[b] = cfg_.tau * params_.beta[b] + (1.0 - cfg_.tau) * target_params_.beta[b];
        target_params_.alpha[b] = cfg_.tau * params_.alpha[b] + (1.0 - cfg_.tau) * target_params_.alpha[b];
    }
    return stats;
}

// ---- CNN trajectory agent ------------------------------------------------------

nn::Network make_trajectory_actor(std::size_t num_uavs, std::size_t raster, std::uint64_t seed) {
    nn::Network net;
    add_conv_trunk(net);
    net.add(nn::make_dense(pooled_size(raster), 2 * num_uavs)).add(nn::make_tanh());
    net.init(seed);
    return net;
}

TrajectoryAgent::TrajectoryAgent(const SystemConstants& constants, std::size_t raster, const DdpgConfig& cfg,
                                 std::uint64_t seed)
    : constants_(constants), raster_(raster), cfg_(cfg) {
    if (raster < 2 || raster % 2 != 0) throw Error(ErrorCode::InvalidConfig, "raster must be even and >= 2");
    actor_ = make_trajectory_actor(constants.num_uavs, raster, mix_seed(seed, 1));
    add_conv_trunk(trunk_);
    trunk_.add(nn::make_dense(pooled_size(raster), kTrunkFeatures)).add(nn::make_relu());
    trunk_.init(mix_seed(seed, 2));
    head_ = make_mlp(kTrunkFeatures + 2 * constants.num_uavs, cfg.hidden, 1, false, mix_seed(seed, 3));
    actor_target_ = actor_;
    trunk_target_ = trunk_;
    head_target_ = head_;
}

void TrajectoryAgent::set_actor(const nn::Network& actor) {
    actor_ = actor;
    actor_target_ = actor;
}

std::vector<double> TrajectoryAgent::act(const std::vector<double>& obs, double sigma, std::mt19937_64& rng) const {
    const nn::Tensor out = actor_.predict(rasterize_trajectory(obs, constants_, raster_));
    std::vector<double> a(out.values());
    if (sigma > 0.0)
        for (double& x : a) x = std::clamp(x + gaussian(rng, sigma), -1.0, 1.0);
    return a;
}

double TrajectoryAgent::q_value(const std::vector<double>& obs, const std::vector<double>& action) const {
    const nn::Tensor f = trunk_.predict(rasterize_trajectory(obs, constants_, raster_));
    return head_.predict(join_columns(f, nn::Tensor({1, action.size()}, action)))[0];
}

UpdateStats TrajectoryAgent::update(const ReplayBuffer& buffer, std::mt19937_64& rng) {
    const auto batch = buffer.sample(cfg_.batch, rng);
    const std::size_t b = batch.size();
    const std::size_t na = 2 * constants_.num_uavs;
    UpdateStats stats;

    std::vector<const std::vector<double>*> s, s_next;
    std::vector<std::vector<double>> acts;
    for (const auto* t : batch) {
        s.push_back(&t->state);
        s_next.push_back(&t->next_state);
        acts.push_back(t->action);
    }
    const nn::Tensor x = raster_batch(s, constants_, raster_);
    const nn::Tensor x_next = raster_batch(s_next, constants_, raster_);

    const nn::Tensor a_next = actor_target_.predict(x_next);
    const nn::Tensor q_next = head_target_.predict(join_columns(trunk_target_.predict(x_next), a_next));

    nn::ForwardCache ct, ch;
    const nn::Tensor f = trunk_.forward(x, nn::Mode::Train, &ct);
    const nn::Tensor q = head_.forward(join_columns(f, stack_rows(acts)), nn::Mode::Train, &ch);
    nn::Tensor g({b, 1});
    for (std::size_t i = 0; i < b; ++i) {
        const double y = td_target(batch[i]->reward, batch[i]->done, cfg_.gamma, q_next[i]);
        const double e = q[i] - y;
        stats.critic_loss += e * e / static_cast<double>(b);
        g[i] = 2.0 * e / static_cast<double>(b);
    }
    const nn::Gradients gh = head_.backward(ch, g);
    const nn::Gradients gt = trunk_.backward(ct, columns(gh.input, 0, kTrunkFeatures));
    nn::adam_step(head_, gh, head_adam_, adam_with(cfg_.critic_lr));
    nn::adam_step(trunk_, gt, trunk_adam_, adam_with(cfg_.critic_lr));

    nn::ForwardCache ca, cq;
    const nn::Tensor a_pi = actor_.forward(x, nn::Mode::Train, &ca);
    const nn::Tensor q_pi = head_.forward(join_columns(trunk_.predict(x), a_pi), nn::Mode::Eval, &cq);
    for (std::size_t i = 0; i < b; ++i) stats.actor_objective += q_pi[i] / static_cast<double>(b);
    const nn::Tensor minus({b, 1}, -1.0 / static_cast<double>(b));
    const nn::Tensor dq_da = columns(head_.backward(cq, minus).input, kTrunkFeatures, na);
    nn::adam_step(actor_, actor_.backward(ca, dq_da), actor_adam_, adam_with(cfg_.actor_lr));

    nn::soft_update(actor_target_, actor_, cfg_.tau);
    nn::soft_update(trunk_target_, trunk_, cfg_.tau);
    nn::soft_update(head_target_, head_, cfg_.tau);
    return stats;
}

// ---- single-agent baseline -----------------------------------------------------

std::vector<double> single_state(const Env& env) {
    std::vector<double> s = env.beam_state();
    const std::vector<double> o = env.trajectory_observation();
    const std::size_t keep = 1 + 4 * env.config().constants.num_uavs;  // time, UAVs, terminal points
    s.insert(s.end(), o.begin(), o.begin() + static_cast<std::ptrdiff_t>(keep));
    return s;
}

SingleAgent::SingleAgent(const SystemConstants& constants, std::size_t state_dim, const DdpgConfig& cfg,
                         std::uint64_t seed)
    : constants_(constants), cfg_(cfg), state_dim_(state_dim),
      action_dim_(2 * constants.tx_antennas * constants.streams * (constants.num_uavs + constants.num_users) + 1 +
                  2 * constants.num_uavs),
      actor_(make_mlp(state_dim, cfg.hidden, action_dim_, true, mix_seed(seed, 1))), actor_target_(actor_),
      critic_(state_dim, action_dim_, cfg.hidden, mix_seed(seed, 2)) {}

std::vector<double> SingleAgent::act(const std::vector<double>& state, double sigma, std::mt19937_64& rng) const {
    std::vector<double> a(actor_.predict(nn::Tensor({1, state_dim_}, state)).values());
    if (sigma > 0.0)
        for (double& x : a) x = std::clamp(x + gaussian(rng, sigma), -1.0, 1.0);
    return a;
}

BeamformingSolution SingleAgent::decode_beams(const std::vector<double>& action, const ChannelSet& channels) const {
    if (action.size() != action_dim_) throw Error(ErrorCode::ShapeMismatch, "single-agent action size");
    BeamformingSolution sol = BeamformingSolution::zeros(constants_);
    std::size_t pos = 0;
    auto fill = [&](ComplexMatrix& w) {
        for (auto& z : w.entries()) {
            z = cplx(action[pos], action[pos + 1]);
            pos += 2;
        }
    };
    for (auto& w : sol.common) fill(w);
    for (auto& w : sol.priv) fill(w);
    const double alpha = kAlphaMin + (kAlphaMax - kAlphaMin) * (1.0 + action[pos]) / 2.0;
    project_power(sol, channels.served_users, constants_.power_w, alpha);
    const RateReport report = enforce_common_secrecy(channels, sol, constants_);
    sol.alloc = allocate_common(report, channels.served_users);
    return sol;
}

std::vector<Move> SingleAgent::decode_moves(const std::vector<double>& action) const {
    const std::size_t base = action_dim_ - 2 * constants_.num_uavs;
    std::vector<Move> moves;
    for (std::size_t u = 0; u < constants_.num_uavs; ++u)
        moves.push_back(squash_move(action[base + 2 * u], action[base + 2 * u + 1], constants_.max_step_m()));
    return moves;
}

UpdateStats SingleAgent::update(const ReplayBuffer& buffer, std::mt19937_64& rng) {
    const auto batch = buffer.sample(cfg_.batch, rng);
    const std::size_t b = batch.size();
    UpdateStats stats;

    std::vector<std::vector<double>> s, s_next;
    for (const auto* t : batch) {
        s.push_back(t->state);
        s_next.push_back(t->next_state);
    }
    const nn::Tensor a_next = actor_target_.predict(stack_rows(s_next));
    std::vector<double> y(b);
    for (std::size_t i = 0; i < b; ++i) {
        double q_next = 0.0;
        if (!batch[i]->done) {
            const std::vector<double> an(a_next.values().begin() + static_cast<std::ptrdiff_t>(i * action_dim_),
                                         a_next.values().begin() + static_cast<std::ptrdiff_t>((i + 1) * action_dim_));
            q_next = critic_.value(s_next[i], an, true);
        }
        y[i] = td_target(batch[i]->reward, batch[i]->done, cfg_.gamma, q_next);
    }
    stats.critic_loss = critic_.fit(batch, y, adam_with(cfg_.critic_lr));

    nn::ForwardCache ca;
    const nn::Tensor a_pi = actor_.forward(stack_rows(s), nn::Mode::Train, &ca);
    std::vector<std::vector<double>> acts(b);
    for (std::size_t i = 0; i < b; ++i) {
        acts[i].assign(a_pi.values().begin() + static_cast<std::ptrdiff_t>(i * action_dim_),
                       a_pi.values().begin() + static_cast<std::ptrdiff_t>((i + 1) * action_dim_));
        stats.actor_objective += critic_.value(s[i], acts[i]) / static_cast<double>(b);
    }
    const auto dq = critic_.action_gradients(s, acts);
    nn::Tensor g({b, action_dim_});
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = 0; j < action_dim_; ++j) g[i * action_dim_ + j] = -dq[i][j] / static_cast<double>(b);
    nn::adam_step(actor_, actor_.backward(ca, g), actor_adam_, adam_with(cfg_.actor_lr));

    nn::soft_update(actor_target_, actor_, cfg_.tau);
    critic_.soft_update(cfg_.tau);
    return stats;
}

} // namespace uavsec

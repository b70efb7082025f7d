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
#include <numeric>
#include <numbers>

namespace uavsec {

void RewardWeights::validate() const {
    for (double c : {c_r, c_w, c_neg, c_q1, c_q0, c_qf}) {
        if (!(c >= 0.0) || !std::isfinite(c)) throw Error(ErrorCode::InvalidConfig, "reward weights must be finite and >= 0");
    }
}

double reward(double total_secrecy, const Violations& v, const RewardWeights& w) {
    const double x = total_secrecy - w.c_r * v.rho_r - w.c_w * v.rho_w - w.c_neg * v.rho_neg_r - w.c_q1 * v.rho_q1 -
                     w.c_q0 * v.rho_q0 - w.c_qf * v.rho_qf;
    constexpr double kEdge = 1.0 - 1e-15;
    return std::clamp(std::tanh(x), -kEdge, kEdge);
}

Violations beamforming_violations(const RateReport& report, double power_w) {
    Violations v;
    const auto& res = report.residuals;
    v.rho_r = std::accumulate(res.secrecy_budget.begin(), res.secrecy_budget.end(), 0.0);
    v.rho_w = std::accumulate(res.power.begin(), res.power.end(), 0.0) / power_w;
    v.rho_neg_r = res.negativity;
    return v;
}

void EnvConfig::validate() const {
    constants.validate();
    weights.validate();
    if (start.size() != constants.num_uavs || terminal.size() != constants.num_uavs) {
        throw Error(ErrorCode::InvalidConfig, "need one start and one terminal point per UAV");
    }
    if (raster < 2) throw Error(ErrorCode::InvalidConfig, "raster must be >= 2");
}

Env::Env(EnvConfig config) : config_(std::move(config)) { config_.validate(); }

void Env::reset(std::uint64_t seed) {
    const std::uint64_t layout = config_.layout_seed.value_or(seed);
    scenario_ = init_scenario(config_.constants, config_.placement, config_.start, config_.terminal, layout);
    for (auto& q : scenario_.uav_pos) {
        q.x += config_.start_offset.x;
        q.y += config_.start_offset.y;
        q.z += config_.start_offset.z;
    }
    fading_seed_ = seed;
    slot_ = 0;
    started_ = true;
    channels_ = gen_channels(scenario_, 0, fading_seed_);
}

StepOutput Env::step(const BeamformingSolution& beams, const std::vector<Move>& moves) {
    if (!started_ || done()) throw Error(ErrorCode::EpisodeFinished, "step called on a finished episode");
    const auto& c = config_.constants;
    if (moves.size() != c.num_uavs) throw Error(ErrorCode::ShapeMismatch, "need one move per UAV");

    StepOutput out;
    out.info.slot = slot_;
    out.info.rates = compute_rates(channels_, beams, c);
    Violations v = beamforming_violations(out.info.rates, c.power_w);

    // Distances are measured in units of the episode travel budget T·D.
    const double budget = c.max_step_m() * static_cast<double>(c.horizon);
    const double unit = budget > 0.0 ? budget : 1.0;
    if (slot_ == 0) {
        for (std::size_t u = 0; u < c.num_uavs; ++u) v.rho_q0 += distance(scenario_.uav_pos[u], scenario_.start[u]) / unit;
    }
    std::vector<Vec3> next(c.num_uavs);
    for (std::size_t u = 0; u < c.num_uavs; ++u) {
        const StepResult r = step_uav(scenario_, u, moves[u]);
        v.rho_q1 += r.excess_m / unit;
        next[u] = r.position;
    }
    scenario_.uav_pos = std::move(next);
    ++slot_;
    if (done()) {
        v.rho_qf = terminal_violation(scenario_) / unit;
    } else {
        channels_ = gen_channels(scenario_, slot_, fading_seed_);
    }

    out.info.violations = v;
    out.reward = reward(out.info.rates.total_secrecy, v, config_.weights);
    out.done = done();
    return out;
}

std::size_t Env::beam_state_dim() const noexcept {
    const auto& c = config_.constants;
    return 2 * c.rx_antennas * c.tx_antennas * (c.num_users + c.num_eaves) * c.num_uavs + 2;
}

namespace {

void append_scaled(std::vector<double>& out, const ComplexMatrix& h, double scale) {
    for (const cplx& z : h.entries()) {
        out.push_back(z.real() * scale);
        out.push_back(z.imag() * scale);
    }
}

void splat(nn::Tensor& t, std::size_t channel, std::size_t g, double fx, double fy, double weight) {
    const double gx = std::clamp(fx * static_cast<double>(g) - 0.5, 0.0, static_cast<double>(g - 1));
    const double gy = std::clamp(fy * static_cast<double>(g) - 0.5, 0.0, static_cast<double>(g - 1));
    const auto x0 = std::min(static_cast<std::size_t>(gx), g - 2);
    const auto y0 = std::min(static_cast<std::size_t>(gy), g - 2);
    const double ax = gx - static_cast<double>(x0);
    const double ay = gy - static_cast<double>(y0);
    const std::size_t base = channel * g * g;
    t[base + y0 * g + x0] += weight * (1 - ax) * (1 - ay);
    t[base + y0 * g + x0 + 1] += weight * ax * (1 - ay);
    t[base + (y0 + 1) * g + x0] += weight * (1 - ax) * ay;
    t[base + (y0 + 1) * g + x0 + 1] += weight * ax * ay;
}

} // namespace

std::vector<double> Env::beam_state() const {
    const auto& c = config_.constants;
    std::vector<double> s;
    s.reserve(beam_state_dim());
    const double su = std::sqrt(c.power_w / c.noise_user_w);
    const double se = std::sqrt(c.power_w / c.noise_eave_w);
    for (const auto& h : channels_.user) append_scaled(s, h, su);
    for (const auto& h : channels_.eave) append_scaled(s, h, se);
    s.push_back(static_cast<double>(c.tx_antennas));
    s.push_back(static_cast<double>(c.rx_antennas));
    return s;
}

std::vector<double> Env::trajectory_observation() const {
    const double ax = scenario_.placement.area_x_m;
    const double ay = scenario_.placement.area_y_m;
    std::vector<double> o;
    o.push_back(1.0 - static_cast<double>(slot_) / static_cast<double>(config_.constants.horizon));
    for (const auto& q : scenario_.uav_pos) o.insert(o.end(), {q.x / ax, q.y / ay});
    for (const auto& q : scenario_.terminal) o.insert(o.end(), {q.x / ax, q.y / ay});
    for (const auto& p : scenario_.users) o.insert(o.end(), {p.x / ax, p.y / ay});
    for (const auto& p : scenario_.eaves) o.insert(o.end(), {p.x / ax, p.y / ay});
    return o;
}

nn::Tensor Env::trajectory_state() const {
    return rasterize_trajectory(trajectory_observation(), config_.constants, config_.raster);
}

nn::Tensor rasterize_trajectory(const std::vector<double>& obs, const SystemConstants& c, std::size_t g) {
    const std::size_t u = c.num_uavs;
    if (obs.size() != 1 + 2 * (2 * u + c.num_users + c.num_eaves)) {
        throw Error(ErrorCode::ShapeMismatch, "trajectory observation size");
    }
    nn::Tensor t({1, kRasterChannels, g, g});
    std::size_t pos = 1;
    auto put = [&](std::size_t channel, std::size_t count) {
        for (std::size_t i = 0; i < count; ++i, pos += 2) splat(t, channel, g, obs[pos], obs[pos + 1], 1.0);
    };
    put(2, u);
    put(3, u);
    put(0, c.num_users);
    put(1, c.num_eaves);
    for (std::size_t i = 0; i < g * g; ++i) t[4 * g * g + i] = obs[0];
    return t;
}

ChannelSet channels_from_state(const std::vector<double>& state, const Scenario& layout) {
    const auto& c = layout.constants;
    const std::size_t n = c.rx_antennas;
    const std::size_t m = c.tx_antennas;
    const std::size_t links = (c.num_users + c.num_eaves) * c.num_uavs;
    if (state.size() != 2 * n * m * links + 2) throw Error(ErrorCode::ShapeMismatch, "beam state size");
    ChannelSet ch;
    ch.num_uavs = c.num_uavs;
    ch.num_users = c.num_users;
    ch.num_eaves = c.num_eaves;
    ch.serving_uav = layout.serving_uav;
    ch.served_users = layout.served_users;
    const double su = std::sqrt(c.noise_user_w / c.power_w);
    const double se = std::sqrt(c.noise_eave_w / c.power_w);
    std::size_t pos = 0;
    auto read = [&](double scale) {
        ComplexMatrix h(n, m);
        for (auto& z : h.entries()) {
            z = cplx(state[pos] * scale, state[pos + 1] * scale);
            pos += 2;
        }
        return h;
    };
    for (std::size_t l = 0; l < c.num_uavs * c.num_users; ++l) ch.user.push_back(read(su));
    for (std::size_t l = 0; l < c.num_uavs * c.num_eaves; ++l) ch.eave.push_back(read(se));
    return ch;
}

Move squash_move(double a_mu, double a_theta, double max_step_m) {
    const double mu = std::clamp(a_mu, -1.0, 1.0);
    const double th = std::clamp(a_theta, -1.0, 1.0);
    Move mv;
    mv.distance_m = max_step_m * (1.0 + mu) / 2.0;
    mv.heading_rad = std::numbers::pi * (1.0 + th);
    if (mv.heading_rad >= 2.0 * std::numbers::pi) mv.heading_rad = 0.0;
    return mv;
}

std::size_t beam_action_dim(const SystemConstants& c) noexcept {
    return c.num_uavs * (c.num_users + c.num_eaves) + c.num_users * (c.num_users + c.num_eaves);
}

std::vector<double> beam_action_features(const ChannelSet& channels, const BeamformingSolution& sol,
                                         const SystemConstants& c) {
    const LinkGains g = link_gains(channels, sol, c);
    std::vector<double> f;
    f.reserve(beam_action_dim(c));
    for (double x : g.common_user) f.push_back(std::log1p(x / c.noise_user_w));
    for (double x : g.common_eave) f.push_back(std::log1p(x / c.noise_eave_w));
    for (double x : g.private_user) f.push_back(std::log1p(x / c.noise_user_w));
    for (double x : g.private_eave) f.push_back(std::log1p(x / c.noise_eave_w));
    return f;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw Error(ErrorCode::InvalidArgument, "replay capacity must be positive");
    items_.reserve(std::min<std::size_t>(capacity, 4096));
}

void ReplayBuffer::push(Transition t) {
    if (items_.size() < capacity_) {
        items_.push_back(std::move(t));
    } else {
        items_[cursor_] = std::move(t);
    }
    cursor_ = (cursor_ + 1) % capacity_;
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t n, std::mt19937_64& rng) const {
    if (n > items_.size()) {
        throw Error(ErrorCode::BufferUnderfull,
                    "sample of " + std::to_string(n) + " from " + std::to_string(items_.size()) + " transitions");
    }
    std::vector<std::size_t> idx(items_.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<const Transition*> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
        std::swap(idx[i], idx[pick(rng)]);
        out.push_back(&items_[idx[i]]);
    }
    return out;
}

double exploration_sigma(const DdpgConfig& cfg, std::size_t episode, std::size_t episodes) {
    const double half = static_cast<double>(episodes) / 2.0;
    if (half <= 0.0) return cfg.noise_end;
    const double frac = std::min(1.0, static_cast<double>(episode) / half);
    return cfg.noise_start + (cfg.noise_end - cfg.noise_start) * frac;
}

double td_target(double reward, bool done, double gamma, double q_next) noexcept {
    return done ? reward : reward + gamma * q_next;
}

std::string to_string(Method m) {
    switch (m) {
    case Method::DunDrl: return "dun_drl";
    case Method::SingleDrl: return "single_drl";
    case Method::Oracle: return "oracle";
    }
    return "unknown";
}

Method method_from_string(const std::string& name) {
    if (name == "dun_drl") return Method::DunDrl;
    if (name == "single_drl") return Method::SingleDrl;
    if (name == "oracle") return Method::Oracle;
    throw Error(ErrorCode::InvalidConfig, "unknown method '" + name + "'");
}

} // namespace uavsec

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

#include "uavsec/hnet.hpp"
#include "uavsec/neural.hpp"
#include "uavsec/rates.hpp"
#include "uavsec/scenario.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace uavsec {

// ---- reward ----------------------------------------------------------------

struct RewardWeights {
    double c_r = 1.0;    // secrecy-budget residual
    double c_w = 1.0;    // power residual
    double c_neg = 1.0;  // negative allocations
    double c_q1 = 1.0;   // per-slot displacement excess
    double c_q0 = 1.0;   // start-point deviation
    double c_qf = 1.0;   // terminal deviation

    /// Throws InvalidConfig on negative or non-finite weights.
    void validate() const;
};

/// Penalty magnitudes of one step. Power is in units of P_u, distances in units of T·D.
struct Violations {
    double rho_r = 0.0;
    double rho_w = 0.0;
    double rho_neg_r = 0.0;
    double rho_q1 = 0.0;
    double rho_q0 = 0.0;
    double rho_qf = 0.0;

    [[nodiscard]] bool beamforming_clean() const noexcept { return rho_r == 0.0 && rho_w == 0.0 && rho_neg_r == 0.0; }
};

/// tanh(secrecy − Σ C·ρ), kept strictly inside (−1, 1).
double reward(double total_secrecy, const Violations& v, const RewardWeights& w);

/// Beamforming penalties of a rate report.
Violations beamforming_violations(const RateReport& report, double power_w);

// ---- environment -------------------------------------------------------------

struct EnvConfig {
    SystemConstants constants;
    PlacementSpec placement;
    std::vector<Vec3> start;
    std::vector<Vec3> terminal;
    RewardWeights weights;
    std::size_t raster = 16;  // trajectory-state grid side
    /// Fixed layout seed; when unset each reset draws the layout from its own seed.
    std::optional<std::uint64_t> layout_seed;
    /// Offset applied to every UAV at reset, used only for start-perturbation experiments.
    Vec3 start_offset{};

    void validate() const;
};

inline constexpr std::size_t kRasterChannels = 5;

struct StepInfo {
    RateReport rates;
    Violations violations;
    std::size_t slot = 0;
};

struct StepOutput {
    double reward = 0.0;  // shared by both agents
    bool done = false;
    StepInfo info;
};

class Env {
public:
    explicit Env(EnvConfig config);

    /// UAVs at their start points, fresh channels for slot 0. Layout from
    /// `layout_seed` when configured (else `seed`); fading from `seed`.
    void reset(std::uint64_t seed);
    /// Evaluates `beams` on the current channels, then moves the UAVs. Throws EpisodeFinished.
    StepOutput step(const BeamformingSolution& beams, const std::vector<Move>& moves);

    [[nodiscard]] const EnvConfig& config() const noexcept { return config_; }
    [[nodiscard]] const Scenario& scenario() const noexcept { return scenario_; }
    [[nodiscard]] const ChannelSet& channels() const noexcept { return channels_; }
    [[nodiscard]] std::size_t slot() const noexcept { return slot_; }
    [[nodiscard]] bool done() const noexcept { return slot_ >= config_.constants.horizon; }
    [[nodiscard]] std::size_t episode_length() const noexcept { return config_.constants.horizon; }

    /// Real/imaginary CSI of every user and eavesdropper link, scaled by √(P/σ²), then M and N.
    [[nodiscard]] std::vector<double> beam_state() const;
    [[nodiscard]] std::size_t beam_state_dim() const noexcept;
    /// Compact trajectory observation: remaining-time fraction, then normalized (x, y) of
    /// the UAVs, their terminal points, the users and the eavesdroppers.
    [[nodiscard]] std::vector<double> trajectory_observation() const;
    /// Raster of trajectory_observation().
    [[nodiscard]] nn::Tensor trajectory_state() const;

private:
    EnvConfig config_;
    Scenario scenario_;
    ChannelSet channels_;
    std::uint64_t fading_seed_ = 0;
    std::size_t slot_ = 0;
    bool started_ = false;
};

/// [1, 5, G, G] bilinear raster of a compact trajectory observation: users, eavesdroppers,
/// UAVs, UAV terminal points, remaining-time plane.
nn::Tensor rasterize_trajectory(const std::vector<double>& obs, const SystemConstants& constants, std::size_t grid);

/// Inverse of the CSI part of Env::beam_state for the same configuration.
ChannelSet channels_from_state(const std::vector<double>& state, const Scenario& layout);

/// Planar move from a squashed action a ∈ [−1, 1]²: μ = D(1 + a₀)/2, θ = π(1 + a₁).
Move squash_move(double a_mu, double a_theta, double max_step_m);

/// Received power of every beam at every receiver over the noise power, log1p-compressed.
/// Phase-invariant summary of a beamforming action used as critic input.
std::vector<double> beam_action_features(const ChannelSet& channels, const BeamformingSolution& sol,
                                         const SystemConstants& constants);
std::size_t beam_action_dim(const SystemConstants& constants) noexcept;

// ---- replay ------------------------------------------------------------------

struct Transition {
    std::vector<double> state;
    std::vector<double> action;
    double reward = 0.0;
    std::vector<double> next_state;
    bool done = false;
};

class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);
    void push(Transition t);
    /// Uniform without replacement within a call. Throws BufferUnderfull.
    [[nodiscard]] std::vector<const Transition*> sample(std::size_t n, std::mt19937_64& rng) const;
    [[nodiscard]] std::size_t size() const noexcept { return items_.size(); }
    [[nodiscard]] std::size_t capacity() const noexcept { return capacity_; }
    [[nodiscard]] const Transition& at(std::size_t i) const { return items_.at(i); }

private:
    std::size_t capacity_;
    std::size_t cursor_ = 0;
    std::vector<Transition> items_;
};

// ---- DDPG --------------------------------------------------------------------

struct DdpgConfig {
    double gamma = 0.95;
    double tau = 0.005;
    std::size_t batch = 128;
    std::size_t capacity = 50'000;
    double actor_lr = 1e-3;
    double critic_lr = 1e-3;
    double noise_start = 0.2;
    double noise_end = 0.02;
    std::size_t hnet_actor_samples = 32;  // batch entries used for the HNet parameter gradient
    std::size_t hidden = 64;
};

/// Linear decay from noise_start to noise_end over the first half of training, then flat.
double exploration_sigma(const DdpgConfig& cfg, std::size_t episode, std::size_t episodes);

struct UpdateStats {
    double critic_loss = 0.0;
    double actor_objective = 0.0;
};

/// Dense critic on concatenated (state, action) with a target copy.
class DenseCritic {
public:
    DenseCritic(std::size_t state_dim, std::size_t action_dim, std::size_t hidden, std::uint64_t seed);
    [[nodiscard]] double value(const std::vector<double>& s, const std::vector<double>& a, bool target = false) const;
    /// Squared TD error step toward y; returns the batch loss.
    double fit(const std::vector<const Transition*>& batch, const std::vector<double>& targets, const nn::AdamConfig& cfg);
    /// ∂Q/∂a of the online network at each (s, a) pair.
    std::vector<std::vector<double>> action_gradients(const std::vector<std::vector<double>>& s,
                                                      const std::vector<std::vector<double>>& a);
    void soft_update(double tau);
    [[nodiscard]] nn::Network& online() noexcept { return net_; }
    [[nodiscard]] const nn::Network& online() const noexcept { return net_; }
    [[nodiscard]] const nn::Network& target() const noexcept { return target_; }

private:
    std::size_t state_dim_, action_dim_;
    nn::Network net_, target_;
    nn::AdamState adam_;
};

/// Beamforming agent: HNet with learnable β, α as the actor.
class HNetAgent {
public:
    HNetAgent(const SystemConstants& constants, std::size_t num_blocks, const DdpgConfig& cfg, std::uint64_t seed,
              std::shared_ptr<const EigenSolver> learned = nullptr);

    /// HNet output on `channels`; with sigma > 0 the α's are perturbed by N(0, σ²).
    [[nodiscard]] BeamformingSolution act(const ChannelSet& channels, double sigma, std::mt19937_64& rng) const;
    UpdateStats update(const ReplayBuffer& buffer, const Scenario& layout, std::mt19937_64& rng);

    [[nodiscard]] const HNetParams& params() const noexcept { return params_; }
    HNetParams& params() noexcept { return params_; }
    [[nodiscard]] DenseCritic& critic() noexcept { return critic_; }
    [[nodiscard]] const DenseCritic& critic() const noexcept { return critic_; }

private:
    SystemConstants constants_;
    DdpgConfig cfg_;
    HNetParams params_, target_params_;
    DenseCritic critic_;
    nn::AdamState actor_adam_;
};

/// Trajectory agent: CNN actor and CNN-trunk critic with the action joined at the dense head.
class TrajectoryAgent {
public:
    TrajectoryAgent(const SystemConstants& constants, std::size_t raster, const DdpgConfig& cfg, std::uint64_t seed);

    /// Squashed actions in [−1, 1]^{2U} for a compact observation, noise added before clipping.
    [[nodiscard]] std::vector<double> act(const std::vector<double>& obs, double sigma, std::mt19937_64& rng) const;
    UpdateStats update(const ReplayBuffer& buffer, std::mt19937_64& rng);

    [[nodiscard]] const nn::Network& actor() const noexcept { return actor_; }
    nn::Network& actor() noexcept { return actor_; }
    [[nodiscard]] const nn::Network& critic_trunk() const noexcept { return trunk_; }
    [[nodiscard]] const nn::Network& critic_head() const noexcept { return head_; }
    [[nodiscard]] double q_value(const std::vector<double>& obs, const std::vector<double>& action) const;
    /// Loads the actor from a checkpoint network of the same architecture.
    void set_actor(const nn::Network& actor);

private:
    SystemConstants constants_;
    std::size_t raster_;
    DdpgConfig cfg_;
    nn::Network actor_, actor_target_, trunk_, trunk_target_, head_, head_target_;
    nn::AdamState actor_adam_, trunk_adam_, head_adam_;
};

nn::Network make_trajectory_actor(std::size_t num_uavs, std::size_t raster, std::uint64_t seed);

/// Baseline: one dense actor-critic emitting beam directions, the power split and the moves.
class SingleAgent {
public:
    SingleAgent(const SystemConstants& constants, std::size_t state_dim, const DdpgConfig& cfg, std::uint64_t seed);

    /// Raw action in [−1, 1]^n.
    [[nodiscard]] std::vector<double> act(const std::vector<double>& state, double sigma, std::mt19937_64& rng) const;
    /// Beams (power-projected, common-secrecy guarded, allocated) and moves from a raw action.
    [[nodiscard]] BeamformingSolution decode_beams(const std::vector<double>& action, const ChannelSet& channels) const;
    [[nodiscard]] std::vector<Move> decode_moves(const std::vector<double>& action) const;
    UpdateStats update(const ReplayBuffer& buffer, std::mt19937_64& rng);

    [[nodiscard]] std::size_t action_dim() const noexcept { return action_dim_; }
    [[nodiscard]] const nn::Network& actor() const noexcept { return actor_; }
    nn::Network& actor() noexcept { return actor_; }
    [[nodiscard]] const DenseCritic& critic() const noexcept { return critic_; }

private:
    SystemConstants constants_;
    DdpgConfig cfg_;
    std::size_t state_dim_, action_dim_;
    nn::Network actor_, actor_target_;
    DenseCritic critic_;
    nn::AdamState actor_adam_;
};

/// State of the single agent: beam state followed by normalized UAV and terminal
/// coordinates and the remaining-time fraction.
std::vector<double> single_state(const Env& env);

/// Critic target r + γ(1 − done)·q_next.
double td_target(double reward, bool done, double gamma, double q_next) noexcept;

// ---- training ---------------------------------------------------------------

enum class Method { DunDrl, SingleDrl, Oracle };
std::string to_string(Method m);
Method method_from_string(const std::string& name);

struct EpisodeLog {
    std::size_t episode = 0;
    std::size_t step_count = 0;
    double mean_reward = 0.0;
    double total_secrecy = 0.0;  // mean per step
    Violations violations;       // summed over the episode
};

struct TrainConfig {
    EnvConfig env;
    DdpgConfig ddpg;
    Method method = Method::DunDrl;
    std::size_t episodes = 200;
    std::size_t hnet_blocks = 6;
    EigMode eig_mode = EigMode::Exact;
    std::size_t enn_steps = 8000;
    std::size_t checkpoint_every = 0;  // 0: only the initial and final checkpoints
    std::string checkpoint_dir;        // empty: no files
    std::uint64_t seed = 1;
};

struct TrainResult {
    std::vector<EpisodeLog> log;
    nn::Checkpoint checkpoint;  // final state
};

/// Episodes of interaction with per-step DDPG updates of the agents owned by the method.
TrainResult train(const TrainConfig& cfg);

/// Runs the policy stored in a checkpoint without exploration noise.
struct EvalStep {
    std::size_t episode = 0;
    std::size_t slot = 0;
    double reward = 0.0;
    RateReport rates;
    Violations violations;
};

std::vector<EvalStep> evaluate(const TrainConfig& cfg, const nn::Checkpoint& ckpt, std::size_t episodes,
                               std::uint64_t eval_seed);

/// Receding-horizon trajectory search with the better of HNet and random search per slot.
struct OraclePolicyConfig {
    std::size_t lookahead = 2;
    std::size_t beam_samples = 2000;
};

std::vector<EvalStep> evaluate_oracle(const TrainConfig& cfg, const OraclePolicyConfig& oracle, std::size_t episodes,
                                      std::uint64_t eval_seed);

} // namespace uavsec

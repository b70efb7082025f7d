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
#include "uavsec/oracle.hpp"

#include "uavsec/error.hpp"
#include "uavsec/hnet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace uavsec {

namespace {

void random_direction(ComplexMatrix& w, std::mt19937_64& rng) {
    std::normal_distribution<double> n01(0.0, 1.0);
    double norm = 0.0;
    do {
        for (auto& z : w.entries()) z = cplx(n01(rng), n01(rng));
        norm = fro_norm(w);
    } while (norm == 0.0);
    w *= cplx(1.0 / norm);
}

} // namespace

BeamOracleResult brute_force_beamform(const ChannelSet& ch, const SystemConstants& c, std::size_t n_samples,
                                      std::uint64_t seed, std::size_t alpha_points) {
    if (n_samples == 0) throw Error(ErrorCode::InvalidArgument, "oracle: n_samples must be positive");
    if (alpha_points < 2) throw Error(ErrorCode::InvalidArgument, "oracle: need at least two power splits");
    const std::size_t U = c.num_uavs, K = c.num_users;

    BeamformingSolution dir = BeamformingSolution::zeros(c);
    check_shapes(ch, dir, c);
    std::vector<double> alphas(alpha_points);
    for (std::size_t a = 0; a < alpha_points; ++a) alphas[a] = static_cast<double>(a) / static_cast<double>(alpha_points - 1);

    BeamOracleResult best;
    best.seed = seed;
    best.best_value = -1.0;
    const std::vector<double> zero_alloc(K, 0.0);
    LinkGains scaled;
    std::mt19937_64 rng;
    for (std::size_t s = 0; s < n_samples; ++s) {
        if (s % kOracleChunk == 0) rng.seed(mix_seed(seed, s / kOracleChunk));
        for (auto& w : dir.common) random_direction(w, rng);
        for (auto& w : dir.priv) random_direction(w, rng);
        const LinkGains unit = link_gains(ch, dir, c);
        for (double alpha : alphas) {
            // Gains are quadratic in the beams, so the power split is a per-beam scale.
            scaled = unit;
            std::vector<double> common_scale(U, 0.0), private_scale(K, 0.0);
            for (std::size_t u = 0; u < U; ++u) {
                const auto& served = ch.served_users[u];
                if (served.empty()) continue;
                common_scale[u] = alpha * c.power_w;
                for (std::size_t k : served) private_scale[k] = (1.0 - alpha) * c.power_w / static_cast<double>(served.size());
                scaled.tx_power[u] = c.power_w;
            }
            for (std::size_t u = 0; u < U; ++u) {
                for (std::size_t k = 0; k < K; ++k) scaled.common_user[u * K + k] *= common_scale[u];
                for (std::size_t i = 0; i < c.num_eaves; ++i) scaled.common_eave[u * c.num_eaves + i] *= common_scale[u];
            }
            for (std::size_t j = 0; j < K; ++j) {
                for (std::size_t k = 0; k < K; ++k) scaled.private_user[j * K + k] *= private_scale[j];
                for (std::size_t i = 0; i < c.num_eaves; ++i) scaled.private_eave[j * c.num_eaves + i] *= private_scale[j];
            }
            const RateReport r = rates_from_gains(scaled, ch.serving_uav, zero_alloc, c);
            bool secret = true;
            for (std::size_t u = 0; u < U; ++u)
                if (alpha > 0.0 && !ch.served_users[u].empty() && r.common_rate[u] < r.eave_common_rate[u]) secret = false;
            if (!secret) continue;
            double value = r.total_secrecy;
            const std::vector<double> alloc = allocate_common(r, ch.served_users);
            for (double a : alloc) value += a;
            if (value > best.best_value) {
                best.best_value = value;
                best.best_alpha = alpha;
                best.best_solution = dir;
                best.best_solution.alloc = alloc;
            }
        }
        ++best.samples_evaluated;
    }
    if (best.best_value < 0.0) {
        // Every candidate with α > 0 leaked the common message and α = 0 was not on the grid.
        throw Error(ErrorCode::InvalidArgument, "oracle: no admissible candidate");
    }
    project_power(best.best_solution, ch.served_users, c.power_w, best.best_alpha);
    // Reallocate on the projected beams so rounding leaves no secrecy-budget residual.
    best.best_solution.alloc = allocate_common(compute_rates(ch, best.best_solution, c), ch.served_users);
    const RateReport final_report = compute_rates(ch, best.best_solution, c);
    for (std::size_t k = 0; k < K; ++k) {
        best.best_solution.zeta[k] = final_report.sinr_private[k];
        best.best_solution.ups_c[k] = final_report.sinr_common[k];
        for (std::size_t i = 0; i < c.num_eaves; ++i)
            best.best_solution.zeta_eave[k * c.num_eaves + i] = final_report.sinr_eave[k * c.num_eaves + i];
    }
    for (std::size_t n = 0; n < U * c.num_eaves; ++n) best.best_solution.ups_ci[n] = final_report.sinr_eave_common[n];
    return best;
}

std::vector<Move> trajectory_moves(double max_step_m, double grid_step_m) {
    if (!(max_step_m > 0.0)) throw Error(ErrorCode::InvalidArgument, "trajectory moves: max step must be positive");
    const double step = grid_step_m > 0.0 ? grid_step_m : max_step_m / 2.0;
    std::vector<Move> moves{{0.0, 0.0}};
    const auto levels = static_cast<std::size_t>(std::floor(max_step_m / step * (1.0 + 1e-12)));
    for (std::size_t l = 1; l <= levels; ++l)
        for (int h = 0; h < 8; ++h)
            moves.push_back({std::min(max_step_m, static_cast<double>(l) * step), h * std::numbers::pi / 4.0});
    return moves;
}

namespace {

struct Search {
    Search(const TrajectorySearch& c, const SlotValue& v, std::vector<Move> m) : cfg(c), value(v), moves(std::move(m)) {}

    const TrajectorySearch& cfg;
    const SlotValue& value;
    std::vector<Move> moves;
    std::size_t joint = 0;  // moves^U
    std::size_t to_terminal = 0;
    double step = 0.0;

    Scenario scen;
    std::vector<std::vector<Move>> path_moves;
    std::vector<std::vector<Vec3>> path_pos;
    TrajectoryOracleResult best;
    bool found = false;

    bool reachable(std::size_t depth) const {
        const std::size_t left = to_terminal - depth;
        for (std::size_t u = 0; u < scen.uav_pos.size(); ++u) {
            const double gap = distance(scen.uav_pos[u], scen.terminal[u]);
            if (gap - step > static_cast<double>(left) * step + 1e-9) return false;
        }
        return true;
    }

    void descend(std::size_t depth, double acc) {
        if (depth == cfg.horizon) {
            if (!found || acc > best.best_value) {
                found = true;
                best.best_value = acc;
                best.moves = path_moves;
                best.positions = path_pos;
            }
            return;
        }
        const std::size_t U = scen.uav_pos.size();
        const std::vector<Vec3> here = scen.uav_pos;
        for (std::size_t code = 0; code < joint; ++code) {
            std::size_t rest = code;
            for (std::size_t u = 0; u < U; ++u) {
                const Move& m = moves[rest % moves.size()];
                rest /= moves.size();
                path_moves[depth][u] = m;
                scen.uav_pos[u] = here[u];
                scen.uav_pos[u] = step_uav(scen, u, m).position;
            }
            if (!reachable(depth + 1)) continue;
            path_pos[depth] = scen.uav_pos;
            const double v = value(scen, cfg.first_slot + depth);
            ++best.evaluations;
            descend(depth + 1, acc + v);
        }
        scen.uav_pos = here;
    }
};

} // namespace

TrajectoryOracleResult exhaustive_trajectory(const Scenario& scenario, const TrajectorySearch& cfg, const SlotValue& value) {
    if (cfg.horizon == 0) throw Error(ErrorCode::InvalidArgument, "trajectory oracle: horizon must be positive");
    const std::size_t to_terminal = cfg.moves_to_terminal == 0 ? cfg.horizon : cfg.moves_to_terminal;
    if (to_terminal < cfg.horizon)
        throw Error(ErrorCode::InvalidArgument, "trajectory oracle: terminal deadline before the end of the search");
    const double step = scenario.constants.max_step_m();
    Search s(cfg, value, trajectory_moves(step, cfg.grid_step_m));
    const double joint = std::pow(static_cast<double>(s.moves.size()), static_cast<double>(scenario.uav_pos.size()));
    const double paths = std::pow(joint, static_cast<double>(cfg.horizon));
    if (!(paths <= cfg.max_paths))
        throw Error(ErrorCode::SearchSpaceTooLarge, "trajectory oracle: " + std::to_string(paths) + " paths exceed the cap of " +
                                                        std::to_string(cfg.max_paths));
    s.joint = static_cast<std::size_t>(joint);
    s.to_terminal = to_terminal;
    s.step = step;
    s.scen = scenario;
    s.path_moves.assign(cfg.horizon, std::vector<Move>(scenario.uav_pos.size()));
    s.path_pos.assign(cfg.horizon, {});
    s.descend(0, 0.0);
    if (!s.found) throw Error(ErrorCode::NoFeasiblePath, "trajectory oracle: terminal region unreachable within the horizon");
    return s.best;
}

} // namespace uavsec

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

#include "uavsec/rates.hpp"
#include "uavsec/scenario.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace uavsec {

struct BeamOracleResult {
    double best_value = 0.0;  // total secrecy, bits/s/Hz
    BeamformingSolution best_solution;
    double best_alpha = 0.0;
    std::size_t samples_evaluated = 0;  // direction draws; each is tried at every α on the grid
    std::uint64_t seed = 0;
};

inline constexpr std::size_t kOracleChunk = 4096;

/// Random search over unit-norm beam directions (uniform on the complex sphere, one
/// draw per common and private beam) and the power splits α ∈ {0, 1/(n-1), …, 1},
/// shared by all UAVs. Candidates whose common beam cannot be kept secret
/// (R_c < R_c,i with α > 0) are skipped. Draws come in chunks of kOracleChunk with
/// independent streams, so a larger `n_samples` with the same seed extends the set.
BeamOracleResult brute_force_beamform(const ChannelSet& channels, const SystemConstants& constants,
                                      std::size_t n_samples, std::uint64_t seed, std::size_t alpha_points = 11);

struct TrajectorySearch {
    double grid_step_m = 0.0;  // move lengths are multiples of this up to D; 0 means D/2
    std::size_t horizon = 1;   // moves searched
    std::size_t first_slot = 1;  // slot index of the positions reached by the first move
    /// Moves left until the terminal constraint is checked; 0 means the end of the search.
    std::size_t moves_to_terminal = 0;
    double max_paths = 1e7;
};

struct TrajectoryOracleResult {
    double best_value = 0.0;
    std::vector<std::vector<Move>> moves;      // [step][uav]
    std::vector<std::vector<Vec3>> positions;  // [step][uav], after each move
    std::size_t evaluations = 0;               // callback invocations
};

/// Value of the UAVs standing at `scenario.uav_pos` during `slot`.
using SlotValue = std::function<double(const Scenario& scenario, std::size_t slot)>;

/// Stay plus every multiple of the grid step up to D in 8 compass headings.
std::vector<Move> trajectory_moves(double max_step_m, double grid_step_m);

/// Depth-first enumeration of joint per-UAV moves from the current positions. Paths
/// that can no longer reach the terminal region in time are pruned; the value of a
/// path is the sum of `value` over the positions it visits. Ties keep the first path
/// in enumeration order. Throws SearchSpaceTooLarge and NoFeasiblePath.
TrajectoryOracleResult exhaustive_trajectory(const Scenario& scenario, const TrajectorySearch& search,
                                             const SlotValue& value);

} // namespace uavsec

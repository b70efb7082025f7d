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

#include "uavsec/numkernel.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace uavsec {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Vec2&, const Vec2&) = default;
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    friend bool operator==(const Vec3&, const Vec3&) = default;
};

double distance(const Vec3& a, const Vec3& b) noexcept;
double planar_distance(const Vec3& a, const Vec2& b) noexcept;

double dbm_to_watts(double dbm) noexcept;
double db_to_linear(double db) noexcept;

inline constexpr double kSpeedOfLight = 299'792'458.0;

/// Radio and mobility constants, all in SI units (watts, Hz, metres, seconds).
struct SystemConstants {
    std::size_t num_uavs = 2;
    std::size_t num_users = 8;  // total legitimate users across all UAVs
    std::size_t num_eaves = 2;
    std::size_t tx_antennas = 4;
    std::size_t rx_antennas = 2;
    std::size_t streams = 2;
    double power_w = dbm_to_watts(3.0);
    double noise_user_w = dbm_to_watts(-80.0);
    double noise_eave_w = dbm_to_watts(-80.0);
    double pathloss_exponent = 3.5;
    double carrier_freq_hz = 28e9;
    double antenna_spacing = 0.5;  // wavelengths
    double rician_k = db_to_linear(10.0);  // may be +inf for pure line of sight
    double slot_s = 0.1;
    std::size_t horizon = 10;  // slots per episode
    double max_speed_mps = 20.0;

    [[nodiscard]] double max_step_m() const noexcept { return max_speed_mps * slot_s; }
    [[nodiscard]] double wavelength_m() const noexcept { return kSpeedOfLight / carrier_freq_hz; }
    /// Free-space gain at 1 m.
    [[nodiscard]] double reference_gain() const noexcept;

    /// Throws InvalidConfig on inconsistent counts or nonpositive powers.
    void validate() const;
};

enum class PlacementMode {
    Balanced,  // uniform in the area, but each UAV's nearest-user region receives K/U users
    Uniform,   // uniform in the area
    Explicit,  // coordinates given
};

struct PlacementSpec {
    PlacementMode mode = PlacementMode::Balanced;
    double area_x_m = 500.0;
    double area_y_m = 500.0;
    std::vector<Vec2> users;  // Explicit only
    std::vector<Vec2> eaves;  // Explicit only
};

struct Scenario {
    SystemConstants constants;
    PlacementSpec placement;
    std::vector<Vec2> users;
    std::vector<Vec2> eaves;
    std::vector<Vec3> uav_pos;
    std::vector<Vec3> start;
    std::vector<Vec3> terminal;
    std::vector<std::size_t> serving_uav;               // per user
    std::vector<std::vector<std::size_t>> served_users;  // per UAV, ascending user index
    std::uint64_t seed = 0;

    friend bool operator==(const Scenario& a, const Scenario& b) {
        return a.users == b.users && a.eaves == b.eaves && a.uav_pos == b.uav_pos && a.start == b.start &&
               a.terminal == b.terminal && a.serving_uav == b.serving_uav && a.seed == b.seed;
    }
};

/// Places users/eavesdroppers, puts UAVs at their start points and associates every
/// user with its nearest UAV (ties to the lower index).
Scenario init_scenario(const SystemConstants& constants, const PlacementSpec& placement, std::vector<Vec3> start,
                       std::vector<Vec3> terminal, std::uint64_t seed);

/// Channel matrices H (N × M) such that the received block is H·w for an M × d beamformer.
struct ChannelSet {
    std::size_t num_uavs = 0;
    std::size_t num_users = 0;
    std::size_t num_eaves = 0;
    std::vector<ComplexMatrix> user;  // index u * num_users + k
    std::vector<ComplexMatrix> eave;  // index u * num_eaves + i
    std::vector<std::size_t> serving_uav;
    std::vector<std::vector<std::size_t>> served_users;

    [[nodiscard]] const ComplexMatrix& to_user(std::size_t u, std::size_t k) const { return user[u * num_users + k]; }
    [[nodiscard]] const ComplexMatrix& to_eave(std::size_t u, std::size_t i) const { return eave[u * num_eaves + i]; }
    ComplexMatrix& to_user(std::size_t u, std::size_t k) { return user[u * num_users + k]; }
    ComplexMatrix& to_eave(std::size_t u, std::size_t i) { return eave[u * num_eaves + i]; }
};

/// Uniform-linear-array response exp(j·2π·s·n·cos φ), n = 0..count-1.
ComplexMatrix steering_vector(std::size_t count, double spacing_wavelengths, double direction_cosine);

/// Rician channel between a UAV at `tx` and a ground receiver at `rx`.
///
/// The transmit array lies along x and the receive array along y; the scatter part
/// draws i.i.d. CN(0,1) entries from `scatter_seed`.
ComplexMatrix rician_channel(const SystemConstants& constants, const Vec3& tx, const Vec3& rx,
                             std::uint64_t scatter_seed);

/// Channels for every (UAV, receiver) pair at slot t. Scatter is keyed by
/// (seed, t, link) only, so moving a UAV changes the geometry but not the fading draw.
ChannelSet gen_channels(const Scenario& scenario, std::size_t slot, std::uint64_t seed);

struct Move {
    double distance_m = 0.0;
    double heading_rad = 0.0;
};

struct StepResult {
    Vec3 position;
    bool step_violation = false;
    double excess_m = 0.0;  // requested distance beyond the per-slot cap, before clipping
};

/// Candidate position after a planar move; distances beyond D are clipped and flagged.
StepResult step_uav(const Scenario& scenario, std::size_t u, const Move& move);

/// Σ_u max(0, ‖q_u − q_F,u‖ − D) at the current UAV positions.
double terminal_violation(const Scenario& scenario);

/// Splitmix64-based seed mixing used for all derived random streams.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept;

} // namespace uavsec

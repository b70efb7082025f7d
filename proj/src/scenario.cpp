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
#include "uavsec/scenario.hpp"

#include "uavsec/error.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace uavsec {

double distance(const Vec3& a, const Vec3& b) noexcept { return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z); }

double planar_distance(const Vec3& a, const Vec2& b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

double dbm_to_watts(double dbm) noexcept { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double db_to_linear(double db) noexcept { return std::pow(10.0, db / 10.0); }

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double SystemConstants::reference_gain() const noexcept {
    const double ratio = wavelength_m() / (4.0 * std::numbers::pi);
    return ratio * ratio;
}

void SystemConstants::validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
    if (num_uavs < 1) fail("num_uavs must be >= 1");
    if (num_users < 1) fail("num_users must be >= 1");
    if (tx_antennas < 1 || rx_antennas < 1) fail("antenna counts must be >= 1");
    if (streams < 1) fail("streams must be >= 1");
    if (streams > std::min(tx_antennas, rx_antennas)) fail("streams must not exceed min(tx_antennas, rx_antennas)");
    if (!(power_w > 0.0) || !std::isfinite(power_w)) fail("power must be positive");
    if (!(noise_user_w > 0.0) || !(noise_eave_w > 0.0)) fail("noise powers must be positive");
    if (!(carrier_freq_hz > 0.0)) fail("carrier frequency must be positive");
    if (!(antenna_spacing > 0.0)) fail("antenna spacing must be positive");
    if (!(rician_k >= 0.0)) fail("rician factor must be nonnegative");
    if (!(slot_s > 0.0)) fail("slot length must be positive");
    if (horizon < 1) fail("horizon must be >= 1 slot");
    if (!(max_speed_mps >= 0.0)) fail("max speed must be nonnegative");
}

namespace {

std::size_t nearest_uav(const std::vector<Vec3>& uavs, const Vec2& p) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t u = 0; u < uavs.size(); ++u) {
        const double dist = planar_distance(uavs[u], p);
        if (dist < best_d) {  // strict: ties keep the lower index
            best_d = dist;
            best = u;
        }
    }
    return best;
}

} // namespace

Scenario init_scenario(const SystemConstants& constants, const PlacementSpec& placement, std::vector<Vec3> start,
                       std::vector<Vec3> terminal, std::uint64_t seed) {
    constants.validate();
    if (start.size() != constants.num_uavs || terminal.size() != constants.num_uavs) {
        throw Error(ErrorCode::InvalidConfig, "need one start and one terminal point per UAV");
    }
    for (const auto& q : start)
        if (!(q.z > 0.0)) throw Error(ErrorCode::InvalidConfig, "UAV altitude must be positive");

    Scenario s;
    s.constants = constants;
    s.placement = placement;
    s.seed = seed;
    s.start = start;
    s.terminal = std::move(terminal);
    s.uav_pos = std::move(start);

    std::mt19937_64 rng(mix_seed(seed, 0x51ace));
    if (placement.mode == PlacementMode::Explicit) {
        if (placement.users.size() != constants.num_users || placement.eaves.size() != constants.num_eaves) {
            throw Error(ErrorCode::InvalidConfig, "explicit placement counts do not match num_users/num_eaves");
        }
        s.users = placement.users;
        s.eaves = placement.eaves;
    } else {
        if (!(placement.area_x_m > 0.0) || !(placement.area_y_m > 0.0)) {
            throw Error(ErrorCode::InvalidConfig, "placement area must be positive");
        }
        std::uniform_real_distribution<double> ux(0.0, placement.area_x_m);
        std::uniform_real_distribution<double> uy(0.0, placement.area_y_m);
        if (placement.mode == PlacementMode::Uniform) {
            for (std::size_t k = 0; k < constants.num_users; ++k) s.users.push_back({ux(rng), uy(rng)});
        } else {
            std::vector<std::size_t> quota(constants.num_uavs, constants.num_users / constants.num_uavs);
            for (std::size_t u = 0; u < constants.num_users % constants.num_uavs; ++u) ++quota[u];
            std::size_t attempts = 0;
            while (s.users.size() < constants.num_users) {
                if (++attempts > 1'000'000) {
                    throw Error(ErrorCode::InvalidConfig, "balanced placement: a UAV's region misses the area");
                }
                const Vec2 p{ux(rng), uy(rng)};
                const std::size_t u = nearest_uav(s.uav_pos, p);
                if (quota[u] == 0) continue;
                --quota[u];
                s.users.push_back(p);
            }
        }
        for (std::size_t i = 0; i < constants.num_eaves; ++i) s.eaves.push_back({ux(rng), uy(rng)});
    }

    s.served_users.assign(constants.num_uavs, {});
    for (std::size_t k = 0; k < s.users.size(); ++k) {
        const std::size_t u = nearest_uav(s.uav_pos, s.users[k]);
        s.serving_uav.push_back(u);
        s.served_users[u].push_back(k);
    }
    return s;
}

ComplexMatrix steering_vector(std::size_t count, double spacing_wavelengths, double direction_cosine) {
    ComplexMatrix a(count, 1);
    for (std::size_t n = 0; n < count; ++n) {
        const double phase = 2.0 * std::numbers::pi * spacing_wavelengths * static_cast<double>(n) * direction_cosine;
        a(n, 0) = std::polar(1.0, phase);
    }
    return a;
}

ComplexMatrix rician_channel(const SystemConstants& c, const Vec3& tx, const Vec3& rx, std::uint64_t scatter_seed) {
    if (!std::isfinite(tx.x) || !std::isfinite(tx.y) || !std::isfinite(tx.z) || !std::isfinite(rx.x) ||
        !std::isfinite(rx.y) || !std::isfinite(rx.z)) {
        throw Error(ErrorCode::DegenerateGeometry, "non-finite position");
    }
    const double dist = distance(tx, rx);
    if (dist < 1.0) throw Error(ErrorCode::DegenerateGeometry, "link distance below 1 m");

    const double amplitude = std::sqrt(c.reference_gain() * std::pow(dist, -c.pathloss_exponent));
    const bool pure_los = std::isinf(c.rician_k);
    const double los_w = pure_los ? 1.0 : std::sqrt(c.rician_k / (1.0 + c.rician_k));
    const double nlos_w = pure_los ? 0.0 : std::sqrt(1.0 / (1.0 + c.rician_k));

    const double cos_tx = (rx.x - tx.x) / dist;
    const double cos_rx = (tx.y - rx.y) / dist;
    const ComplexMatrix a_tx = steering_vector(c.tx_antennas, c.antenna_spacing, cos_tx);
    const ComplexMatrix a_rx = steering_vector(c.rx_antennas, c.antenna_spacing, cos_rx);
    ComplexMatrix h = mul_adjoint(a_rx, a_tx) * cplx(los_w);

    if (nlos_w > 0.0) {
        std::mt19937_64 rng(scatter_seed);
        std::normal_distribution<double> n01(0.0, 1.0);
        const double s = nlos_w / std::sqrt(2.0);
        for (auto& z : h.entries()) {
            const double re = n01(rng);
            const double im = n01(rng);
            z += cplx(s * re, s * im);
        }
    }
    h *= cplx(amplitude);
    return h;
}

ChannelSet gen_channels(const Scenario& s, std::size_t slot, std::uint64_t seed) {
    const auto& c = s.constants;
    ChannelSet ch;
    ch.num_uavs = c.num_uavs;
    ch.num_users = s.users.size();
    ch.num_eaves = s.eaves.size();
    ch.serving_uav = s.serving_uav;
    ch.served_users = s.served_users;
    ch.user.reserve(ch.num_uavs * ch.num_users);
    ch.eave.reserve(ch.num_uavs * ch.num_eaves);
    const std::uint64_t slot_seed = mix_seed(seed, slot);
    for (std::size_t u = 0; u < c.num_uavs; ++u) {
        for (std::size_t k = 0; k < ch.num_users; ++k) {
            const Vec3 rx{s.users[k].x, s.users[k].y, 0.0};
            ch.user.push_back(rician_channel(c, s.uav_pos[u], rx, mix_seed(slot_seed, (u << 20) | k)));
        }
    }
    for (std::size_t u = 0; u < c.num_uavs; ++u) {
        for (std::size_t i = 0; i < ch.num_eaves; ++i) {
            const Vec3 rx{s.eaves[i].x, s.eaves[i].y, 0.0};
            ch.eave.push_back(rician_channel(c, s.uav_pos[u], rx, mix_seed(slot_seed, (u << 20) | (1u << 19) | i)));
        }
    }
    return ch;
}

StepResult step_uav(const Scenario& s, std::size_t u, const Move& move) {
    if (u >= s.uav_pos.size()) throw Error(ErrorCode::InvalidArgument, "step_uav: UAV index out of range");
    if (!(move.distance_m >= 0.0) || !std::isfinite(move.heading_rad)) {
        throw Error(ErrorCode::InvalidArgument, "step_uav: distance must be nonnegative and heading finite");
    }
    const double cap = s.constants.max_step_m();
    StepResult r;
    double mu = move.distance_m;
    if (mu > cap) {
        r.step_violation = true;
        r.excess_m = mu - cap;
        mu = cap;
    }
    const Vec3& q = s.uav_pos[u];
    r.position = {q.x + mu * std::cos(move.heading_rad), q.y + mu * std::sin(move.heading_rad), q.z};
    return r;
}

double terminal_violation(const Scenario& s) {
    const double cap = s.constants.max_step_m();
    double total = 0.0;
    for (std::size_t u = 0; u < s.uav_pos.size(); ++u) total += std::max(0.0, distance(s.uav_pos[u], s.terminal[u]) - cap);
    return total;
}

} // namespace uavsec

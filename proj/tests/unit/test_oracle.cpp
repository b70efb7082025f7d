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
#include "support.hpp"
#include "uavsec/error.hpp"
#include "uavsec/hnet.hpp"
#include "uavsec/oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace uavsec;
using uavsec::testing::gaussian_matrix;

namespace {

SystemConstants tiny() {
    SystemConstants c;
    c.num_uavs = 1;
    c.num_users = 1;
    c.num_eaves = 1;
    c.tx_antennas = 2;
    c.rx_antennas = 1;
    c.streams = 1;
    c.power_w = 1.0;
    c.noise_user_w = 0.1;
    c.noise_eave_w = 0.1;
    return c;
}

ChannelSet random_channels(const SystemConstants& c, std::mt19937_64& rng, double eave_scale = 0.5) {
    ChannelSet ch;
    ch.num_uavs = c.num_uavs;
    ch.num_users = c.num_users;
    ch.num_eaves = c.num_eaves;
    ch.served_users.assign(c.num_uavs, {});
    for (std::size_t k = 0; k < c.num_users; ++k) {
        ch.serving_uav.push_back(k % c.num_uavs);
        ch.served_users[k % c.num_uavs].push_back(k);
    }
    for (std::size_t n = 0; n < c.num_uavs * c.num_users; ++n)
        ch.user.push_back(gaussian_matrix(c.rx_antennas, c.tx_antennas, rng));
    for (std::size_t n = 0; n < c.num_uavs * c.num_eaves; ++n)
        ch.eave.push_back(gaussian_matrix(c.rx_antennas, c.tx_antennas, rng) * cplx(eave_scale));
    return ch;
}

// Best value over the α grid for fixed directions, through the public rate path.
double evaluate_directions(const ChannelSet& ch, BeamformingSolution sol, const SystemConstants& c) {
    double best = -1.0;
    for (int a = 0; a <= 10; ++a) {
        BeamformingSolution s = sol;
        project_power(s, ch.served_users, c.power_w, a / 10.0);
        const RateReport r0 = compute_rates(ch, s, c);
        if (a > 0 && r0.common_rate[0] < r0.eave_common_rate[0]) continue;
        s.alloc = allocate_common(r0, ch.served_users);
        best = std::max(best, compute_rates(ch, s, c).total_secrecy);
    }
    return best;
}

Scenario hover_scenario(Vec2 user, Vec3 start, Vec3 terminal, bool with_eave = true) {
    SystemConstants c = tiny();
    if (!with_eave) c.num_eaves = 0;
    c.rician_k = std::numeric_limits<double>::infinity();
    c.noise_user_w = dbm_to_watts(-80.0);
    c.noise_eave_w = dbm_to_watts(-80.0);
    PlacementSpec p;
    p.mode = PlacementMode::Explicit;
    p.users = {user};
    if (with_eave) p.eaves = {{300.0, 300.0}};
    return init_scenario(c, p, {start}, {terminal}, 1);
}

double hnet_value(const Scenario& s, std::size_t slot) {
    const ChannelSet ch = gen_channels(s, slot, s.seed);
    return compute_rates(ch, hnet_forward(ch, HNetParams::defaults(6), s.constants), s.constants).total_secrecy;
}

} // namespace

TEST_CASE("oracle with one sample equals a direct evaluation of that sample") {
    const SystemConstants c = tiny();
    std::mt19937_64 rng(1);
    const ChannelSet ch = random_channels(c, rng);
    const BeamOracleResult r = brute_force_beamform(ch, c, 1, 77);
    CHECK(r.samples_evaluated == 1);
    CHECK(r.seed == 77);
    BeamformingSolution dirs = r.best_solution;
    dirs.common[0] = normalized(dirs.common[0]);
    dirs.priv[0] = normalized(dirs.priv[0]);
    CHECK(r.best_value == doctest::Approx(evaluate_directions(ch, dirs, c)).epsilon(1e-12));
}

TEST_CASE("oracle value matches re-evaluation of its solution") {
    SystemConstants c = tiny();
    c.num_users = 2;
    c.tx_antennas = 3;
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 5; ++trial) {
        const ChannelSet ch = random_channels(c, rng);
        const BeamOracleResult r = brute_force_beamform(ch, c, 2000, trial);
        const RateReport rep = compute_rates(ch, r.best_solution, c);
        CHECK(std::abs(rep.total_secrecy - r.best_value) <= 1e-12 * std::max(1.0, r.best_value));
        CHECK(rep.residuals.max() <= 1e-12);
    }
}

TEST_CASE("oracle approaches the matched-filter optimum without eavesdroppers") {
    SystemConstants c = tiny();
    c.num_eaves = 0;
    std::mt19937_64 rng(3);
    const ChannelSet ch = random_channels(c, rng);
    const double optimum = std::log2(1.0 + c.power_w * fro_norm_sq(ch.user[0]) / c.noise_user_w);
    const double coarse = brute_force_beamform(ch, c, 10, 5).best_value;
    const double fine = brute_force_beamform(ch, c, 20000, 5).best_value;
    CHECK(fine <= optimum + 1e-12);
    CHECK(fine >= coarse);
    CHECK(fine >= 0.99 * optimum);
}

TEST_CASE("oracle value is nondecreasing in the sample count for a fixed seed") {
    const SystemConstants c = tiny();
    std::mt19937_64 rng(4);
    const ChannelSet ch = random_channels(c, rng, 1.0);
    double prev = -1.0;
    for (std::size_t n : {1, 10, 100, 5000, 10000}) {
        const BeamOracleResult r = brute_force_beamform(ch, c, n, 9);
        CHECK(r.best_value >= prev);
        prev = r.best_value;
    }
    CHECK(brute_force_beamform(ch, c, 5000, 9).best_value == brute_force_beamform(ch, c, 5000, 9).best_value);
}

TEST_CASE("trajectory move set") {
    CHECK(trajectory_moves(2.0, 0.0).size() == 17);
    CHECK(trajectory_moves(3.0, 1.0).size() == 25);
    const auto m = trajectory_moves(2.0, 0.0);
    CHECK(m[0].distance_m == 0.0);
    CHECK(m.back().distance_m == 2.0);
}

// With an eavesdropper, moving along the array axis can separate the departure angles
// and raise secrecy, so the hover optimum only holds without one.
TEST_CASE("trajectory oracle, one step, no eavesdropper: hovering over the user is optimal") {
    const Scenario s = hover_scenario({50.0, 50.0}, {50.0, 50.0, 60.0}, {50.0, 50.0, 60.0}, false);
    TrajectorySearch search;
    search.horizon = 1;
    const TrajectoryOracleResult r = exhaustive_trajectory(s, search, hnet_value);
    CHECK(r.moves[0][0].distance_m == 0.0);
    CHECK(r.evaluations == 17);
    Scenario moved = s;
    moved.uav_pos[0].x += 2.0;
    CHECK(r.best_value > hnet_value(moved, 1));
}

TEST_CASE("trajectory oracle counts and maximizes over the enumerated set") {
    const Scenario s = hover_scenario({0.0, 0.0}, {0.0, 0.0, 60.0}, {0.0, 0.0, 60.0});
    TrajectorySearch search;
    search.horizon = 3;
    search.moves_to_terminal = 100;
    auto east = [](const Scenario& sc, std::size_t) { return sc.uav_pos[0].x; };
    const TrajectoryOracleResult r = exhaustive_trajectory(s, search, east);
    CHECK(r.evaluations == 17 + 17 * 17 + 17 * 17 * 17);
    const double D = s.constants.max_step_m();
    CHECK(r.best_value == doctest::Approx(D + 2 * D + 3 * D));
    for (const auto& step : r.moves) CHECK(step[0].distance_m == D);
    // Staying put is one of the enumerated policies.
    CHECK(r.best_value >= 0.0);
}

TEST_CASE("trajectory oracle honours the terminal region") {
    const Scenario s = hover_scenario({0.0, 0.0}, {0.0, 0.0, 60.0}, {0.0, 0.0, 60.0});
    const double D = s.constants.max_step_m();
    TrajectorySearch search;
    search.horizon = 2;
    auto east = [](const Scenario& sc, std::size_t) { return sc.uav_pos[0].x; };
    const TrajectoryOracleResult r = exhaustive_trajectory(s, search, east);
    CHECK(distance(r.positions.back()[0], s.terminal[0]) <= D + 1e-9);
    CHECK(r.best_value == doctest::Approx(D + D));

    const Scenario far = hover_scenario({0.0, 0.0}, {0.0, 0.0, 60.0}, {100.0, 0.0, 60.0});
    try {
        (void)exhaustive_trajectory(far, search, east);
        FAIL("expected NoFeasiblePath");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoFeasiblePath);
    }
}

TEST_CASE("trajectory oracle refuses oversized searches") {
    Scenario s = hover_scenario({0.0, 0.0}, {0.0, 0.0, 60.0}, {0.0, 0.0, 60.0});
    TrajectorySearch search;
    search.horizon = 6;
    try {
        (void)exhaustive_trajectory(s, search, [](const Scenario&, std::size_t) { return 0.0; });
        FAIL("expected SearchSpaceTooLarge");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SearchSpaceTooLarge);
    }
}

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
#include "uavsec/scenario.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace uavsec;

namespace {

Scenario default_layout(std::uint64_t seed) {
    SystemConstants c;
    PlacementSpec p;
    std::vector<Vec3> start{{125.0, 250.0, 100.0}, {375.0, 250.0, 100.0}};
    std::vector<Vec3> terminal{{143.0, 250.0, 100.0}, {393.0, 250.0, 100.0}};
    return init_scenario(c, p, start, terminal, seed);
}

Scenario single_link(double rician_k = std::numeric_limits<double>::infinity()) {
    SystemConstants c;
    c.num_uavs = 1;
    c.num_users = 1;
    c.num_eaves = 1;
    c.rician_k = rician_k;
    PlacementSpec p;
    p.mode = PlacementMode::Explicit;
    p.users = {{10.0, 20.0}};
    p.eaves = {{-30.0, 5.0}};
    return init_scenario(c, p, {{0.0, 0.0, 50.0}}, {{0.0, 0.0, 50.0}}, 1);
}

std::size_t numerical_rank(const ComplexMatrix& h) {
    const auto sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(uavsec::testing::to_eigen(h)).singularValues();
    std::size_t r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-10 * sv(0)) ++r;
    return r;
}

} // namespace

TEST_CASE("two UAVs, eight users: balanced and deterministic placement") {
    const Scenario a = default_layout(7);
    const Scenario b = default_layout(7);
    CHECK(a == b);
    REQUIRE(a.users.size() == 8);
    REQUIRE(a.eaves.size() == 2);
    CHECK(a.served_users[0].size() == 4);
    CHECK(a.served_users[1].size() == 4);
    for (const auto& l : a.users) {
        CHECK(l.x >= 0.0);
        CHECK(l.x <= 500.0);
        CHECK(l.y >= 0.0);
        CHECK(l.y <= 500.0);
    }
    CHECK(!(default_layout(8) == a));
}

TEST_CASE("every user is associated with its nearest UAV exactly once") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Scenario s = default_layout(seed);
        std::vector<int> seen(s.users.size(), 0);
        for (std::size_t u = 0; u < s.served_users.size(); ++u)
            for (std::size_t k : s.served_users[u]) {
                ++seen[k];
                CHECK(s.serving_uav[k] == u);
                for (std::size_t v = 0; v < s.uav_pos.size(); ++v)
                    CHECK(planar_distance(s.uav_pos[u], s.users[k]) <= planar_distance(s.uav_pos[v], s.users[k]));
            }
        for (int n : seen) CHECK(n == 1);
    }
}

TEST_CASE("explicit single-link placement associates the only user") {
    const Scenario s = single_link();
    REQUIRE(s.served_users.size() == 1);
    CHECK(s.served_users[0] == std::vector<std::size_t>{0});
    CHECK(s.serving_uav == std::vector<std::size_t>{0});
}

TEST_CASE("association ties go to the lower UAV index") {
    SystemConstants c;
    c.num_users = 1;
    c.num_eaves = 0;
    PlacementSpec p;
    p.mode = PlacementMode::Explicit;
    p.users = {{0.0, 0.0}};
    const Scenario s = init_scenario(c, p, {{-5.0, 0.0, 30.0}, {5.0, 0.0, 30.0}}, {{0, 0, 30}, {0, 0, 30}}, 3);
    CHECK(s.serving_uav[0] == 0);
}

TEST_CASE("invalid configurations are rejected") {
    auto code_of = [](auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::InvalidArgument;
    };
    SystemConstants c;
    c.streams = 3;
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
    c = SystemConstants{};
    c.power_w = 0.0;
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
    c = SystemConstants{};
    c.num_users = 0;
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);

    SystemConstants ok;
    CHECK(code_of([&] { (void)init_scenario(ok, {}, {{0, 0, 10}}, {{0, 0, 10}}, 0); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([&] {
              (void)init_scenario(ok, {}, {{0, 0, 0}, {1, 1, 0}}, {{0, 0, 0}, {1, 1, 0}}, 0);
          }) == ErrorCode::InvalidConfig);
    PlacementSpec bad;
    bad.mode = PlacementMode::Explicit;
    CHECK(code_of([&] {
              (void)init_scenario(ok, bad, {{0, 0, 10}, {1, 1, 10}}, {{0, 0, 10}, {1, 1, 10}}, 0);
          }) == ErrorCode::InvalidConfig);
}

TEST_CASE("steering vectors have unit-modulus entries") {
    for (double cosine : {-1.0, -0.3, 0.0, 0.7, 1.0}) {
        for (std::size_t n : {1u, 2u, 4u, 8u}) {
            const ComplexMatrix a = steering_vector(n, 0.5, cosine);
            CHECK((a.adjoint() * a)(0, 0).real() == doctest::Approx(static_cast<double>(n)).epsilon(1e-14));
        }
    }
    const ComplexMatrix broadside = steering_vector(3, 0.5, 0.0);
    for (std::size_t n = 0; n < 3; ++n) CHECK(std::abs(broadside(n, 0) - cplx(1.0)) < 1e-15);
}

TEST_CASE("pure line of sight gives a rank-one channel") {
    const Scenario s = single_link();
    const ChannelSet ch = gen_channels(s, 0, 9);
    CHECK(ch.to_user(0, 0).rows() == 2);
    CHECK(ch.to_user(0, 0).cols() == 4);
    CHECK(numerical_rank(ch.to_user(0, 0)) == 1);
    CHECK(numerical_rank(ch.to_eave(0, 0)) == 1);
    const Scenario r = single_link(10.0);
    CHECK(numerical_rank(gen_channels(r, 0, 9).to_user(0, 0)) == 2);
}

TEST_CASE("doubling distance scales line-of-sight energy by 2^-3.5") {
    SystemConstants c;
    c.rician_k = std::numeric_limits<double>::infinity();
    const Vec3 tx{0.0, 0.0, 0.0};
    for (double d : {3.0, 40.0, 250.0}) {
        const Vec3 near{d * 0.6, d * 0.8, 0.0};
        const Vec3 far{2 * near.x, 2 * near.y, 0.0};
        const double ratio = fro_norm_sq(rician_channel(c, tx, far, 1)) / fro_norm_sq(rician_channel(c, tx, near, 1));
        CHECK(ratio == doctest::Approx(std::pow(2.0, -3.5)).epsilon(1e-12));
    }
    const Vec3 rx{3.0, 4.0, 0.0};
    const double expected = c.reference_gain() * std::pow(5.0, -3.5) * 8.0;
    CHECK(fro_norm_sq(rician_channel(c, tx, rx, 1)) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("line-of-sight energy strictly decreases with distance") {
    SystemConstants c;
    c.rician_k = std::numeric_limits<double>::infinity();
    double prev = std::numeric_limits<double>::infinity();
    for (double d = 1.5; d < 600.0; d *= 1.3) {
        const double e = fro_norm_sq(rician_channel(c, {0, 0, 20.0}, {d, 0, 20.0}, 5));
        CHECK(e < prev);
        prev = e;
    }
}

TEST_CASE("full configuration channels are 2x4, finite and reproducible") {
    const Scenario s = default_layout(7);
    const ChannelSet a = gen_channels(s, 3, 42);
    const ChannelSet b = gen_channels(s, 3, 42);
    REQUIRE(a.user.size() == 16);
    REQUIRE(a.eave.size() == 4);
    for (std::size_t n = 0; n < a.user.size(); ++n) {
        CHECK(a.user[n].rows() == 2);
        CHECK(a.user[n].cols() == 4);
        CHECK(a.user[n].all_finite());
        CHECK(a.user[n] == b.user[n]);
    }
    for (std::size_t n = 0; n < a.eave.size(); ++n) CHECK(a.eave[n] == b.eave[n]);
    const ChannelSet other = gen_channels(s, 4, 42);
    CHECK(!(other.user[0] == a.user[0]));
}

TEST_CASE("degenerate geometry below 1 m") {
    SystemConstants c;
    try {
        (void)rician_channel(c, {0, 0, 0.5}, {0, 0, 0}, 0);
        FAIL("expected DegenerateGeometry");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateGeometry);
    }
    CHECK_NOTHROW((void)rician_channel(c, {0, 0, 1.0}, {0, 0, 0}, 0));
}

TEST_CASE("step_uav examples") {
    const Scenario s = single_link();
    REQUIRE(s.constants.max_step_m() == doctest::Approx(2.0));
    const Vec3 q = s.uav_pos[0];

    const StepResult still = step_uav(s, 0, {0.0, 1.234});
    CHECK(still.position == q);
    CHECK(!still.step_violation);

    const StepResult full = step_uav(s, 0, {2.0, 0.0});
    CHECK(full.position.x == doctest::Approx(q.x + 2.0));
    CHECK(full.position.y == doctest::Approx(q.y));
    CHECK(!full.step_violation);

    const StepResult clipped = step_uav(s, 0, {5.0, std::numbers::pi / 2});
    CHECK(clipped.step_violation);
    CHECK(clipped.excess_m == doctest::Approx(3.0));
    CHECK(distance(clipped.position, q) == doctest::Approx(2.0));
    CHECK(clipped.position.z == q.z);

    CHECK_THROWS_AS(step_uav(s, 0, {-1.0, 0.0}), Error);
}

TEST_CASE("step_uav never exceeds the per-slot cap") {
    const Scenario s = single_link();
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> mu(0.0, 10.0);
    std::uniform_real_distribution<double> th(-10.0, 10.0);
    for (int i = 0; i < 1000; ++i) {
        const StepResult r = step_uav(s, 0, {mu(rng), th(rng)});
        CHECK(distance(r.position, s.uav_pos[0]) <= 2.0 + 1e-12);
    }
}

TEST_CASE("terminal_violation examples") {
    Scenario s = single_link();
    s.terminal[0] = s.uav_pos[0];
    CHECK(terminal_violation(s) == 0.0);
    s.terminal[0].x = s.uav_pos[0].x + 2.0;
    CHECK(terminal_violation(s) == 0.0);
    s.terminal[0].x = s.uav_pos[0].x + 3.0;
    CHECK(terminal_violation(s) == doctest::Approx(1.0));
}

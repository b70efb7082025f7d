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

#include "support.hpp"
#include "uavsec/rates.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace uavsec::testing {

inline SystemConstants sizes(std::size_t U, std::size_t K, std::size_t I, std::size_t M, std::size_t N, std::size_t d) {
    SystemConstants c;
    c.num_uavs = U;
    c.num_users = K;
    c.num_eaves = I;
    c.tx_antennas = M;
    c.rx_antennas = N;
    c.streams = d;
    c.power_w = 1.0;
    c.noise_user_w = 1.0;
    c.noise_eave_w = 1.0;
    return c;
}

inline ChannelSet empty_channels(const SystemConstants& c, std::vector<std::size_t> serving) {
    ChannelSet ch;
    ch.num_uavs = c.num_uavs;
    ch.num_users = c.num_users;
    ch.num_eaves = c.num_eaves;
    ch.user.assign(c.num_uavs * c.num_users, ComplexMatrix(c.rx_antennas, c.tx_antennas));
    ch.eave.assign(c.num_uavs * c.num_eaves, ComplexMatrix(c.rx_antennas, c.tx_antennas));
    ch.served_users.assign(c.num_uavs, {});
    for (std::size_t k = 0; k < serving.size(); ++k) ch.served_users[serving[k]].push_back(k);
    ch.serving_uav = std::move(serving);
    return ch;
}

inline ChannelSet random_channels(const SystemConstants& c, std::mt19937_64& rng, double scale) {
    std::uniform_int_distribution<std::size_t> pick(0, c.num_uavs - 1);
    std::vector<std::size_t> serving(c.num_users);
    for (auto& s : serving) s = pick(rng);
    ChannelSet ch = empty_channels(c, serving);
    for (auto& h : ch.user) h = gaussian_matrix(c.rx_antennas, c.tx_antennas, rng) * cplx(scale);
    for (auto& h : ch.eave) h = gaussian_matrix(c.rx_antennas, c.tx_antennas, rng) * cplx(scale);
    return ch;
}

inline BeamformingSolution random_solution(const SystemConstants& c, std::mt19937_64& rng) {
    BeamformingSolution s = BeamformingSolution::zeros(c);
    for (auto& w : s.common) w = gaussian_matrix(c.tx_antennas, c.streams, rng);
    for (auto& w : s.priv) w = gaussian_matrix(c.tx_antennas, c.streams, rng);
    return s;
}

// Scalar re-derivation for N = d = 1: every link is a 1 × M row, every beam an M × 1 column.
struct ScalarOracle {
    const ChannelSet& ch;
    const BeamformingSolution& sol;
    const SystemConstants& c;

    static double power(const ComplexMatrix& row, const ComplexMatrix& beam) {
        cplx acc{};
        for (std::size_t m = 0; m < row.cols(); ++m) acc += row(0, m) * beam(m, 0);
        return std::norm(acc);
    }
    double user_gain(std::size_t beam_owner, std::size_t k) const {
        return power(ch.to_user(ch.serving_uav[beam_owner], k), sol.priv[beam_owner]);
    }
    double eave_gain(std::size_t beam_owner, std::size_t i) const {
        return power(ch.to_eave(ch.serving_uav[beam_owner], i), sol.priv[beam_owner]);
    }
    double private_sinr(std::size_t k) const {
        double den = c.noise_user_w;
        for (std::size_t j = 0; j < c.num_users; ++j)
            if (j != k) den += user_gain(j, k);
        return user_gain(k, k) / den;
    }
    double common_sinr(std::size_t k) const {
        double den = c.noise_user_w;
        for (std::size_t j = 0; j < c.num_users; ++j) den += user_gain(j, k);
        return power(ch.to_user(ch.serving_uav[k], k), sol.common[ch.serving_uav[k]]) / den;
    }
    double eave_sinr(std::size_t k, std::size_t i) const {
        double den = c.noise_eave_w;
        for (std::size_t j = 0; j < c.num_users; ++j)
            if (j != k) den += eave_gain(j, i);
        return eave_gain(k, i) / den;
    }
    double eave_common_sinr(std::size_t u, std::size_t i) const {
        double den = c.noise_eave_w;
        for (std::size_t j = 0; j < c.num_users; ++j) den += eave_gain(j, i);
        return power(ch.to_eave(u, i), sol.common[u]) / den;
    }
};

inline bool close(double a, double b, double tol = 1e-12) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

} // namespace uavsec::testing

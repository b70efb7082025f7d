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
#include "uavsec/rates.hpp"

#include "uavsec/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace uavsec {

BeamformingSolution BeamformingSolution::zeros(const SystemConstants& c) {
    BeamformingSolution s;
    s.common.assign(c.num_uavs, ComplexMatrix(c.tx_antennas, c.streams));
    s.priv.assign(c.num_users, ComplexMatrix(c.tx_antennas, c.streams));
    s.alloc.assign(c.num_users, 0.0);
    s.zeta.assign(c.num_users, 0.0);
    s.zeta_eave.assign(c.num_users * c.num_eaves, 0.0);
    s.ups_c.assign(c.num_users, 0.0);
    s.ups_ci.assign(c.num_uavs * c.num_eaves, 0.0);
    return s;
}

double ConstraintResiduals::max() const noexcept {
    double m = negativity;
    for (double v : secrecy_budget) m = std::max(m, v);
    for (double v : power) m = std::max(m, v);
    for (double v : decodability) m = std::max(m, v);
    return m;
}

void check_shapes(const ChannelSet& ch, const BeamformingSolution& sol, const SystemConstants& c) {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::ShapeMismatch, what); };
    if (ch.num_uavs != c.num_uavs || ch.num_users != c.num_users || ch.num_eaves != c.num_eaves) {
        fail("channel set counts differ from constants");
    }
    if (ch.user.size() != c.num_uavs * c.num_users || ch.eave.size() != c.num_uavs * c.num_eaves) {
        fail("channel set is incomplete");
    }
    if (ch.serving_uav.size() != c.num_users) fail("association size differs from num_users");
    for (const auto* group : {&ch.user, &ch.eave})
        for (const auto& h : *group)
            if (h.rows() != c.rx_antennas || h.cols() != c.tx_antennas) fail("channel is not N x M");
    if (sol.common.size() != c.num_uavs || sol.priv.size() != c.num_users || sol.alloc.size() != c.num_users) {
        fail("solution counts differ from constants");
    }
    for (const auto* group : {&sol.common, &sol.priv})
        for (const auto& w : *group)
            if (w.rows() != c.tx_antennas || w.cols() != c.streams) fail("beamformer is not M x d");
}

LinkGains link_gains(const ChannelSet& ch, const BeamformingSolution& sol, const SystemConstants& c) {
    check_shapes(ch, sol, c);
    const std::size_t U = c.num_uavs, K = c.num_users, I = c.num_eaves;
    LinkGains g;
    g.num_uavs = U;
    g.num_users = K;
    g.num_eaves = I;
    g.common_user.resize(U * K);
    g.common_eave.resize(U * I);
    g.private_user.resize(K * K);
    g.private_eave.resize(K * I);
    g.tx_power.assign(U, 0.0);
    for (std::size_t u = 0; u < U; ++u) {
        g.tx_power[u] += fro_norm_sq(sol.common[u]);
        for (std::size_t k = 0; k < K; ++k) g.common_user[u * K + k] = fro_norm_sq(ch.to_user(u, k) * sol.common[u]);
        for (std::size_t i = 0; i < I; ++i) g.common_eave[u * I + i] = fro_norm_sq(ch.to_eave(u, i) * sol.common[u]);
    }
    for (std::size_t j = 0; j < K; ++j) {
        const std::size_t v = ch.serving_uav[j];
        g.tx_power[v] += fro_norm_sq(sol.priv[j]);
        for (std::size_t k = 0; k < K; ++k) g.private_user[j * K + k] = fro_norm_sq(ch.to_user(v, k) * sol.priv[j]);
        for (std::size_t i = 0; i < I; ++i) g.private_eave[j * I + i] = fro_norm_sq(ch.to_eave(v, i) * sol.priv[j]);
    }
    return g;
}

namespace {

double ratio(double num, double den) { return num > 0.0 ? num / den : 0.0; }

} // namespace

RateReport rates_from_gains(const LinkGains& g, const std::vector<std::size_t>& serving_uav,
                            const std::vector<double>& alloc, const SystemConstants& c) {
    const std::size_t U = g.num_uavs, K = g.num_users, I = g.num_eaves;
    const double d = static_cast<double>(c.streams);
    const double noise_user = d * c.noise_user_w;
    const double noise_eave = d * c.noise_eave_w;

    RateReport r;
    r.num_uavs = U;
    r.num_users = K;
    r.num_eaves = I;
    r.sinr_common.resize(K);
    r.rate_common.resize(K);
    r.sinr_private.resize(K);
    r.rate_private.resize(K);
    r.sinr_eave.resize(K * I);
    r.rate_eave.resize(K * I);
    r.sinr_eave_common.resize(U * I);
    r.rate_eave_common.resize(U * I);

    // Interference from other UAVs' common beams is not counted; every private beam is.
    for (std::size_t k = 0; k < K; ++k) {
        double others = 0.0;
        for (std::size_t j = 0; j < K; ++j)
            if (j != k) others += g.private_user[j * K + k];
        const double own = g.private_user[k * K + k];
        const std::size_t u = serving_uav[k];
        r.sinr_common[k] = ratio(g.common_user[u * K + k], noise_user + others + own);
        r.sinr_private[k] = ratio(own, noise_user + others);
        r.rate_common[k] = std::log2(1.0 + r.sinr_common[k]);
        r.rate_private[k] = std::log2(1.0 + r.sinr_private[k]);
    }
    for (std::size_t i = 0; i < I; ++i) {
        double all_private = 0.0;
        for (std::size_t j = 0; j < K; ++j) all_private += g.private_eave[j * I + i];
        for (std::size_t k = 0; k < K; ++k) {
            double others = 0.0;
            for (std::size_t j = 0; j < K; ++j)
                if (j != k) others += g.private_eave[j * I + i];
            const double own = g.private_eave[k * I + i];
            r.sinr_eave[k * I + i] = ratio(own, noise_eave + others);
            r.rate_eave[k * I + i] = std::log2(1.0 + r.sinr_eave[k * I + i]);
        }
        for (std::size_t u = 0; u < U; ++u) {
            r.sinr_eave_common[u * I + i] = ratio(g.common_eave[u * I + i], noise_eave + all_private);
            r.rate_eave_common[u * I + i] = std::log2(1.0 + r.sinr_eave_common[u * I + i]);
        }
    }

    r.common_rate.assign(U, 0.0);
    r.eave_common_rate.assign(U, 0.0);
    std::vector<bool> has_user(U, false);
    for (std::size_t k = 0; k < K; ++k) {
        const std::size_t u = serving_uav[k];
        r.common_rate[u] = has_user[u] ? std::min(r.common_rate[u], r.rate_common[k]) : r.rate_common[k];
        has_user[u] = true;
    }
    for (std::size_t u = 0; u < U; ++u)
        for (std::size_t i = 0; i < I; ++i) r.eave_common_rate[u] = std::max(r.eave_common_rate[u], r.rate_eave_common[u * I + i]);

    r.secrecy.resize(K);
    r.total_secrecy = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        double worst = 0.0;
        for (std::size_t i = 0; i < I; ++i) worst = std::max(worst, r.rate_eave[k * I + i]);
        r.secrecy[k] = alloc[k] + std::max(0.0, r.rate_private[k] - worst);
        r.total_secrecy += r.secrecy[k];
    }

    auto& res = r.residuals;
    res.secrecy_budget.assign(U, 0.0);
    res.decodability.assign(U, 0.0);
    res.power.assign(U, 0.0);
    std::vector<double> alloc_sum(U, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        alloc_sum[serving_uav[k]] += alloc[k];
        res.negativity = std::max(res.negativity, -alloc[k]);
    }
    for (std::size_t u = 0; u < U; ++u) {
        res.secrecy_budget[u] = std::max(0.0, alloc_sum[u] - (r.common_rate[u] - r.eave_common_rate[u]));
        res.decodability[u] = std::max(0.0, alloc_sum[u] - r.common_rate[u]);
        res.power[u] = std::max(0.0, g.tx_power[u] - c.power_w);
    }
    return r;
}

RateReport compute_rates(const ChannelSet& ch, const BeamformingSolution& sol, const SystemConstants& c) {
    return rates_from_gains(link_gains(ch, sol, c), ch.serving_uav, sol.alloc, c);
}

SecrecyResult secrecy_rate(const RateReport& report, const BeamformingSolution& sol,
                           std::optional<std::size_t> designated) {
    const std::size_t K = report.num_users, I = report.num_eaves;
    if (sol.alloc.size() != K) throw Error(ErrorCode::ShapeMismatch, "secrecy_rate: allocation size");
    if (designated && *designated >= I) throw Error(ErrorCode::InvalidArgument, "secrecy_rate: eavesdropper index");
    SecrecyResult out;
    out.per_link.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        double wiretap = 0.0;
        if (designated) {
            wiretap = report.rate_eave[k * I + *designated];
        } else {
            for (std::size_t i = 0; i < I; ++i) wiretap = std::max(wiretap, report.rate_eave[k * I + i]);
        }
        out.per_link[k] = sol.alloc[k] + std::max(0.0, report.rate_private[k] - wiretap);
        out.total += out.per_link[k];
    }
    return out;
}

ConstraintResiduals constraint_residuals(const ChannelSet& ch, const BeamformingSolution& sol,
                                         const SystemConstants& c) {
    return compute_rates(ch, sol, c).residuals;
}

} // namespace uavsec

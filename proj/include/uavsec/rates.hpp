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
#include "uavsec/scenario.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace uavsec {

/// Beamformers, common-rate allocations and auxiliary SINR variables for one slot.
///
/// Private beams are indexed by global user index; beam k is transmitted by the
/// UAV serving user k.
struct BeamformingSolution {
    std::vector<ComplexMatrix> common;  // per UAV, M × d
    std::vector<ComplexMatrix> priv;    // per user, M × d
    std::vector<double> alloc;          // common secrecy allocation per user (bits/s/Hz)

    std::vector<double> zeta;       // private SINR per user
    std::vector<double> zeta_eave;  // private SINR of user k's stream at eavesdropper i, index k * I + i
    std::vector<double> ups_c;      // common SINR per user
    std::vector<double> ups_ci;     // common SINR per (UAV u, eavesdropper i), index u * I + i

    /// All-zero beams, allocations and auxiliaries shaped for `constants`.
    static BeamformingSolution zeros(const SystemConstants& constants);
};

/// Received powers ‖H·w‖²_F of every beam at every receiver.
struct LinkGains {
    std::size_t num_uavs = 0;
    std::size_t num_users = 0;
    std::size_t num_eaves = 0;
    std::vector<double> common_user;   // [u * K + k]
    std::vector<double> common_eave;   // [u * I + i]
    std::vector<double> private_user;  // [j * K + k]: beam of user j at user k
    std::vector<double> private_eave;  // [j * I + i]: beam of user j at eavesdropper i
    std::vector<double> tx_power;      // per UAV
};

LinkGains link_gains(const ChannelSet& channels, const BeamformingSolution& sol, const SystemConstants& constants);

/// Nonnegative violation magnitudes, one entry per UAV unless noted.
struct ConstraintResiduals {
    std::vector<double> secrecy_budget;  // Σ_k 𝔯 ≤ R_c − R_c,i
    std::vector<double> power;           // ‖w_c‖² + Σ_k ‖w_k‖² ≤ P_u
    double negativity = 0.0;             // max_k max(0, −𝔯_k)
    std::vector<double> decodability;    // Σ_k 𝔯 ≤ min_k R_c

    [[nodiscard]] double max() const noexcept;
};

struct RateReport {
    std::size_t num_uavs = 0;
    std::size_t num_users = 0;
    std::size_t num_eaves = 0;

    std::vector<double> sinr_common;   // per user
    std::vector<double> rate_common;   // per user
    std::vector<double> sinr_private;  // per user
    std::vector<double> rate_private;  // per user
    std::vector<double> sinr_eave;     // [k * I + i]
    std::vector<double> rate_eave;     // [k * I + i]
    std::vector<double> sinr_eave_common;  // [u * I + i]
    std::vector<double> rate_eave_common;  // [u * I + i]

    std::vector<double> common_rate;       // per UAV: min over served users of R_c (0 if none)
    std::vector<double> eave_common_rate;  // per UAV: max over eavesdroppers of R_c,i (0 if none)

    std::vector<double> secrecy;  // per user, worst-case eavesdropper
    double total_secrecy = 0.0;
    ConstraintResiduals residuals;
};

/// Rates from precomputed gains. `serving_uav` maps users to UAVs.
RateReport rates_from_gains(const LinkGains& gains, const std::vector<std::size_t>& serving_uav,
                            const std::vector<double>& alloc, const SystemConstants& constants);

/// All SINRs, rates, worst-case secrecy and constraint residuals. Throws ShapeMismatch.
RateReport compute_rates(const ChannelSet& channels, const BeamformingSolution& sol, const SystemConstants& constants);

struct SecrecyResult {
    std::vector<double> per_link;
    double total = 0.0;
};

/// 𝔯_k + [R_k − R_k,i]⁺ against the worst eavesdropper, or against `designated` when given.
SecrecyResult secrecy_rate(const RateReport& report, const BeamformingSolution& sol,
                           std::optional<std::size_t> designated = std::nullopt);

ConstraintResiduals constraint_residuals(const ChannelSet& channels, const BeamformingSolution& sol,
                                         const SystemConstants& constants);

/// Checks beam and channel shapes against the constants; throws ShapeMismatch.
void check_shapes(const ChannelSet& channels, const BeamformingSolution& sol, const SystemConstants& constants);

} // namespace uavsec

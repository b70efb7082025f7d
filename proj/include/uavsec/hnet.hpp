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
#include "uavsec/rates.hpp"
#include "uavsec/scenario.hpp"

#include <cstddef>
#include <memory>
#include <vector>

namespace uavsec {

/// Source of the top-d eigenvectors of a whitened Hermitian matrix.
class EigenSolver {
public:
    virtual ~EigenSolver() = default;
    /// n × d matrix with orthonormal columns spanning the dominant eigenspace.
    [[nodiscard]] virtual ComplexMatrix dominant(const ComplexMatrix& m, std::size_t d) const = 0;
};

class ExactEigenSolver final : public EigenSolver {
public:
    [[nodiscard]] ComplexMatrix dominant(const ComplexMatrix& m, std::size_t d) const override;
};

enum class EigMode { Exact, Learned };

inline constexpr double kBetaMin = 0.05;
inline constexpr double kBetaMax = 1.0;
inline constexpr double kAlphaMin = 0.01;
inline constexpr double kAlphaMax = 0.99;

struct HNetParams {
    std::size_t num_blocks = 6;
    std::vector<double> beta;   // damping per block, in [kBetaMin, kBetaMax]
    std::vector<double> alpha;  // common-beam power fraction per block, in [kAlphaMin, kAlphaMax]
    EigMode eig_mode = EigMode::Exact;
    std::shared_ptr<const EigenSolver> learned;  // required when eig_mode == Learned

    /// β = 1, α = 0.5 for every block.
    static HNetParams defaults(std::size_t num_blocks = 6);
    /// Throws InvalidConfig.
    void validate() const;
    /// Clamps β and α into their ranges.
    void project();
};

/// Sets ζ, υ to the SINRs of the current beams, making the auxiliary SINR constraints tight.
void update_aux(const ChannelSet& channels, BeamformingSolution& sol, const SystemConstants& constants);

/// Per-link Gram pairs (odd = weighted interference-plus-noise, even = signal) in the receive space.
struct GramSet {
    std::vector<ComplexMatrix> m1, m2;  // common message at user k, per user
    std::vector<ComplexMatrix> m3, m4;  // common message at eavesdropper i of UAV u, index u * I + i
    std::vector<ComplexMatrix> m5, m6;  // private message at user k, per user
};

/// The noise block is (d/N)·σ²·I_N so that its trace equals the rate model's d·σ².
GramSet build_grams(const ChannelSet& channels, const BeamformingSolution& sol, const SystemConstants& constants);

/// Unit-norm transmit term C⁻ᴴ·v_{1:d}(C⁻¹·M_even·C⁻ᴴ) lifted by the channel adjoint.
/// Returns the zero matrix when M_even or H vanishes.
ComplexMatrix whitened_term(const ComplexMatrix& m_odd, const ComplexMatrix& m_even, const ComplexMatrix& h,
                            std::size_t d, const EigenSolver& eig);

struct CommonDirection {
    ComplexMatrix direction;   // unit Frobenius norm, or zero when the two terms cancel
    ComplexMatrix first_term;  // the user term alone
    bool cancelled = false;
};

inline constexpr double kCancellationFloor = 1e-9;

/// Difference of the user and eavesdropper whitened terms, normalized.
/// Pass empty eavesdropper matrices when there is no eavesdropper.
CommonDirection closed_form_wc(const ComplexMatrix& m1, const ComplexMatrix& m2, const ComplexMatrix& m3,
                               const ComplexMatrix& m4, const ComplexMatrix& h_user, const ComplexMatrix& h_eave,
                               std::size_t d, const EigenSolver& eig);

ComplexMatrix closed_form_wk(const ComplexMatrix& m5, const ComplexMatrix& m6, const ComplexMatrix& h,
                             std::size_t d, const EigenSolver& eig);

/// Equal split of max(0, R_c − R_c,i) across each UAV's served users; the sum never
/// exceeds the budget in floating point.
std::vector<double> allocate_common(const RateReport& report, const std::vector<std::vector<std::size_t>>& served_users);

/// Scales w_c to α·P_u and splits (1 − α)·P_u equally over the UAV's private beams.
/// Directions are renormalized first; zero directions stay zero.
void project_power(BeamformingSolution& sol, const std::vector<std::vector<std::size_t>>& served_users, double power_w,
                   double alpha);

/// Switches off the common beam of every UAV whose common rate falls below the
/// eavesdroppers' (R_c < R_c,i cannot meet the secrecy budget with nonnegative allocations) and
/// gives its power to the private beams. Returns the rate report of the result.
RateReport enforce_common_secrecy(const ChannelSet& channels, BeamformingSolution& sol,
                                  const SystemConstants& constants);

/// Matched-filter directions with α = 0.5.
BeamformingSolution mrt_init(const ChannelSet& channels, const SystemConstants& constants);

/// Runs the unfolded blocks. The returned auxiliaries are those the last block's Grams
/// were built from, so kkt_residuals on the output measures the fixed-point defect.
BeamformingSolution hnet_forward(const ChannelSet& channels, const HNetParams& params, const SystemConstants& constants);

struct KktResiduals {
    double allocation = 0.0;   // common allocations vs. the secrecy budget
    double common_aux = 0.0;   // common SINR auxiliaries at users
    double eave_aux = 0.0;     // common SINR auxiliaries at eavesdroppers
    double private_aux = 0.0;  // private SINR auxiliaries
    [[nodiscard]] double max() const noexcept;
};

KktResiduals kkt_residuals(const ChannelSet& channels, const BeamformingSolution& sol, const SystemConstants& constants);

} // namespace uavsec

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

#include "uavsec/hnet.hpp"
#include "uavsec/neural.hpp"
#include "uavsec/numkernel.hpp"

#include <cstddef>
#include <cstdint>
#include <random>

namespace uavsec {

/// Dense net mapping an N×N Hermitian matrix (2N² real inputs) to d raw complex
/// N-vectors (2Nd real outputs): three tanh hidden layers of width 4·2N².
nn::Network make_enn(std::size_t n, std::size_t d, std::uint64_t seed);

/// Trace-removed, Frobenius-normalized matrix flattened as (re, im) pairs, row-major.
/// A multiple of the identity maps to zeros.
void enn_features(const ComplexMatrix& m, std::span<double> out);

/// Eigen solver backed by a trained ENN. The d raw vectors are Gram-Schmidt
/// orthonormalized; degenerate outputs fall back to identity columns.
class LearnedEigenSolver final : public EigenSolver {
public:
    LearnedEigenSolver(nn::Network net, std::size_t n, std::size_t d);
    [[nodiscard]] ComplexMatrix dominant(const ComplexMatrix& m, std::size_t d) const override;
    [[nodiscard]] const nn::Network& network() const noexcept { return net_; }
    [[nodiscard]] std::size_t dim() const noexcept { return n_; }
    [[nodiscard]] std::size_t streams() const noexcept { return d_; }

private:
    nn::Network net_;
    std::size_t n_, d_;
};

/// AᴴA with A an n×n standard complex Gaussian matrix.
ComplexMatrix random_psd(std::size_t n, std::mt19937_64& rng);

struct EnnTrainConfig {
    std::size_t steps = 8000;
    std::size_t batch = 128;
    double lr = 2e-3;
    double final_lr_fraction = 0.005;  // geometric decay of the learning rate over the run
    std::uint64_t seed = 1;
};

struct EnnTrainReport {
    std::size_t steps = 0;
    double final_loss = 0.0;  // batch mean of 1 - |u_jᴴ v_j|² / ‖v_j‖², averaged over columns
};

/// Supervised pre-training against the exact eigensolver on fresh random PSD matrices.
/// The loss is invariant to the phase of each output column.
EnnTrainReport pretrain_enn(nn::Network& net, std::size_t n, std::size_t d, const EnnTrainConfig& cfg);

struct EnnFidelity {
    double mean_angle = 0.0;  // radians
    double max_angle = 0.0;
    std::size_t count = 0;
};

/// Angle between the first learned vector and the exact dominant eigenvector,
/// acos |uᴴv|, over `count` random PSD matrices.
EnnFidelity enn_fidelity(const EigenSolver& solver, std::size_t n, std::size_t count, std::uint64_t seed);

} // namespace uavsec

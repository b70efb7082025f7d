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

// Shared fixtures for the test suites: seeded random matrices and a dense
// eigensolver oracle that is independent of the library's power iteration.

#include "uavsec/numkernel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

namespace uavsec::testing {

inline ComplexMatrix gaussian_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    std::normal_distribution<double> n01(0.0, 1.0);
    ComplexMatrix a(rows, cols);
    for (auto& z : a.entries()) z = cplx(n01(rng), n01(rng)) / std::sqrt(2.0);
    return a;
}

/// Aᴴ A + I, Hermitian positive definite.
inline ComplexMatrix random_hpd(std::size_t n, std::mt19937_64& rng) {
    const ComplexMatrix a = gaussian_matrix(n, n, rng);
    return hermitian_part(a.adjoint() * a + ComplexMatrix::identity(n));
}

/// Aᴴ A, Hermitian positive semidefinite.
inline ComplexMatrix random_hpsd(std::size_t n, std::mt19937_64& rng) {
    const ComplexMatrix a = gaussian_matrix(n, n, rng);
    return hermitian_part(a.adjoint() * a);
}

inline Eigen::MatrixXcd to_eigen(const ComplexMatrix& m) {
    Eigen::MatrixXcd out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
    return out;
}

inline ComplexMatrix from_eigen(const Eigen::MatrixXcd& m) {
    ComplexMatrix out(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
    return out;
}

struct DenseEigen {
    std::vector<double> values;  // nonincreasing
    ComplexMatrix vectors;       // columns in the same order
};

inline DenseEigen dense_eigen(const ComplexMatrix& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(to_eigen(m));
    const auto n = static_cast<Eigen::Index>(m.rows());
    DenseEigen out{std::vector<double>(m.rows()), ComplexMatrix(m.rows(), m.rows())};
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::Index src = n - 1 - j;
        out.values[j] = solver.eigenvalues()(src);
        for (Eigen::Index i = 0; i < n; ++i) out.vectors(i, j) = solver.eigenvectors()(i, src);
    }
    return out;
}

/// Largest principal angle between the column spans of a and b (both orthonormal).
inline double subspace_angle(const ComplexMatrix& a, const ComplexMatrix& b) {
    const Eigen::MatrixXcd g = to_eigen(a).adjoint() * to_eigen(b);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(g);
    const double smin = svd.singularValues().minCoeff();
    return std::acos(std::clamp(smin, 0.0, 1.0));
}

inline double rel_error(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

} // namespace uavsec::testing

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

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace uavsec {

using cplx = std::complex<double>;

/// Dense complex matrix stored row-major. Constructors reject non-finite entries.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols);
    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries);
    ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows);

    static ComplexMatrix identity(std::size_t n);
    static ComplexMatrix diagonal(std::span<const double> values);
    static ComplexMatrix column(std::span<const cplx> values);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }
    [[nodiscard]] bool is_square() const noexcept { return rows_ == cols_; }

    cplx& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    const cplx& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    [[nodiscard]] std::span<const cplx> entries() const noexcept { return data_; }
    [[nodiscard]] std::span<cplx> entries() noexcept { return data_; }

    [[nodiscard]] ComplexMatrix adjoint() const;
    [[nodiscard]] ComplexMatrix col(std::size_t c) const;
    void set_col(std::size_t c, const ComplexMatrix& v);
    [[nodiscard]] bool all_finite() const noexcept;
    void fill(cplx value) noexcept;

    ComplexMatrix& operator+=(const ComplexMatrix& rhs);
    ComplexMatrix& operator-=(const ComplexMatrix& rhs);
    ComplexMatrix& operator*=(cplx s) noexcept;

    /// Exact (bitwise-value) equality of shape and entries.
    friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cplx> data_;
};

ComplexMatrix operator+(ComplexMatrix lhs, const ComplexMatrix& rhs);
ComplexMatrix operator-(ComplexMatrix lhs, const ComplexMatrix& rhs);
ComplexMatrix operator*(const ComplexMatrix& lhs, const ComplexMatrix& rhs);
ComplexMatrix operator*(ComplexMatrix m, cplx s);
ComplexMatrix operator*(cplx s, ComplexMatrix m);

/// lhs * rhsᴴ without materializing the adjoint.
ComplexMatrix mul_adjoint(const ComplexMatrix& lhs, const ComplexMatrix& rhs);

/// Sum of squared magnitudes of all entries.
double fro_norm_sq(const ComplexMatrix& m) noexcept;
double fro_norm(const ComplexMatrix& m) noexcept;
cplx trace(const ComplexMatrix& m);

/// ‖m − mᴴ‖_F / ‖m‖_F, zero for the zero matrix.
double hermitian_defect(const ComplexMatrix& m);
/// (m + mᴴ)/2.
ComplexMatrix hermitian_part(const ComplexMatrix& m);

inline constexpr double kHermitianTolerance = 1e-10;
inline constexpr double kRegularizationScale = 1e-9;
inline constexpr double kTriangularFloor = 1e-12;
inline constexpr std::size_t kEigenIterationCap = 10'000;

/// Lower-triangular C with C·Cᴴ = m. Throws NotHermitian / NotPositiveDefinite.
ComplexMatrix cholesky(const ComplexMatrix& m);

/// m + ε·I with ε = 1e-9·trace(m)/dim; the floor applied before factorizing Gram matrices.
ComplexMatrix regularized(const ComplexMatrix& m);

struct EigenPairs {
    ComplexMatrix vectors;       // n × d, orthonormal columns
    std::vector<double> values;  // nonincreasing
    std::size_t iterations = 0;  // total power-iteration steps spent
};

/// Top-d eigenpairs of a Hermitian PSD matrix by power iteration with deflation.
///
/// Each iteration also squares the (normalized) iteration operator, so after j
/// steps the iterate has seen m^(2^j); tiny spectral gaps converge in a few dozen
/// steps instead of hitting the cap. The largest-magnitude entry of every
/// returned vector is real and nonnegative.
EigenPairs dominant_eigvecs(const ComplexMatrix& m, std::size_t d);

/// Inverse of a lower-triangular matrix by forward substitution.
ComplexMatrix inv_lower_triangular(const ComplexMatrix& c);

/// Modified Gram-Schmidt over the columns; dependent columns are completed from
/// the standard basis so the result always has orthonormal columns (cols ≤ rows).
ComplexMatrix orthonormalize_columns(const ComplexMatrix& a);

/// Scales m to unit Frobenius norm; returns the zero matrix unchanged.
ComplexMatrix normalized(const ComplexMatrix& m);

/// tr(aᴴ b), the Frobenius inner product.
cplx inner(const ComplexMatrix& a, const ComplexMatrix& b);

} // namespace uavsec

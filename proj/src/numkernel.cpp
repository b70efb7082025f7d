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
#include "uavsec/numkernel.hpp"

#include "uavsec/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace uavsec {

namespace {

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw Error(ErrorCode::ShapeMismatch, std::string(op) + ": " + std::to_string(a.rows()) + "x" +
                                                  std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                                                  "x" + std::to_string(b.cols()));
    }
}

void require_square(const ComplexMatrix& m, const char* op) {
    if (!m.is_square() || m.empty()) {
        throw Error(ErrorCode::ShapeMismatch, std::string(op) + ": matrix must be square and non-empty");
    }
}

// Orthogonalizes column vector x against the first `count` columns of basis (twice, for stability).
void project_out(ComplexMatrix& x, const ComplexMatrix& basis, std::size_t count) {
    const std::size_t n = x.rows();
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t j = 0; j < count; ++j) {
            cplx dot{0.0, 0.0};
            for (std::size_t i = 0; i < n; ++i) dot += std::conj(basis(i, j)) * x(i, 0);
            for (std::size_t i = 0; i < n; ++i) x(i, 0) -= dot * basis(i, j);
        }
    }
}

void fix_phase(ComplexMatrix& v) {
    std::size_t best = 0;
    double best_mag = -1.0;
    for (std::size_t i = 0; i < v.rows(); ++i) {
        const double mag = std::abs(v(i, 0));
        if (mag > best_mag) {
            best_mag = mag;
            best = i;
        }
    }
    if (best_mag <= 0.0) return;
    const cplx rot = std::conj(v(best, 0)) / best_mag;
    for (std::size_t i = 0; i < v.rows(); ++i) v(i, 0) *= rot;
    v(best, 0) = cplx(best_mag, 0.0);
}

ComplexMatrix basis_vector(std::size_t n, std::size_t i) {
    ComplexMatrix e(n, 1);
    e(i, 0) = 1.0;
    return e;
}

} // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_) {
        throw Error(ErrorCode::ShapeMismatch, "entry count " + std::to_string(data_.size()) + " != " +
                                                  std::to_string(rows_) + "x" + std::to_string(cols_));
    }
    if (!all_finite()) throw Error(ErrorCode::NonFinite, "matrix entries must be finite");
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
        if (row.size() != cols_) throw Error(ErrorCode::ShapeMismatch, "ragged initializer rows");
        data_.insert(data_.end(), row.begin(), row.end());
    }
    if (!all_finite()) throw Error(ErrorCode::NonFinite, "matrix entries must be finite");
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const double> values) {
    ComplexMatrix m(values.size(), values.size());
    for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
    if (!m.all_finite()) throw Error(ErrorCode::NonFinite, "diagonal entries must be finite");
    return m;
}

ComplexMatrix ComplexMatrix::column(std::span<const cplx> values) {
    return ComplexMatrix(values.size(), 1, std::vector<cplx>(values.begin(), values.end()));
}

ComplexMatrix ComplexMatrix::adjoint() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
    return out;
}

ComplexMatrix ComplexMatrix::col(std::size_t c) const {
    ComplexMatrix out(rows_, 1);
    for (std::size_t r = 0; r < rows_; ++r) out(r, 0) = (*this)(r, c);
    return out;
}

void ComplexMatrix::set_col(std::size_t c, const ComplexMatrix& v) {
    if (v.rows() != rows_ || v.cols() != 1 || c >= cols_) throw Error(ErrorCode::ShapeMismatch, "set_col");
    for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = v(r, 0);
}

bool ComplexMatrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(),
                       [](const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

void ComplexMatrix::fill(cplx value) noexcept { std::fill(data_.begin(), data_.end(), value); }

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& rhs) {
    require_same_shape(*this, rhs, "operator+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& rhs) {
    require_same_shape(*this, rhs, "operator-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(cplx s) noexcept {
    for (auto& z : data_) z *= s;
    return *this;
}

ComplexMatrix operator+(ComplexMatrix lhs, const ComplexMatrix& rhs) { return lhs += rhs; }
ComplexMatrix operator-(ComplexMatrix lhs, const ComplexMatrix& rhs) { return lhs -= rhs; }
ComplexMatrix operator*(ComplexMatrix m, cplx s) { return m *= s; }
ComplexMatrix operator*(cplx s, ComplexMatrix m) { return m *= s; }

ComplexMatrix operator*(const ComplexMatrix& lhs, const ComplexMatrix& rhs) {
    if (lhs.cols() != rhs.rows()) {
        throw Error(ErrorCode::ShapeMismatch, "operator*: inner dimensions " + std::to_string(lhs.cols()) +
                                                  " vs " + std::to_string(rhs.rows()));
    }
    ComplexMatrix out(lhs.rows(), rhs.cols());
    for (std::size_t i = 0; i < lhs.rows(); ++i) {
        for (std::size_t k = 0; k < lhs.cols(); ++k) {
            const cplx a = lhs(i, k);
            if (a == cplx{}) continue;
            for (std::size_t j = 0; j < rhs.cols(); ++j) out(i, j) += a * rhs(k, j);
        }
    }
    return out;
}

ComplexMatrix mul_adjoint(const ComplexMatrix& lhs, const ComplexMatrix& rhs) {
    if (lhs.cols() != rhs.cols()) throw Error(ErrorCode::ShapeMismatch, "mul_adjoint: column counts differ");
    ComplexMatrix out(lhs.rows(), rhs.rows());
    for (std::size_t i = 0; i < lhs.rows(); ++i) {
        for (std::size_t j = 0; j < rhs.rows(); ++j) {
            cplx acc{};
            for (std::size_t k = 0; k < lhs.cols(); ++k) acc += lhs(i, k) * std::conj(rhs(j, k));
            out(i, j) = acc;
        }
    }
    return out;
}

double fro_norm_sq(const ComplexMatrix& m) noexcept {
    double acc = 0.0;
    for (const auto& z : m.entries()) acc += std::norm(z);
    return acc;
}

double fro_norm(const ComplexMatrix& m) noexcept { return std::sqrt(fro_norm_sq(m)); }

cplx trace(const ComplexMatrix& m) {
    require_square(m, "trace");
    cplx acc{};
    for (std::size_t i = 0; i < m.rows(); ++i) acc += m(i, i);
    return acc;
}

double hermitian_defect(const ComplexMatrix& m) {
    require_square(m, "hermitian_defect");
    const double scale = fro_norm(m);
    if (scale == 0.0) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) acc += std::norm(m(i, j) - std::conj(m(j, i)));
    return std::sqrt(acc) / scale;
}

ComplexMatrix hermitian_part(const ComplexMatrix& m) {
    require_square(m, "hermitian_part");
    ComplexMatrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
    return out;
}

ComplexMatrix cholesky(const ComplexMatrix& m) {
    require_square(m, "cholesky");
    if (!m.all_finite()) throw Error(ErrorCode::NonFinite, "cholesky: non-finite input");
    if (hermitian_defect(m) > kHermitianTolerance) {
        throw Error(ErrorCode::NotHermitian, "cholesky: symmetry residual exceeds tolerance");
    }
    const std::size_t n = m.rows();
    const double mean_diag = trace(m).real() / static_cast<double>(n);
    if (!(mean_diag > 0.0)) throw Error(ErrorCode::NotPositiveDefinite, "cholesky: nonpositive trace");
    // Pivots at or below this relative floor are treated as singular.
    const double floor = 1e-14 * mean_diag;

    ComplexMatrix c(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double pivot = m(j, j).real();
        for (std::size_t k = 0; k < j; ++k) pivot -= std::norm(c(j, k));
        if (!(pivot > floor)) {
            throw Error(ErrorCode::NotPositiveDefinite, "cholesky: pivot " + std::to_string(j) + " below floor");
        }
        const double root = std::sqrt(pivot);
        c(j, j) = root;
        for (std::size_t i = j + 1; i < n; ++i) {
            cplx acc = m(i, j);
            for (std::size_t k = 0; k < j; ++k) acc -= c(i, k) * std::conj(c(j, k));
            c(i, j) = acc / root;
        }
    }
    return c;
}

ComplexMatrix regularized(const ComplexMatrix& m) {
    require_square(m, "regularized");
    const double eps = kRegularizationScale * trace(m).real() / static_cast<double>(m.rows());
    ComplexMatrix out = m;
    if (eps > 0.0)
        for (std::size_t i = 0; i < m.rows(); ++i) out(i, i) += eps;
    return out;
}

EigenPairs dominant_eigvecs(const ComplexMatrix& m, std::size_t d) {
    require_square(m, "dominant_eigvecs");
    const std::size_t n = m.rows();
    if (d < 1 || d > n) throw Error(ErrorCode::InvalidArgument, "dominant_eigvecs: need 1 <= d <= dim");
    if (!m.all_finite()) throw Error(ErrorCode::NonFinite, "dominant_eigvecs: non-finite input");
    if (hermitian_defect(m) > kHermitianTolerance) {
        throw Error(ErrorCode::NotHermitian, "dominant_eigvecs: input is not Hermitian");
    }

    EigenPairs out{ComplexMatrix(n, d), std::vector<double>(d, 0.0), 0};
    const double scale = fro_norm(m);
    const double accept_tol = 1e-8 * scale;
    const double target_tol = 1e-12 * scale;

    ComplexMatrix work = hermitian_part(m);
    for (std::size_t j = 0; j < d; ++j) {
        const double work_norm = fro_norm(work);
        ComplexMatrix x(n, 1);
        double lambda = 0.0;

        // Try basis vectors until one survives orthogonalization against found vectors.
        auto fallback_start = [&]() {
            for (std::size_t b = 0; b < n; ++b) {
                ComplexMatrix e = basis_vector(n, b);
                project_out(e, out.vectors, j);
                const double ne = fro_norm(e);
                if (ne > 1e-8) return e * cplx(1.0 / ne);
            }
            return basis_vector(n, 0);
        };

        if (work_norm <= 1e-14 * scale || scale == 0.0) {
            // Remaining spectrum is numerically zero: any orthogonal unit vector is an eigenvector.
            x = fallback_start();
            lambda = inner(x, m * x).real();
        } else {
            ComplexMatrix op = work * cplx(1.0 / work_norm);
            std::size_t best_col = 0;
            double best_norm = -1.0;
            for (std::size_t c = 0; c < n; ++c) {
                const double cn = fro_norm_sq(work.col(c));
                if (cn > best_norm) {
                    best_norm = cn;
                    best_col = c;
                }
            }
            x = work.col(best_col);
            project_out(x, out.vectors, j);
            if (fro_norm(x) <= 1e-12 * std::sqrt(best_norm)) x = fallback_start();
            x *= cplx(1.0 / fro_norm(x));

            double residual = 0.0;
            bool converged = false;
            std::size_t restarts = 0;
            for (std::size_t it = 0; it < kEigenIterationCap; ++it) {
                ++out.iterations;
                ComplexMatrix y = op * x;
                project_out(y, out.vectors, j);
                const double ny = fro_norm(y);
                if (ny <= 1e-300) {
                    // Iterate orthogonal to the dominant space; restart from another basis vector.
                    ComplexMatrix e = basis_vector(n, restarts++ % n);
                    project_out(e, out.vectors, j);
                    x = e * cplx(1.0 / std::max(fro_norm(e), 1e-300));
                    continue;
                }
                x = y * cplx(1.0 / ny);
                const ComplexMatrix mx = m * x;
                lambda = inner(x, mx).real();
                residual = fro_norm(mx - x * cplx(lambda));
                if (residual <= target_tol) {
                    converged = true;
                    break;
                }
                if (it < 64) {
                    ComplexMatrix sq = hermitian_part(op * op);
                    const double sn = fro_norm(sq);
                    if (sn > 0.0) op = sq * cplx(1.0 / sn);
                }
            }
            if (!converged && residual > accept_tol) {
                throw Error(ErrorCode::NoConvergence, "dominant_eigvecs: iteration cap reached for pair " +
                                                          std::to_string(j));
            }
        }

        fix_phase(x);
        out.vectors.set_col(j, x);
        out.values[j] = lambda;
        work -= mul_adjoint(x, x) * cplx(lambda);
        work = hermitian_part(work);
    }

    // Deflation can leave ties in either order; enforce nonincreasing eigenvalues.
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return out.values[a] > out.values[b]; });
    EigenPairs sorted{ComplexMatrix(n, d), std::vector<double>(d), out.iterations};
    for (std::size_t j = 0; j < d; ++j) {
        sorted.vectors.set_col(j, out.vectors.col(order[j]));
        sorted.values[j] = out.values[order[j]];
    }
    return sorted;
}

ComplexMatrix inv_lower_triangular(const ComplexMatrix& c) {
    require_square(c, "inv_lower_triangular");
    const std::size_t n = c.rows();
    const double scale = std::max(fro_norm(c), 1.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(c(i, j)) > 1e-12 * scale)
                throw Error(ErrorCode::InvalidArgument, "inv_lower_triangular: input has upper-triangular entries");
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(c(i, i)) < kTriangularFloor) {
            throw Error(ErrorCode::SingularTriangular, "inv_lower_triangular: diagonal entry " + std::to_string(i) +
                                                           " below floor");
        }
    }
    ComplexMatrix inv(n, n);
    for (std::size_t col = 0; col < n; ++col) {
        // Solve c x = e_col; x is zero above row col.
        for (std::size_t i = col; i < n; ++i) {
            cplx acc = (i == col) ? cplx(1.0) : cplx(0.0);
            for (std::size_t k = col; k < i; ++k) acc -= c(i, k) * inv(k, col);
            inv(i, col) = acc / c(i, i);
        }
    }
    return inv;
}

ComplexMatrix orthonormalize_columns(const ComplexMatrix& a) {
    const std::size_t n = a.rows();
    const std::size_t d = a.cols();
    if (d > n) throw Error(ErrorCode::ShapeMismatch, "orthonormalize_columns: more columns than rows");
    double max_norm = 0.0;
    for (std::size_t j = 0; j < d; ++j) max_norm = std::max(max_norm, fro_norm(a.col(j)));
    ComplexMatrix q(n, d);
    std::size_t next_basis = 0;
    for (std::size_t j = 0; j < d; ++j) {
        ComplexMatrix v = a.col(j);
        project_out(v, q, j);
        double nv = fro_norm(v);
        if (max_norm == 0.0 || !(nv > 1e-10 * max_norm)) {
            nv = 0.0;
            while (!(nv > 1e-8)) {
                if (next_basis >= n) throw Error(ErrorCode::InvalidArgument, "orthonormalize_columns: basis exhausted");
                v = basis_vector(n, next_basis++);
                project_out(v, q, j);
                nv = fro_norm(v);
            }
        }
        q.set_col(j, v * cplx(1.0 / nv));
    }
    return q;
}

ComplexMatrix normalized(const ComplexMatrix& m) {
    const double n = fro_norm(m);
    if (n == 0.0) return m;
    return m * cplx(1.0 / n);
}

cplx inner(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_same_shape(a, b, "inner");
    cplx acc{};
    const auto ea = a.entries();
    const auto eb = b.entries();
    for (std::size_t i = 0; i < ea.size(); ++i) acc += std::conj(ea[i]) * eb[i];
    return acc;
}

} // namespace uavsec

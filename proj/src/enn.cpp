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
#include "uavsec/enn.hpp"

#include "uavsec/error.hpp"

#include <algorithm>
#include <cmath>

namespace uavsec {

nn::Network make_enn(std::size_t n, std::size_t d, std::uint64_t seed) {
    if (n == 0 || d == 0 || d > n) throw Error(ErrorCode::InvalidArgument, "ENN needs 1 <= d <= n");
    const std::size_t in = 2 * n * n, width = 4 * in;
    nn::Network net;
    net.add(nn::make_dense(in, width)).add(nn::make_tanh());
    net.add(nn::make_dense(width, width)).add(nn::make_tanh());
    net.add(nn::make_dense(width, width)).add(nn::make_tanh());
    net.add(nn::make_dense(width, 2 * n * d));
    net.init(seed);
    return net;
}

void enn_features(const ComplexMatrix& m, std::span<double> out) {
    const std::size_t n = m.rows();
    if (!m.is_square() || out.size() != 2 * n * n) throw Error(ErrorCode::ShapeMismatch, "ENN features: size");
    ComplexMatrix t = hermitian_part(m);
    const cplx shift = trace(t) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) t(i, i) -= shift;
    const double norm = fro_norm(t);
    const double scale = norm > 1e-300 ? 1.0 / norm : 0.0;
    for (std::size_t i = 0; i < n * n; ++i) {
        out[2 * i] = t.entries()[i].real() * scale;
        out[2 * i + 1] = t.entries()[i].imag() * scale;
    }
}

LearnedEigenSolver::LearnedEigenSolver(nn::Network net, std::size_t n, std::size_t d)
    : net_(std::move(net)), n_(n), d_(d) {
    if (n == 0 || d == 0 || d > n) throw Error(ErrorCode::InvalidArgument, "learned eigensolver: need 1 <= d <= n");
}

ComplexMatrix LearnedEigenSolver::dominant(const ComplexMatrix& m, std::size_t d) const {
    if (m.rows() != n_ || !m.is_square() || d > d_)
        throw Error(ErrorCode::ShapeMismatch, "learned eigensolver built for " + std::to_string(n_) + "x" +
                                                  std::to_string(n_) + ", d <= " + std::to_string(d_));
    if (!m.all_finite()) throw Error(ErrorCode::NonFinite, "learned eigensolver: non-finite input");
    nn::Tensor x({1, 2 * n_ * n_});
    enn_features(m, x.data());
    const nn::Tensor y = net_.predict(x);
    ComplexMatrix v(n_, d);
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t i = 0; i < n_; ++i) v(i, j) = cplx(y[2 * (j * n_ + i)], y[2 * (j * n_ + i) + 1]);
    if (fro_norm(v) == 0.0 || !v.all_finite()) {
        ComplexMatrix e(n_, d);
        for (std::size_t j = 0; j < d; ++j) e(j, j) = 1.0;
        return e;
    }
    return orthonormalize_columns(v);
}

ComplexMatrix random_psd(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> n01(0.0, 1.0);
    ComplexMatrix a(n, n);
    for (auto& z : a.entries()) z = cplx(n01(rng), n01(rng)) / std::sqrt(2.0);
    return hermitian_part(a.adjoint() * a);
}

EnnTrainReport pretrain_enn(nn::Network& net, std::size_t n, std::size_t d, const EnnTrainConfig& cfg) {
    if (cfg.batch == 0) throw Error(ErrorCode::InvalidArgument, "ENN pre-training: batch must be positive");
    std::mt19937_64 rng(cfg.seed);
    nn::AdamState adam;
    nn::AdamConfig acfg;
    acfg.lr = cfg.lr;
    const std::size_t in = 2 * n * n, out = 2 * n * d;
    EnnTrainReport report;
    for (std::size_t step = 0; step < cfg.steps; ++step) {
        nn::Tensor x({cfg.batch, in});
        std::vector<ComplexMatrix> targets;
        targets.reserve(cfg.batch);
        for (std::size_t b = 0; b < cfg.batch; ++b) {
            const ComplexMatrix m = random_psd(n, rng);
            enn_features(m, x.data().subspan(b * in, in));
            targets.push_back(dominant_eigvecs(m, d).vectors);
        }
        nn::ForwardCache cache;
        const nn::Tensor y = net.forward(x, nn::Mode::Train, &cache);
        nn::Tensor g(y.shape());
        double loss = 0.0;
        for (std::size_t b = 0; b < cfg.batch; ++b) {
            for (std::size_t j = 0; j < d; ++j) {
                const double* v = &y[b * out + 2 * j * n];
                double* gv = &g[b * out + 2 * j * n];
                cplx p = 0.0;
                double s = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const cplx vi(v[2 * i], v[2 * i + 1]);
                    p += std::conj(targets[b](i, j)) * vi;
                    s += std::norm(vi);
                }
                s = std::max(s, 1e-12);
                const double q = std::norm(p);
                loss += 1.0 - q / s;
                // d/dv of -|uᴴv|²/‖v‖², written on the stacked (re, im) components.
                const double w = 1.0 / (static_cast<double>(cfg.batch * d));
                for (std::size_t i = 0; i < n; ++i) {
                    const cplx pv = targets[b](i, j) * p;
                    const cplx vi(v[2 * i], v[2 * i + 1]);
                    const cplx grad = -2.0 * (pv * s - q * vi) / (s * s) * w;
                    gv[2 * i] = grad.real();
                    gv[2 * i + 1] = grad.imag();
                }
            }
        }
        acfg.lr = cfg.lr * std::pow(cfg.final_lr_fraction, static_cast<double>(step) / static_cast<double>(cfg.steps));
        nn::adam_step(net, net.backward(cache, g), adam, acfg);
        report.final_loss = loss / static_cast<double>(cfg.batch * d);
        ++report.steps;
    }
    return report;
}

EnnFidelity enn_fidelity(const EigenSolver& solver, std::size_t n, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    EnnFidelity f;
    for (std::size_t c = 0; c < count; ++c) {
        const ComplexMatrix m = random_psd(n, rng);
        const ComplexMatrix u = dominant_eigvecs(m, 1).vectors;
        const ComplexMatrix v = solver.dominant(m, 1);
        const double overlap = std::min(1.0, std::abs(inner(u, v)));
        const double angle = std::acos(overlap);
        f.mean_angle += angle;
        f.max_angle = std::max(f.max_angle, angle);
        ++f.count;
    }
    if (f.count > 0) f.mean_angle /= static_cast<double>(f.count);
    return f;
}

} // namespace uavsec

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
#include "uavsec/hnet.hpp"

#include "uavsec/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace uavsec {

ComplexMatrix ExactEigenSolver::dominant(const ComplexMatrix& m, std::size_t d) const {
    return dominant_eigvecs(m, d).vectors;
}

HNetParams HNetParams::defaults(std::size_t num_blocks) {
    HNetParams p;
    p.num_blocks = num_blocks;
    p.beta.assign(num_blocks, 1.0);
    p.alpha.assign(num_blocks, 0.5);
    return p;
}

void HNetParams::validate() const {
    if (num_blocks < 1) throw Error(ErrorCode::InvalidConfig, "HNet needs at least one block");
    if (beta.size() != num_blocks || alpha.size() != num_blocks) {
        throw Error(ErrorCode::InvalidConfig, "HNet beta/alpha must have one entry per block");
    }
    for (double b : beta)
        if (!(b >= kBetaMin && b <= kBetaMax)) throw Error(ErrorCode::InvalidConfig, "HNet beta out of range");
    for (double a : alpha)
        if (!(a >= kAlphaMin && a <= kAlphaMax)) throw Error(ErrorCode::InvalidConfig, "HNet alpha out of range");
    if (eig_mode == EigMode::Learned && !learned) {
        throw Error(ErrorCode::InvalidConfig, "learned eigen mode requires an ENN solver");
    }
}

void HNetParams::project() {
    for (double& b : beta) b = std::clamp(b, kBetaMin, kBetaMax);
    for (double& a : alpha) a = std::clamp(a, kAlphaMin, kAlphaMax);
}

void update_aux(const ChannelSet& ch, BeamformingSolution& sol, const SystemConstants& c) {
    const RateReport r = compute_rates(ch, sol, c);
    sol.zeta = r.sinr_private;
    sol.zeta_eave = r.sinr_eave;
    sol.ups_c = r.sinr_common;
    sol.ups_ci = r.sinr_eave_common;
}

namespace {

ComplexMatrix outer(const ComplexMatrix& x) { return mul_adjoint(x, x); }

void check_aux(const BeamformingSolution& sol, const SystemConstants& c) {
    if (sol.zeta.size() != c.num_users || sol.ups_c.size() != c.num_users ||
        sol.ups_ci.size() != c.num_uavs * c.num_eaves || sol.zeta_eave.size() != c.num_users * c.num_eaves) {
        throw Error(ErrorCode::ShapeMismatch, "auxiliary variables are not shaped for the constants");
    }
}

} // namespace

GramSet build_grams(const ChannelSet& ch, const BeamformingSolution& sol, const SystemConstants& c) {
    check_shapes(ch, sol, c);
    check_aux(sol, c);
    const std::size_t U = c.num_uavs, K = c.num_users, I = c.num_eaves, N = c.rx_antennas;
    const double share = static_cast<double>(c.streams) / static_cast<double>(N);
    const ComplexMatrix noise_user = ComplexMatrix::identity(N) * cplx(share * c.noise_user_w);
    const ComplexMatrix noise_eave = ComplexMatrix::identity(N) * cplx(share * c.noise_eave_w);

    GramSet g;
    g.m1.reserve(K);
    g.m2.reserve(K);
    g.m5.reserve(K);
    g.m6.reserve(K);
    for (std::size_t k = 0; k < K; ++k) {
        ComplexMatrix others = noise_user;
        for (std::size_t j = 0; j < K; ++j)
            if (j != k) others += outer(ch.to_user(ch.serving_uav[j], k) * sol.priv[j]);
        const std::size_t u = ch.serving_uav[k];
        const ComplexMatrix own = outer(ch.to_user(u, k) * sol.priv[k]);
        g.m1.push_back(hermitian_part((others + own) * cplx(sol.ups_c[k])));
        g.m2.push_back(hermitian_part(outer(ch.to_user(u, k) * sol.common[u])));
        g.m5.push_back(hermitian_part(others * cplx(sol.zeta[k])));
        g.m6.push_back(hermitian_part(own));
    }
    g.m3.reserve(U * I);
    g.m4.reserve(U * I);
    std::vector<ComplexMatrix> interference(I, noise_eave);
    for (std::size_t i = 0; i < I; ++i)
        for (std::size_t j = 0; j < K; ++j) interference[i] += outer(ch.to_eave(ch.serving_uav[j], i) * sol.priv[j]);
    for (std::size_t u = 0; u < U; ++u) {
        for (std::size_t i = 0; i < I; ++i) {
            g.m3.push_back(hermitian_part(interference[i] * cplx(sol.ups_ci[u * I + i])));
            g.m4.push_back(hermitian_part(outer(ch.to_eave(u, i) * sol.common[u])));
        }
    }
    return g;
}

ComplexMatrix whitened_term(const ComplexMatrix& m_odd, const ComplexMatrix& m_even, const ComplexMatrix& h,
                            std::size_t d, const EigenSolver& eig) {
    const std::size_t n = m_odd.rows();
    if (m_even.rows() != n || h.rows() != n) throw Error(ErrorCode::ShapeMismatch, "whitened_term: dimensions");
    ComplexMatrix zero(h.cols(), d);
    const double even_scale = fro_norm(m_even);
    if (even_scale == 0.0 || fro_norm(h) == 0.0) return zero;

    // Both Grams are rescaled first; eigenvectors and the Cholesky direction do not
    // depend on positive scale, and the floors in the kernel are relative.
    const double tr = trace(m_odd).real();
    const ComplexMatrix a = tr > 0.0 ? m_odd * cplx(static_cast<double>(n) / tr) : ComplexMatrix::identity(n);
    const ComplexMatrix l_inv = inv_lower_triangular(cholesky(regularized(hermitian_part(a))));
    const ComplexMatrix w = hermitian_part(l_inv * (m_even * cplx(1.0 / even_scale)) * l_inv.adjoint());
    const ComplexMatrix x = l_inv.adjoint() * eig.dominant(w, d);
    const ComplexMatrix lifted = h.adjoint() * x;
    if (fro_norm(lifted) == 0.0) return zero;
    return normalized(orthonormalize_columns(lifted));
}

CommonDirection closed_form_wc(const ComplexMatrix& m1, const ComplexMatrix& m2, const ComplexMatrix& m3,
                               const ComplexMatrix& m4, const ComplexMatrix& h_user, const ComplexMatrix& h_eave,
                               std::size_t d, const EigenSolver& eig) {
    CommonDirection out;
    out.first_term = whitened_term(m1, m2, h_user, d, eig);
    ComplexMatrix diff = out.first_term;
    if (!m3.empty()) {
        // Eigenvector phases are arbitrary, so the eavesdropper term enters with its
        // least-squares coefficient: diff = A − B·B⁺A, the part of A orthogonal to B.
        const ComplexMatrix b = whitened_term(m3, m4, h_eave, d, eig);
        if (fro_norm(b) > 0.0) {
            const ComplexMatrix q = orthonormalize_columns(b);
            diff -= q * (q.adjoint() * diff);
        }
    }
    if (fro_norm(diff) < kCancellationFloor) {
        out.cancelled = true;
        out.direction = ComplexMatrix(diff.rows(), diff.cols());
    } else {
        out.direction = normalized(diff);
    }
    return out;
}

ComplexMatrix closed_form_wk(const ComplexMatrix& m5, const ComplexMatrix& m6, const ComplexMatrix& h,
                             std::size_t d, const EigenSolver& eig) {
    return whitened_term(m5, m6, h, d, eig);
}

std::vector<double> allocate_common(const RateReport& report, const std::vector<std::vector<std::size_t>>& served) {
    std::vector<double> alloc(report.num_users, 0.0);
    for (std::size_t u = 0; u < served.size(); ++u) {
        if (served[u].empty()) continue;
        // Same expression as the secrecy-budget residual, so the comparison below is exact.
        const double budget = std::max(0.0, report.common_rate[u] - report.eave_common_rate[u]);
        double share = budget / static_cast<double>(served[u].size());
        auto total = [&] {
            double s = 0.0;
            for (std::size_t n = 0; n < served[u].size(); ++n) s += share;
            return s;
        };
        while (total() > budget) share = std::nextafter(share, 0.0);
        for (std::size_t k : served[u]) alloc[k] = share;
    }
    return alloc;
}

namespace {

// Rounding can leave a UAV's power a few ulps above the budget; shrink until it is not.
// Sums in the same order as link_gains.
void fit_budget(BeamformingSolution& sol, std::size_t u, const std::vector<std::size_t>& served, double power_w) {
    auto total = [&] {
        double t = fro_norm_sq(sol.common[u]);
        for (std::size_t k : served) t += fro_norm_sq(sol.priv[k]);
        return t;
    };
    const double t = total();
    if (!(t > power_w)) return;
    const cplx scale(std::sqrt(power_w / t));
    sol.common[u] *= scale;
    for (std::size_t k : served) sol.priv[k] *= scale;
    const cplx shrink(1.0 - 4.0 * std::numeric_limits<double>::epsilon());
    while (total() > power_w) {
        sol.common[u] *= shrink;
        for (std::size_t k : served) sol.priv[k] *= shrink;
    }
}

} // namespace

void project_power(BeamformingSolution& sol, const std::vector<std::vector<std::size_t>>& served, double power_w,
                   double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::InvalidArgument, "project_power: alpha outside [0, 1]");
    if (served.size() != sol.common.size()) throw Error(ErrorCode::ShapeMismatch, "project_power: UAV count");
    for (std::size_t u = 0; u < served.size(); ++u) {
        if (served[u].empty()) {
            sol.common[u] *= cplx(0.0);
            continue;
        }
        sol.common[u] = normalized(sol.common[u]) * cplx(std::sqrt(alpha * power_w));
        const double each = (1.0 - alpha) * power_w / static_cast<double>(served[u].size());
        for (std::size_t k : served[u]) sol.priv[k] = normalized(sol.priv[k]) * cplx(std::sqrt(each));
        fit_budget(sol, u, served[u], power_w);
    }
}

RateReport enforce_common_secrecy(const ChannelSet& ch, BeamformingSolution& sol, const SystemConstants& c) {
    RateReport r = compute_rates(ch, sol, c);
    // Dropping one common beam adds private power and can move another UAV's
    // budget, so repeat until stable; each pass switches off at least one beam.
    for (std::size_t pass = 0; pass <= c.num_uavs; ++pass) {
        bool changed = false;
        for (std::size_t u = 0; u < c.num_uavs; ++u) {
            const auto& served = ch.served_users[u];
            if (served.empty() || fro_norm(sol.common[u]) == 0.0) continue;
            if (r.common_rate[u] - r.eave_common_rate[u] >= 0.0) continue;
            double before = fro_norm_sq(sol.common[u]);
            for (std::size_t k : served) before += fro_norm_sq(sol.priv[k]);
            const double freed = fro_norm_sq(sol.common[u]) / static_cast<double>(served.size());
            for (std::size_t k : served) {
                const double p = fro_norm_sq(sol.priv[k]);
                if (p > 0.0) sol.priv[k] *= cplx(std::sqrt((p + freed) / p));
            }
            sol.common[u] *= cplx(0.0);
            if (before <= c.power_w) fit_budget(sol, u, served, c.power_w);
            changed = true;
        }
        if (!changed) break;
        r = compute_rates(ch, sol, c);
    }
    return r;
}

BeamformingSolution mrt_init(const ChannelSet& ch, const SystemConstants& c) {
    BeamformingSolution sol = BeamformingSolution::zeros(c);
    const std::size_t d = c.streams;
    for (std::size_t k = 0; k < c.num_users; ++k) {
        const ComplexMatrix& h = ch.to_user(ch.serving_uav[k], k);
        sol.priv[k] = normalized(dominant_eigvecs(hermitian_part(h.adjoint() * h), d).vectors);
    }
    for (std::size_t u = 0; u < c.num_uavs; ++u) {
        ComplexMatrix s(c.tx_antennas, c.tx_antennas);
        for (std::size_t k : ch.served_users[u]) {
            const ComplexMatrix& h = ch.to_user(u, k);
            const double e = fro_norm_sq(h);
            if (e > 0.0) s += h.adjoint() * h * cplx(1.0 / e);
        }
        sol.common[u] = normalized(dominant_eigvecs(hermitian_part(s), d).vectors);
    }
    project_power(sol, ch.served_users, c.power_w, 0.5);
    update_aux(ch, sol, c);
    sol.alloc = allocate_common(compute_rates(ch, sol, c), ch.served_users);
    return sol;
}

namespace {

// β·new + (1 − β)·old with old rotated onto new's phase, renormalized.
ComplexMatrix damped(const ComplexMatrix& old_beam, const ComplexMatrix& new_dir, double beta) {
    if (beta >= 1.0) return new_dir;
    ComplexMatrix old_dir = normalized(old_beam);
    const cplx overlap = inner(old_dir, new_dir);
    if (std::abs(overlap) > 0.0) old_dir *= overlap / std::abs(overlap);
    ComplexMatrix mix = new_dir * cplx(beta) + old_dir * cplx(1.0 - beta);
    if (fro_norm(mix) == 0.0) return new_dir;
    return normalized(mix);
}

} // namespace

BeamformingSolution hnet_forward(const ChannelSet& ch, const HNetParams& params, const SystemConstants& c) {
    params.validate();
    const ExactEigenSolver exact;
    const EigenSolver& eig = params.eig_mode == EigMode::Learned ? *params.learned : exact;
    const std::size_t K = c.num_users, I = c.num_eaves, d = c.streams;

    BeamformingSolution sol = mrt_init(ch, c);
    for (std::size_t b = 0; b < params.num_blocks; ++b) {
        update_aux(ch, sol, c);
        const GramSet g = build_grams(ch, sol, c);
        BeamformingSolution next = sol;
        for (std::size_t u = 0; u < c.num_uavs; ++u) {
            const auto& served = ch.served_users[u];
            if (served.empty()) continue;
            std::size_t kb = served.front();
            for (std::size_t k : served)
                if (sol.ups_c[k] < sol.ups_c[kb]) kb = k;
            CommonDirection cd;
            if (I > 0) {
                std::size_t ib = 0;
                for (std::size_t i = 1; i < I; ++i)
                    if (sol.ups_ci[u * I + i] > sol.ups_ci[u * I + ib]) ib = i;
                cd = closed_form_wc(g.m1[kb], g.m2[kb], g.m3[u * I + ib], g.m4[u * I + ib], ch.to_user(u, kb),
                                    ch.to_eave(u, ib), d, eig);
            } else {
                cd = closed_form_wc(g.m1[kb], g.m2[kb], {}, {}, ch.to_user(u, kb), {}, d, eig);
            }
            const ComplexMatrix& dir = cd.cancelled ? cd.first_term : cd.direction;
            if (fro_norm(dir) > 0.0) next.common[u] = damped(sol.common[u], dir, params.beta[b]);
        }
        for (std::size_t k = 0; k < K; ++k) {
            const ComplexMatrix dir = closed_form_wk(g.m5[k], g.m6[k], ch.to_user(ch.serving_uav[k], k), d, eig);
            if (fro_norm(dir) > 0.0) next.priv[k] = damped(sol.priv[k], dir, params.beta[b]);
        }
        project_power(next, ch.served_users, c.power_w, params.alpha[b]);
        next.alloc = allocate_common(enforce_common_secrecy(ch, next, c), ch.served_users);
        sol = std::move(next);
    }
    return sol;
}

double KktResiduals::max() const noexcept { return std::max({allocation, common_aux, eave_aux, private_aux}); }

namespace {

double trace_defect(const ComplexMatrix& odd, const ComplexMatrix& even) {
    const double scale = fro_norm(odd) + fro_norm(even);
    if (scale == 0.0) return 0.0;
    return std::abs(trace(odd - even).real()) / scale;
}

} // namespace

KktResiduals kkt_residuals(const ChannelSet& ch, const BeamformingSolution& sol, const SystemConstants& c) {
    const GramSet g = build_grams(ch, sol, c);
    const std::size_t I = c.num_eaves;
    KktResiduals r;
    for (std::size_t k = 0; k < c.num_users; ++k) {
        r.common_aux = std::max(r.common_aux, trace_defect(g.m1[k], g.m2[k]));
        r.private_aux = std::max(r.private_aux, trace_defect(g.m5[k], g.m6[k]));
    }
    for (std::size_t n = 0; n < g.m3.size(); ++n) r.eave_aux = std::max(r.eave_aux, trace_defect(g.m3[n], g.m4[n]));
    for (std::size_t u = 0; u < c.num_uavs; ++u) {
        const auto& served = ch.served_users[u];
        if (served.empty()) continue;
        double ups_c = std::numeric_limits<double>::infinity();
        double sum = 0.0;
        for (std::size_t k : served) {
            ups_c = std::min(ups_c, sol.ups_c[k]);
            sum += sol.alloc[k];
        }
        double ups_ci = 0.0;
        for (std::size_t i = 0; i < I; ++i) ups_ci = std::max(ups_ci, sol.ups_ci[u * I + i]);
        const double budget = std::max(0.0, std::log2(1.0 + ups_c) - std::log2(1.0 + ups_ci));
        r.allocation = std::max(r.allocation, std::abs(sum - budget));
    }
    return r;
}

} // namespace uavsec

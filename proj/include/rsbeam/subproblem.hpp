// SPDX-License-Identifier: Apache-2.0
//
// rsbeam - rate-splitting multibeam satellite beamforming simulator
// Copyright (C) 2026 the rsbeam authors
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
//
// The per-iteration precoder update of the alternating optimizer: with
// equalizers and weights frozen into SAF aggregates, maximizing the worst
// beam rate is a convex QCQP. Each average-WMSE constraint
//
//   1 - [ sum_j p_j' Psi p_j (+ p_c' Psi p_c) + sigma^2 t
//         - 2 Re{f' p_target} + u - v ]  >=  rate epigraph
//
// is embedded as a second-order cone through eigenvalue factorizations of
// the (PSD) Psi aggregates, alongside the linear common-rate-split rows and
// the per-feed power cones. The optimizer runs in natural-log rate units,
// where the closed-form weight update is the exact block minimizer (so the
// outer objective is monotone); results convert to bits at the interface.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rsbeam/config.hpp"
#include "rsbeam/geometry.hpp"
#include "rsbeam/rates.hpp"
#include "rsbeam/socp.hpp"
#include "rsbeam/wmmse.hpp"

namespace rsbeam {

struct subproblem_spec
{
    socp::problem prob;
    precoding_mode mode = precoding_mode::rs;
    // true when the common-stream aggregates are exactly zero (equalizers
    // saw no common power): the common rows degenerate to sum(C) <= 0, so
    // the common column and split are pinned to zero structurally
    bool collapsed_common = false;
    int n_feeds = 0;
    int n_beams = 0;
    int n_users = 0;
    double sigma2 = 1.0;
    double per_feed_power = 0.0;
    std::vector<int> beam_of_user;

    // variable layout: precoder columns (common first when active), then
    // common-rate portions, then beam epigraphs, then the objective
    int n_precoder_cols = 0; // M+1 with an active common column, M otherwise
    int off_cbar = -1;
    int off_rbar = -1;
    int idx_rg = -1;

    // constraint family count (worst-beam + private + common + split + power)
    int constraint_rows = 0;

    bool common_active() const { return off_cbar >= 0; }
    int col_offset(int col) const { return 2 * n_feeds * col; }
    int private_col(int beam) const { return common_active() ? beam + 1 : beam; }
};

namespace detail {

// complex PSD factor L with Psi = L L^H; eigenvalues below -1e-9 signal a
// broken aggregate upstream, tiny negatives are clipped to zero
inline Eigen::MatrixXcd psd_factor(const Eigen::MatrixXcd& psi)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(psi);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("psd_factor: eigendecomposition failed");
    const Eigen::VectorXd& vals = eig.eigenvalues();
    if (vals.minCoeff() < -1e-9)
        throw std::runtime_error("psd_factor: Psi aggregate is not positive semidefinite");
    const double cutoff = std::max(vals.maxCoeff(), 0.0) * 1e-14;
    std::vector<int> keep;
    for (int i = 0; i < vals.size(); ++i)
        if (vals(i) > cutoff)
            keep.push_back(i);
    Eigen::MatrixXcd l(psi.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c)
        l.col(static_cast<Eigen::Index>(c)) =
            eig.eigenvectors().col(keep[c]) * std::sqrt(vals(keep[c]));
    return l;
}

// writes the real embedding of rows Re/Im(L^H p_col) into G with weight -2
// starting at `row`, returns the number of rows written
inline int emit_factor_rows(Eigen::MatrixXd& g, int row, const Eigen::MatrixXcd& l, int col_off, int n_feeds)
{
    const int r = static_cast<int>(l.cols());
    const Eigen::MatrixXd lr = l.real();
    const Eigen::MatrixXd li = l.imag();
    // L^H p = (Lr' a + Li' b) + i (Lr' b - Li' a) for p = a + i b
    g.block(row, col_off, r, n_feeds) = -2.0 * lr.transpose();
    g.block(row, col_off + n_feeds, r, n_feeds) = -2.0 * li.transpose();
    g.block(row + r, col_off, r, n_feeds) = 2.0 * li.transpose();
    g.block(row + r, col_off + n_feeds, r, n_feeds) = -2.0 * lr.transpose();
    return 2 * r;
}

// adds the gradient of 2 Re{f^H p_col} into a row vector
inline void add_linear_coupling(Eigen::RowVectorXd& row, const Eigen::VectorXcd& f, int col_off, int n_feeds)
{
    row.segment(col_off, n_feeds) += 2.0 * f.real().transpose();
    row.segment(col_off + n_feeds, n_feeds) += 2.0 * f.imag().transpose();
}

} // namespace detail

/// Encodes the convex precoder-update problem from the SAF aggregates.
/// In NoRS mode the common column and the common-rate rows are dropped
/// entirely (the p_c = 0, C = 0 special case).
inline subproblem_spec build_subproblem(const saf_coefficients& saf, const geometry& geom,
                                        const system_config& cfg, precoding_mode mode)
{
    const int n_t = saf.n_feeds();
    const int m = geom.n_beams();
    const int k_total = saf.n_users();

    bool collapsed = false;
    if (mode == precoding_mode::rs)
    {
        // exact signature of equalizers that saw no common power:
        // g_c = 0 -> t = 0, f = 0, Psi = 0, u = 1, v = 0 for every user
        collapsed = true;
        for (int k = 0; k < k_total && collapsed; ++k)
            if (saf.t_c(k) != 0.0 || saf.u_c(k) != 1.0 || saf.v_c(k) != 0.0 ||
                saf.f_c.col(k).norm() != 0.0 || saf.psi_c[static_cast<std::size_t>(k)].norm() != 0.0)
                collapsed = false;
    }
    const bool rs = mode == precoding_mode::rs && !collapsed;

    subproblem_spec sp;
    sp.mode = mode;
    sp.collapsed_common = collapsed;
    sp.n_feeds = n_t;
    sp.n_beams = m;
    sp.n_users = k_total;
    sp.sigma2 = cfg.noise_variance;
    sp.per_feed_power = cfg.per_feed_power();
    sp.beam_of_user = geom.beam_of_user;
    sp.n_precoder_cols = rs ? m + 1 : m;
    sp.constraint_rows = rs ? (m + k_total + k_total + m + n_t) : (m + k_total + n_t);

    const int n_prec_vars = 2 * n_t * sp.n_precoder_cols;
    sp.off_cbar = rs ? n_prec_vars : -1;
    sp.off_rbar = n_prec_vars + (rs ? m : 0);
    sp.idx_rg = sp.off_rbar + m;
    const int n_vars = sp.idx_rg + 1;

    // factorize the quadratic aggregates once
    std::vector<Eigen::MatrixXcd> lp_fact(static_cast<std::size_t>(k_total));
    std::vector<Eigen::MatrixXcd> lc_fact;
    for (int k = 0; k < k_total; ++k)
        lp_fact[static_cast<std::size_t>(k)] = detail::psd_factor(saf.psi_p[static_cast<std::size_t>(k)]);
    if (rs)
    {
        lc_fact.resize(static_cast<std::size_t>(k_total));
        for (int k = 0; k < k_total; ++k)
            lc_fact[static_cast<std::size_t>(k)] = detail::psd_factor(saf.psi_c[static_cast<std::size_t>(k)]);
    }

    // row counting
    const int lp_rows = rs ? 2 * m : m;
    int soc_rows = n_t * (2 * sp.n_precoder_cols + 1);
    for (int k = 0; k < k_total; ++k)
        soc_rows += 2 + 2 * static_cast<int>(lp_fact[static_cast<std::size_t>(k)].cols()) * m;
    if (rs)
        for (int k = 0; k < k_total; ++k)
            soc_rows += 2 + 2 * static_cast<int>(lc_fact[static_cast<std::size_t>(k)].cols()) * (m + 1);

    socp::problem& p = sp.prob;
    p.c = Eigen::VectorXd::Zero(n_vars);
    p.c(sp.idx_rg) = -1.0; // maximize the worst beam rate
    p.G = Eigen::MatrixXd::Zero(lp_rows + soc_rows, n_vars);
    p.h = Eigen::VectorXd::Zero(lp_rows + soc_rows);
    p.cones.nonneg = lp_rows;

    int row = 0;
    // worst-beam epigraph: r_g - C_m - r_m <= 0
    for (int b = 0; b < m; ++b, ++row)
    {
        p.G(row, sp.idx_rg) = 1.0;
        p.G(row, sp.off_rbar + b) = -1.0;
        if (rs)
            p.G(row, sp.off_cbar + b) = -1.0;
    }
    // nonnegative common-rate portions
    if (rs)
        for (int b = 0; b < m; ++b, ++row)
            p.G(row, sp.off_cbar + b) = -1.0;

    // private-stream rate cones: sum_j p_j' Psi p_j <= w(x),
    // w = 1 - sigma^2 t - u + v_nat - r_m + 2 Re{f^H p_own}
    for (int k = 0; k < k_total; ++k)
    {
        const int beam = geom.beam_of_user[static_cast<std::size_t>(k)];
        const Eigen::MatrixXcd& l = lp_fact[static_cast<std::size_t>(k)];
        const double w0 = 1.0 - sp.sigma2 * saf.t_p(k) - saf.u_p(k) + saf.v_p(k) * k_ln2;
        Eigen::RowVectorXd w1 = Eigen::RowVectorXd::Zero(n_vars);
        w1(sp.off_rbar + beam) = -1.0;
        detail::add_linear_coupling(w1, saf.f_p.col(k), sp.col_offset(sp.private_col(beam)), n_t);

        p.G.row(row) = -w1;
        p.h(row) = 1.0 + w0;
        int mid = row + 1;
        for (int j = 0; j < m; ++j)
            mid += detail::emit_factor_rows(p.G, mid, l, sp.col_offset(sp.private_col(j)), n_t);
        p.G.row(mid) = -w1;
        p.h(mid) = w0 - 1.0;
        p.cones.soc.push_back(mid + 1 - row);
        row = mid + 1;
    }

    // common-stream cones (RS): p_c' Psi p_c + sum_j p_j' Psi p_j <= w(x),
    // w = 1 - sigma^2 t - u + v_nat - sum_m C_m + 2 Re{f^H p_c}
    if (rs)
        for (int k = 0; k < k_total; ++k)
        {
            const Eigen::MatrixXcd& l = lc_fact[static_cast<std::size_t>(k)];
            const double w0 = 1.0 - sp.sigma2 * saf.t_c(k) - saf.u_c(k) + saf.v_c(k) * k_ln2;
            Eigen::RowVectorXd w1 = Eigen::RowVectorXd::Zero(n_vars);
            for (int b = 0; b < m; ++b)
                w1(sp.off_cbar + b) = -1.0;
            detail::add_linear_coupling(w1, saf.f_c.col(k), sp.col_offset(0), n_t);

            p.G.row(row) = -w1;
            p.h(row) = 1.0 + w0;
            int mid = row + 1;
            for (int j = 0; j <= m; ++j)
                mid += detail::emit_factor_rows(p.G, mid, l, sp.col_offset(j), n_t);
            p.G.row(mid) = -w1;
            p.h(mid) = w0 - 1.0;
            p.cones.soc.push_back(mid + 1 - row);
            row = mid + 1;
        }

    // per-feed power cones: || feed-n row across all columns || <= sqrt(P/N_t)
    for (int n = 0; n < n_t; ++n)
    {
        p.h(row) = std::sqrt(sp.per_feed_power);
        int r = row + 1;
        for (int j = 0; j < sp.n_precoder_cols; ++j)
        {
            p.G(r++, sp.col_offset(j) + n) = -1.0;
            p.G(r++, sp.col_offset(j) + n_t + n) = -1.0;
        }
        p.cones.soc.push_back(r - row);
        row = r;
    }

    if (row != p.G.rows())
        throw std::logic_error("build_subproblem: row bookkeeping mismatch");
    return sp;
}

/// One precoder-update solution, converted back to bits.
struct subproblem_result
{
    precoder_matrix precoders;
    common_rate_split split;       // bits/s/Hz
    double objective_bits = 0.0;   // worst beam rate bound r_g
    Eigen::VectorXd rbar_bits;     // per-beam epigraph values
    socp::solve_status status = socp::solve_status::numerical_failure;
    socp::solution raw;

    bool usable() const { return raw.usable(); }
};

inline subproblem_result solve_subproblem(const subproblem_spec& sp, const socp::settings& opts = {})
{
    subproblem_result out;
    out.raw = socp::solve(sp.prob, opts);
    out.status = out.raw.status;

    const bool rs = sp.common_active();
    out.precoders = precoder_matrix::zero(sp.n_feeds, sp.n_beams, sp.mode);
    out.split = common_rate_split::zero(sp.n_beams);
    out.rbar_bits = Eigen::VectorXd::Zero(sp.n_beams);
    if (!out.raw.usable())
        return out;

    const Eigen::VectorXd& x = out.raw.x;
    auto column = [&](int col) {
        Eigen::VectorXcd v(sp.n_feeds);
        for (int n = 0; n < sp.n_feeds; ++n)
            v(n) = std::complex<double>(x(sp.col_offset(col) + n), x(sp.col_offset(col) + sp.n_feeds + n));
        return v;
    };
    if (rs)
        out.precoders.common = column(0);
    for (int b = 0; b < sp.n_beams; ++b)
        out.precoders.privates.col(b) = column(sp.private_col(b));
    if (rs)
        for (int b = 0; b < sp.n_beams; ++b)
            out.split.portions(b) = std::max(0.0, x(sp.off_cbar + b)) / k_ln2;
    for (int b = 0; b < sp.n_beams; ++b)
        out.rbar_bits(b) = x(sp.off_rbar + b) / k_ln2;
    out.objective_bits = x(sp.idx_rg) / k_ln2;
    return out;
}

/// Re-evaluates every constraint family of the precoder-update problem by
/// direct arithmetic on the SAF aggregates (independent of the cone
/// embedding) and returns the worst violation. Rate rows are in nats,
/// power rows in Watts.
inline double subproblem_violation(const saf_coefficients& saf, const geometry& geom, const system_config& cfg,
                                   const subproblem_result& res)
{
    const bool rs = res.precoders.mode == precoding_mode::rs;
    const int m = geom.n_beams();
    const double rg = res.objective_bits * k_ln2;
    double worst = -std::numeric_limits<double>::infinity();

    for (int b = 0; b < m; ++b)
    {
        const double cbar = rs ? res.split.portions(b) * k_ln2 : 0.0;
        worst = std::max(worst, rg - cbar - res.rbar_bits(b) * k_ln2);
        if (rs)
            worst = std::max(worst, -res.split.portions(b) * k_ln2);
    }
    for (int k = 0; k < saf.n_users(); ++k)
    {
        const int beam = geom.beam_of_user[static_cast<std::size_t>(k)];
        const double xi_p = saf_wmse_private(saf, res.precoders, k, beam, cfg.noise_variance, true);
        worst = std::max(worst, res.rbar_bits(beam) * k_ln2 - (1.0 - xi_p));
        if (rs)
        {
            const double xi_c = saf_wmse_common(saf, res.precoders, k, cfg.noise_variance, true);
            worst = std::max(worst, res.split.total() * k_ln2 - (1.0 - xi_c));
        }
    }
    const power_check pc = check_power(res.precoders, cfg, 0.0);
    worst = std::max(worst, -pc.slack.minCoeff());
    return worst;
}

} // namespace rsbeam

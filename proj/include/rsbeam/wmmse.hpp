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

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rsbeam/channel.hpp"
#include "rsbeam/geometry.hpp"
#include "rsbeam/rates.hpp"

namespace rsbeam {

constexpr double k_ln2 = 0.6931471805599453;

/// Weights are inverse MMSEs; this cap guards the SAF conditioning against
/// near-zero MSEs at extreme SNR.
constexpr double k_weight_cap = 1e12;

/// Receive powers, interference portions and MSEs for one user under one
/// channel. T_c counts every stream plus noise; T excludes the common
/// stream (removed by SIC). I_c = T and I = T - |h^H p_own|^2 by
/// construction.
struct mse_breakdown
{
    double t_c = 0.0, t_p = 0.0; // receive powers T_c,k and T_k
    double i_c = 0.0, i_p = 0.0; // interference portions I_c,k and I_k
    double eps_c = 0.0, eps_p = 0.0;
};

/// MMSE equalizers g_c = p_c^H h / T_c and g = p_own^H h / T.
inline std::pair<std::complex<double>, std::complex<double>> mmse_equalizers(const Eigen::VectorXcd& h,
                                                                             const precoder_matrix& prec,
                                                                             int own_beam, double sigma2)
{
    if (!(sigma2 > 0.0))
        throw std::invalid_argument("mmse_equalizers: noise variance must be positive");
    double t_p = sigma2;
    for (int j = 0; j < prec.n_beams(); ++j)
        t_p += std::norm(h.dot(prec.privates.col(j)));
    const double t_c = t_p + std::norm(h.dot(prec.common));
    const std::complex<double> g_c = std::conj(h.dot(prec.common)) / t_c;
    const std::complex<double> g_p = std::conj(h.dot(prec.privates.col(own_beam))) / t_p;
    return {g_c, g_p};
}

/// MSEs for arbitrary scalar equalizers:
/// eps = |g|^2 T - 2 Re{g h^H p} + 1 (unit symbol power). At the MMSE
/// equalizers this reduces to eps = I / T.
inline mse_breakdown mse_values(const Eigen::VectorXcd& h, const precoder_matrix& prec, int own_beam,
                                std::complex<double> g_c, std::complex<double> g_p, double sigma2)
{
    mse_breakdown b;
    b.t_p = sigma2;
    for (int j = 0; j < prec.n_beams(); ++j)
        b.t_p += std::norm(h.dot(prec.privates.col(j)));
    const std::complex<double> hp_c = h.dot(prec.common);
    const std::complex<double> hp_own = h.dot(prec.privates.col(own_beam));
    b.t_c = b.t_p + std::norm(hp_c);
    b.i_c = b.t_p;
    b.i_p = b.t_p - std::norm(hp_own);
    b.eps_c = std::norm(g_c) * b.t_c - 2.0 * std::real(g_c * hp_c) + 1.0;
    b.eps_p = std::norm(g_p) * b.t_p - 2.0 * std::real(g_p * hp_own) + 1.0;
    return b;
}

/// Optimum weights u = 1 / eps^MMSE (capped). The inputs must be MSEs taken
/// at the MMSE equalizers, so they lie in (0, 1]; anything else signals an
/// upstream numerical fault.
inline std::pair<double, double> mmse_weights(const mse_breakdown& mmse)
{
    if (!(mmse.eps_c > 0.0) || !(mmse.eps_p > 0.0))
        throw std::runtime_error("mmse_weights: nonpositive MSE");
    return {std::min(1.0 / mmse.eps_c, k_weight_cap), std::min(1.0 / mmse.eps_p, k_weight_cap)};
}

/// Augmented WMSE xi = u * eps - log2(u). With u = 1/eps^MMSE this equals
/// 1 + log2(eps^MMSE) = 1 - R, the Rate-WMMSE identity.
inline double augmented_wmse(double u, double eps) { return u * eps - std::log2(u); }

/// Natural-log flavor xi = u * eps - ln(u), for which u = 1/eps is the
/// exact minimizer. The alternating optimizer runs on this form (rates in
/// nats) so that each weight update truly descends; results are converted
/// back to bits at the interface.
inline double augmented_wmse_nat(double u, double eps) { return u * eps - std::log(u); }

struct wmmse_check
{
    double xi_c = 0.0, xi_p = 0.0;     // augmented WMMSEs (base-2 convention)
    double rate_c = 0.0, rate_p = 0.0; // bits/s/Hz
};

/// Evaluates both sides of the Rate-WMMSE identity xi^MMSE = 1 - R for the
/// common and private streams; the two sides are computed along separate
/// paths (WMSE algebra vs SINR-based rates).
inline wmmse_check rate_wmmse_check(const Eigen::VectorXcd& h, const precoder_matrix& prec, int own_beam,
                                    double sigma2)
{
    const auto [g_c, g_p] = mmse_equalizers(h, prec, own_beam, sigma2);
    const mse_breakdown b = mse_values(h, prec, own_beam, g_c, g_p, sigma2);
    const auto [u_c, u_p] = mmse_weights(b);
    wmmse_check out;
    out.xi_c = augmented_wmse(u_c, b.eps_c);
    out.xi_p = augmented_wmse(u_p, b.eps_p);
    out.rate_c = rate_from_sinr(sinr_common(h, prec, own_beam, sigma2));
    out.rate_p = rate_from_sinr(sinr_private(h, prec, own_beam, sigma2));
    return out;
}

/// Optional capture of the per-user, per-sample equalizers and weights
/// (K x S); the SAF pass itself streams these and keeps only aggregates.
struct equalizer_weight_state
{
    Eigen::MatrixXcd g_c, g_p;
    Eigen::MatrixXd u_c, u_p;
};

/// Sample-average coefficients consumed by the precoder subproblem, one set
/// per user: t = u|g|^2, Psi = t h h^H, f = u h g^H, v = log2(u), and the
/// weight average u itself, each averaged over the S realizations.
/// v is stored in the base-2 convention; the nat flavor is v * ln 2.
struct saf_coefficients
{
    Eigen::VectorXd t_c, t_p;
    std::vector<Eigen::MatrixXcd> psi_c, psi_p; // K matrices of N_t x N_t
    Eigen::MatrixXcd f_c, f_p;                  // N_t x K
    Eigen::VectorXd u_c, u_p;
    Eigen::VectorXd v_c, v_p;

    int n_users() const { return static_cast<int>(t_c.size()); }
    int n_feeds() const { return static_cast<int>(f_c.rows()); }
};

/// One pass over the ensemble: MMSE equalizers and weights per (user,
/// sample), folded into the SAF aggregates in fixed sample order so that
/// runs are reproducible. Pass `capture` to also materialize the per-sample
/// state (tests, debug dumps).
inline saf_coefficients compute_saf(const channel_ensemble& ens, const precoder_matrix& prec,
                                    const geometry& geom, double sigma2,
                                    equalizer_weight_state* capture = nullptr)
{
    if (ens.realizations.empty())
        throw std::invalid_argument("compute_saf: ensemble has no realizations");
    const int k_total = static_cast<int>(ens.estimate.entries.cols());
    const int n_t = static_cast<int>(ens.estimate.entries.rows());
    const int s_total = ens.sample_size();

    saf_coefficients saf;
    saf.t_c = Eigen::VectorXd::Zero(k_total);
    saf.t_p = Eigen::VectorXd::Zero(k_total);
    saf.u_c = Eigen::VectorXd::Zero(k_total);
    saf.u_p = Eigen::VectorXd::Zero(k_total);
    saf.v_c = Eigen::VectorXd::Zero(k_total);
    saf.v_p = Eigen::VectorXd::Zero(k_total);
    saf.f_c = Eigen::MatrixXcd::Zero(n_t, k_total);
    saf.f_p = Eigen::MatrixXcd::Zero(n_t, k_total);
    saf.psi_c.assign(static_cast<std::size_t>(k_total), Eigen::MatrixXcd::Zero(n_t, n_t));
    saf.psi_p.assign(static_cast<std::size_t>(k_total), Eigen::MatrixXcd::Zero(n_t, n_t));

    if (capture)
    {
        capture->g_c.resize(k_total, s_total);
        capture->g_p.resize(k_total, s_total);
        capture->u_c.resize(k_total, s_total);
        capture->u_p.resize(k_total, s_total);
    }

    for (int s = 0; s < s_total; ++s)
    {
        const Eigen::MatrixXcd& hs = ens.realizations[static_cast<std::size_t>(s)].entries;
        for (int k = 0; k < k_total; ++k)
        {
            const Eigen::VectorXcd h = hs.col(k);
            const int beam = geom.beam_of_user[static_cast<std::size_t>(k)];
            const auto [g_c, g_p] = mmse_equalizers(h, prec, beam, sigma2);
            const mse_breakdown b = mse_values(h, prec, beam, g_c, g_p, sigma2);
            const auto [u_c, u_p] = mmse_weights(b);

            const double t_c = u_c * std::norm(g_c);
            const double t_p = u_p * std::norm(g_p);
            saf.t_c(k) += t_c;
            saf.t_p(k) += t_p;
            saf.u_c(k) += u_c;
            saf.u_p(k) += u_p;
            saf.v_c(k) += std::log2(u_c);
            saf.v_p(k) += std::log2(u_p);
            saf.f_c.col(k) += u_c * h * std::conj(g_c);
            saf.f_p.col(k) += u_p * h * std::conj(g_p);
            saf.psi_c[static_cast<std::size_t>(k)] += t_c * (h * h.adjoint());
            saf.psi_p[static_cast<std::size_t>(k)] += t_p * (h * h.adjoint());

            if (capture)
            {
                capture->g_c(k, s) = g_c;
                capture->g_p(k, s) = g_p;
                capture->u_c(k, s) = u_c;
                capture->u_p(k, s) = u_p;
            }
        }
    }

    const double inv = 1.0 / static_cast<double>(s_total);
    saf.t_c *= inv;
    saf.t_p *= inv;
    saf.u_c *= inv;
    saf.u_p *= inv;
    saf.v_c *= inv;
    saf.v_p *= inv;
    saf.f_c *= inv;
    saf.f_p *= inv;
    for (auto& m : saf.psi_c)
        m *= inv;
    for (auto& m : saf.psi_p)
        m *= inv;
    return saf;
}

/// Average WMSE of user k's private stream at the given precoders, evaluated
/// from the SAF aggregates (the right side of the subproblem rate
/// constraints). The linear term couples to the user's own beam precoder.
/// `nat_log` selects the natural-log convention the solver runs on.
inline double saf_wmse_private(const saf_coefficients& saf, const precoder_matrix& prec, int k, int own_beam,
                               double sigma2, bool nat_log)
{
    const auto& psi = saf.psi_p[static_cast<std::size_t>(k)];
    double quad = 0.0;
    for (int j = 0; j < prec.n_beams(); ++j)
        quad += std::real(prec.privates.col(j).dot(psi * prec.privates.col(j)));
    const double lin = 2.0 * std::real(saf.f_p.col(k).dot(prec.privates.col(own_beam)));
    const double v = nat_log ? saf.v_p(k) * k_ln2 : saf.v_p(k);
    return quad + sigma2 * saf.t_p(k) - lin + saf.u_p(k) - v;
}

/// Common-stream counterpart (quadratic couples to the common column too).
inline double saf_wmse_common(const saf_coefficients& saf, const precoder_matrix& prec, int k, double sigma2,
                              bool nat_log)
{
    const auto& psi = saf.psi_c[static_cast<std::size_t>(k)];
    double quad = std::real(prec.common.dot(psi * prec.common));
    for (int j = 0; j < prec.n_beams(); ++j)
        quad += std::real(prec.privates.col(j).dot(psi * prec.privates.col(j)));
    const double lin = 2.0 * std::real(saf.f_c.col(k).dot(prec.common));
    const double v = nat_log ? saf.v_c(k) * k_ln2 : saf.v_c(k);
    return quad + sigma2 * saf.t_c(k) - lin + saf.u_c(k) - v;
}

/// Debug dump of the SAF aggregates (solver-input inspection).
inline void write_saf(std::ostream& out, const saf_coefficients& saf)
{
    out << "user,t_c,t_p,u_c,u_p,v_c,v_p\n";
    for (int k = 0; k < saf.n_users(); ++k)
        out << k << ',' << format_double(saf.t_c(k)) << ',' << format_double(saf.t_p(k)) << ','
            << format_double(saf.u_c(k)) << ',' << format_double(saf.u_p(k)) << ','
            << format_double(saf.v_c(k)) << ',' << format_double(saf.v_p(k)) << "\n";
    out << "# f_c\n";
    write_complex_matrix(out, saf.f_c);
    out << "# f_p\n";
    write_complex_matrix(out, saf.f_p);
    for (int k = 0; k < saf.n_users(); ++k)
    {
        out << "# psi_c user " << k << "\n";
        write_complex_matrix(out, saf.psi_c[static_cast<std::size_t>(k)]);
        out << "# psi_p user " << k << "\n";
        write_complex_matrix(out, saf.psi_p[static_cast<std::size_t>(k)]);
    }
}

} // namespace rsbeam

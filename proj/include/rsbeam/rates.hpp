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
#include <limits>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "rsbeam/channel.hpp"
#include "rsbeam/config.hpp"
#include "rsbeam/geometry.hpp"
#include "rsbeam/io.hpp"

namespace rsbeam {

enum class precoding_mode
{
    rs,  // common stream + one private stream per beam
    nors // private streams only, all interference treated as noise
};

inline const char* mode_name(precoding_mode m) { return m == precoding_mode::rs ? "RS" : "NoRS"; }

/// Linear precoder P = [p_c, p_1, ..., p_M]. In NoRS mode the common column
/// is pinned to zero.
struct precoder_matrix
{
    Eigen::VectorXcd common;   // p_c, length N_t
    Eigen::MatrixXcd privates; // N_t x M
    precoding_mode mode = precoding_mode::rs;

    int n_feeds() const { return static_cast<int>(privates.rows()); }
    int n_beams() const { return static_cast<int>(privates.cols()); }

    static precoder_matrix zero(int n_feeds, int n_beams, precoding_mode mode)
    {
        precoder_matrix p;
        p.common = Eigen::VectorXcd::Zero(n_feeds);
        p.privates = Eigen::MatrixXcd::Zero(n_feeds, n_beams);
        p.mode = mode;
        return p;
    }

    /// [p_c, p_1, ..., p_M] as one N_t x (M+1) matrix.
    Eigen::MatrixXcd full_matrix() const
    {
        Eigen::MatrixXcd f(privates.rows(), privates.cols() + 1);
        f.col(0) = common;
        f.rightCols(privates.cols()) = privates;
        return f;
    }

    void validate() const
    {
        if (common.size() != privates.rows())
            throw std::invalid_argument("precoder_matrix: common column length must equal feed count");
        if (mode == precoding_mode::nors && common.norm() != 0.0)
            throw std::invalid_argument("precoder_matrix: NoRS requires a zero common column");
    }
};

/// Per-beam portions of the common rate (C_m >= 0, bits/s/Hz).
struct common_rate_split
{
    Eigen::VectorXd portions;

    double total() const { return portions.size() ? portions.sum() : 0.0; }

    static common_rate_split zero(int n_beams)
    {
        common_rate_split s;
        s.portions = Eigen::VectorXd::Zero(n_beams);
        return s;
    }
};

/// Per-user and per-beam rates for one channel (or SAF averages), bits/s/Hz.
struct rate_report
{
    Eigen::VectorXd common_rates;  // K entries: R_c,k
    Eigen::VectorXd private_rates; // K entries: R_k
    Eigen::VectorXd beam_rates;    // M entries (filled by beam_rates())
    double mmf_value = 0.0;
};

inline double rate_from_sinr(double sinr) { return std::log2(1.0 + sinr); }

namespace detail {

// |h^H p_j|^2 summed over private columns j != own_beam, plus noise.
inline double private_interference(const Eigen::VectorXcd& h, const precoder_matrix& prec, int own_beam,
                                   double sigma2)
{
    double acc = sigma2;
    for (int j = 0; j < prec.n_beams(); ++j)
        if (j != own_beam)
            acc += std::norm(h.dot(prec.privates.col(j)));
    return acc;
}

} // namespace detail

/// SINR of the common stream at a user in beam `own_beam`: all private
/// streams count as interference. Zero numerator maps to zero SINR.
inline double sinr_common(const Eigen::VectorXcd& h, const precoder_matrix& prec, int own_beam, double sigma2)
{
    const double num = std::norm(h.dot(prec.common));
    if (num == 0.0)
        return 0.0;
    const double den = detail::private_interference(h, prec, own_beam, sigma2) +
                       std::norm(h.dot(prec.privates.col(own_beam)));
    return num / den;
}

/// SINR of the own private stream after the common stream has been removed
/// by SIC; only other beams' private streams interfere.
inline double sinr_private(const Eigen::VectorXcd& h, const precoder_matrix& prec, int own_beam, double sigma2)
{
    const double num = std::norm(h.dot(prec.privates.col(own_beam)));
    if (num == 0.0)
        return 0.0;
    return num / detail::private_interference(h, prec, own_beam, sigma2);
}

/// Per-user rates under one channel matrix (beam_rates left empty).
inline rate_report compute_rates(const channel_matrix& h, const precoder_matrix& prec, const geometry& geom,
                                 double sigma2)
{
    const int k_total = static_cast<int>(h.entries.cols());
    rate_report rep;
    rep.common_rates.resize(k_total);
    rep.private_rates.resize(k_total);
    for (int k = 0; k < k_total; ++k)
    {
        const Eigen::VectorXcd hk = h.entries.col(k);
        const int beam = geom.beam_of_user[static_cast<std::size_t>(k)];
        rep.common_rates(k) = rate_from_sinr(sinr_common(hk, prec, beam, sigma2));
        rep.private_rates(k) = rate_from_sinr(sinr_private(hk, prec, beam, sigma2));
    }
    return rep;
}

/// Sample-average rates over an ensemble (Monte Carlo estimate of the
/// average rates for the given estimate).
inline rate_report average_rates(const channel_ensemble& ens, const precoder_matrix& prec, const geometry& geom,
                                 double sigma2)
{
    if (ens.realizations.empty())
        throw std::invalid_argument("average_rates: ensemble has no realizations");
    rate_report acc;
    for (const auto& h : ens.realizations)
    {
        const rate_report r = compute_rates(h, prec, geom, sigma2);
        if (acc.common_rates.size() == 0)
        {
            acc = r;
        }
        else
        {
            acc.common_rates += r.common_rates;
            acc.private_rates += r.private_rates;
        }
    }
    const double inv = 1.0 / static_cast<double>(ens.sample_size());
    acc.common_rates *= inv;
    acc.private_rates *= inv;
    return acc;
}

/// Fills beam rates and the MMF value. RS: r_m = C_m + min of the group's
/// private rates, subject to sum(C) <= min_k R_c,k (the common stream must
/// be decodable by everyone). NoRS: r_m = group minimum; the split must be
/// zero.
inline rate_report beam_rates(const rate_report& user_rates, const common_rate_split& split, const geometry& geom,
                              precoding_mode mode, double feas_tol = 1e-6)
{
    const int m = geom.n_beams();
    rate_report rep = user_rates;
    rep.beam_rates.resize(m);

    if (mode == precoding_mode::nors)
    {
        if (split.portions.size() && split.portions.lpNorm<Eigen::Infinity>() > 0.0)
            throw std::invalid_argument("beam_rates: nonzero common-rate split in NoRS mode");
    }
    else
    {
        if (split.portions.size() != m)
            throw std::invalid_argument("beam_rates: split size must equal beam count");
        if (split.portions.minCoeff() < -feas_tol)
            throw std::invalid_argument("beam_rates: common-rate portions must be nonnegative");
        const double common_floor = rep.common_rates.minCoeff();
        if (split.total() > common_floor + feas_tol)
            throw std::invalid_argument("beam_rates: common-rate split exceeds min_k R_c,k");
    }

    for (int b = 0; b < m; ++b)
    {
        double group_min = std::numeric_limits<double>::infinity();
        for (int k : geom.groups[static_cast<std::size_t>(b)])
            group_min = std::min(group_min, rep.private_rates(k));
        rep.beam_rates(b) = group_min;
        if (mode == precoding_mode::rs)
            rep.beam_rates(b) += split.portions(b);
    }
    rep.mmf_value = rep.beam_rates.minCoeff();
    return rep;
}

/// Per-feed transmit powers (P P^H)_{n,n} and their slack against the
/// per-feed budget P/N_t. Feasible when every feed is within an absolute
/// 1e-6 W tolerance (interior-point outputs are feasible only to solver
/// accuracy).
struct power_check
{
    bool feasible = false;
    Eigen::VectorXd per_feed; // row powers of [p_c, p_1..p_M]
    Eigen::VectorXd slack;    // P/N_t - per_feed
};

inline power_check check_power(const precoder_matrix& prec, const system_config& cfg, double tol = 1e-6)
{
    power_check out;
    out.per_feed = prec.common.cwiseAbs2();
    for (int j = 0; j < prec.n_beams(); ++j)
        out.per_feed += prec.privates.col(j).cwiseAbs2();
    out.slack = Eigen::VectorXd::Constant(prec.n_feeds(), cfg.per_feed_power()) - out.per_feed;
    out.feasible = out.slack.minCoeff() >= -tol;
    return out;
}

/// RateReport CSV: labeled per-user rows then per-beam rows.
inline void write_rate_report(std::ostream& out, const rate_report& rep, const geometry& geom)
{
    out << "kind,index,beam,common_rate,private_rate,beam_rate\n";
    for (Eigen::Index k = 0; k < rep.common_rates.size(); ++k)
        out << "user," << k << ',' << geom.beam_of_user[static_cast<std::size_t>(k)] << ','
            << format_double(rep.common_rates(k)) << ',' << format_double(rep.private_rates(k)) << ",\n";
    for (Eigen::Index b = 0; b < rep.beam_rates.size(); ++b)
        out << "beam," << b << ',' << b << ",,," << format_double(rep.beam_rates(b)) << "\n";
    out << "mmf,,,,," << format_double(rep.mmf_value) << "\n";
}

} // namespace rsbeam

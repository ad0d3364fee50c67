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
#include <stdexcept>
#include <vector>

#include "rsbeam/bessel.hpp"
#include "rsbeam/config.hpp"
#include "rsbeam/geometry.hpp"
#include "rsbeam/rng.hpp"

namespace rsbeam {

constexpr double k_boltzmann = 1.380649e-23; // J/K
constexpr double k_speed_of_light = 2.998e8; // m/s

enum class channel_role
{
    true_channel,
    estimate,
    realization
};

struct channel_matrix
{
    Eigen::MatrixXcd entries; // N_t x K
    channel_role role = channel_role::true_channel;
};

/// A channel estimate H-hat together with S conditional realizations
/// H(s) = H-hat + E(s), where E(s) has i.i.d. CN(0, error_variance) entries.
struct channel_ensemble
{
    channel_matrix estimate;
    std::vector<channel_matrix> realizations;
    double error_variance = 0.0; // per-entry sigma_e^2

    int sample_size() const { return static_cast<int>(realizations.size()); }
};

/// Tapered-aperture beam gain
///   G(theta) = G_max [ J1(u)/(2u) + 36 J3(u)/u^3 ]^2,
///   u = 2.07123 sin(theta) / sin(theta_3dB).
/// The bracket tends to 1 as u -> 0 (J1(u)/(2u) -> 1/4, J3(u)/u^3 -> 1/48),
/// and 2.07123 places the half-power point at theta = theta_3dB.
inline double beam_gain(double theta, const system_config& cfg)
{
    if (theta < 0.0)
        throw std::invalid_argument("beam_gain: theta must be nonnegative");
    const double u = 2.07123 * std::sin(theta) / std::sin(cfg.theta_3db_rad);
    if (u < 1e-6)
        return cfg.g_max; // limit value; the correction is O(u^2) < 1e-12
    const double bracket = bessel_j(1, u) / (2.0 * u) + 36.0 * bessel_j(3, u) / (u * u * u);
    return cfg.g_max * bracket * bracket;
}

/// Deterministic link matrix B(n, k) = sqrt(G_R G(n,k)) /
/// (4 pi (d_k / lambda) sqrt(kappa T_sys B_w)). Noise power is normalized
/// into B here, which is why the signal model runs at sigma_n^2 = 1.
inline Eigen::MatrixXd build_gain_matrix(const geometry& geom, const system_config& cfg)
{
    validate_geometry(geom, cfg);
    const double lambda = cfg.wavelength_m();
    const double noise_norm = std::sqrt(k_boltzmann * cfg.t_sys_k * cfg.user_bandwidth_hz);
    Eigen::MatrixXd b(geom.n_beams(), geom.n_users());
    for (int k = 0; k < geom.n_users(); ++k)
    {
        const double d = geom.slant_ranges_m[static_cast<std::size_t>(k)];
        if (!(d > 0.0))
            throw std::invalid_argument("build_gain_matrix: nonpositive slant range");
        const double spread = 4.0 * 3.14159265358979323846 * (d / lambda);
        for (int n = 0; n < geom.n_beams(); ++n)
        {
            const double g = beam_gain(geom.boresight_angles(n, k), cfg);
            b(n, k) = std::sqrt(cfg.g_rx * g) / (spread * noise_norm);
        }
    }
    return b;
}

/// Rain fading and phase matrix Q. Per user k draw chi_dB with
/// ln(chi_dB) ~ N(rain_mu, rain_sigma) and phi ~ U[0, 2pi), then
/// Q(n, k) = chi^(-1/2) e^(-j phi) for every feed n: fades and phases are
/// common to all feeds (LOS link, feed spacing << slant range), so each
/// column of Q is constant.
inline Eigen::MatrixXcd sample_fading_matrix(const system_config& cfg, rng_stream& rng)
{
    if (!(cfg.rain_sigma > 0.0))
        throw std::invalid_argument("sample_fading_matrix: rain_sigma must be positive");
    Eigen::MatrixXcd q(cfg.n_feeds, cfg.n_users());
    for (int k = 0; k < cfg.n_users(); ++k)
    {
        const double chi_db = std::exp(cfg.rain_mu + cfg.rain_sigma * rng.normal());
        const double chi = std::pow(10.0, chi_db / 20.0);
        const double phi = rng.uniform_angle();
        const std::complex<double> entry = std::pow(chi, -0.5) * std::exp(std::complex<double>(0.0, -phi));
        q.col(k).setConstant(entry);
    }
    return q;
}

/// True channel H = B o Q (Hadamard product).
inline channel_matrix build_channel(const geometry& geom, const system_config& cfg, rng_stream& rng)
{
    const Eigen::MatrixXd b = build_gain_matrix(geom, cfg);
    const Eigen::MatrixXcd q = sample_fading_matrix(cfg, rng);
    if (b.rows() != q.rows() || b.cols() != q.cols())
        throw std::logic_error("build_channel: dimension mismatch between B and Q");
    channel_matrix h;
    h.entries = b.cwiseProduct(q.real()) + std::complex<double>(0.0, 1.0) * b.cwiseProduct(q.imag());
    h.role = channel_role::true_channel;
    return h;
}

namespace detail {

inline Eigen::MatrixXcd complex_gaussian_matrix(Eigen::Index rows, Eigen::Index cols, double variance,
                                                rng_stream& rng)
{
    Eigen::MatrixXcd e(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)      // column-major fill, fixed order
        for (Eigen::Index r = 0; r < rows; ++r)
            e(r, c) = rng.complex_normal(variance);
    return e;
}

} // namespace detail

/// Builds the imperfect-CSIT ensemble for one true channel. The per-entry
/// error variance is sigma_e^2 = P^(-alpha). One error draw defines the
/// estimate H-hat = H - E, then S fresh error matrices give the conditional
/// realizations H(s) = H-hat + E(s). Every draw runs on its own substream
/// derived from (rng_seed, stream_id, sample index), so ensembles are
/// reproducible no matter how generation is scheduled.
inline channel_ensemble make_ensemble(const channel_matrix& true_channel, const system_config& cfg,
                                      std::uint64_t stream_id)
{
    if (cfg.csit_alpha < 0.0 || cfg.csit_alpha > 1.0)
        throw std::invalid_argument("make_ensemble: csit_alpha must lie in [0, 1]");
    if (cfg.sample_size < 1)
        throw std::invalid_argument("make_ensemble: sample_size must be >= 1");

    const double var = cfg.csit_error_variance();
    const Eigen::Index rows = true_channel.entries.rows();
    const Eigen::Index cols = true_channel.entries.cols();

    channel_ensemble ens;
    ens.error_variance = var;
    {
        rng_stream rng(cfg.rng_seed, stream_id, 0);
        ens.estimate.entries = true_channel.entries - detail::complex_gaussian_matrix(rows, cols, var, rng);
        ens.estimate.role = channel_role::estimate;
    }
    ens.realizations.reserve(static_cast<std::size_t>(cfg.sample_size));
    for (int s = 0; s < cfg.sample_size; ++s)
    {
        rng_stream rng(cfg.rng_seed, stream_id, static_cast<std::uint64_t>(s) + 1);
        channel_matrix r;
        r.entries = ens.estimate.entries + detail::complex_gaussian_matrix(rows, cols, var, rng);
        r.role = channel_role::realization;
        ens.realizations.push_back(std::move(r));
    }
    return ens;
}

/// Degenerate ensemble for perfect-CSIT experiments: the estimate is the
/// true channel and the single realization coincides with it.
inline channel_ensemble perfect_csit_ensemble(const channel_matrix& true_channel)
{
    channel_ensemble ens;
    ens.error_variance = 0.0;
    ens.estimate = true_channel;
    ens.estimate.role = channel_role::estimate;
    channel_matrix r;
    r.entries = true_channel.entries;
    r.role = channel_role::realization;
    ens.realizations.push_back(std::move(r));
    return ens;
}

} // namespace rsbeam

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

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace rsbeam {

inline double dbi_to_linear(double dbi) { return std::pow(10.0, dbi / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double deg_to_rad(double deg) { return deg * 3.14159265358979323846 / 180.0; }

/// Physical and algorithmic parameters of one simulated system.
/// Gains are stored linear; the config-file loader accepts dBi/degrees and
/// converts once at load.
struct system_config
{
    double carrier_frequency_hz = 20e9; // Ka band downlink
    double satellite_height_m = 35786e3; // GEO
    double user_bandwidth_hz = 500e6;
    double theta_3db_rad = deg_to_rad(0.4);
    double g_max = dbi_to_linear(52.0);  // peak beam gain, linear
    double g_rx = dbi_to_linear(41.7);   // user terminal gain, linear
    double t_sys_k = 517.0;
    double rain_mu = -3.125;    // mean of ln(chi_dB)
    double rain_sigma = 1.591;  // std of ln(chi_dB)
    int n_feeds = 7;            // N_t; single feed per beam, so M = N_t
    int users_per_beam = 2;     // rho
    double total_power_w = 560.0; // P (80 W per feed at N_t = 7)
    double csit_alpha = 0.6;    // CSIT error scaling exponent in [0, 1]
    int sample_size = 100;      // S realizations per channel estimate
    double noise_variance = 1.0; // sigma_n^2 (noise already normalized into B)
    std::uint64_t rng_seed = 1;

    int n_beams() const { return n_feeds; }
    int n_users() const { return n_feeds * users_per_beam; }
    double per_feed_power() const { return total_power_w / n_feeds; }
    double wavelength_m() const { return 2.998e8 / carrier_frequency_hz; }

    /// Per-entry CSIT error variance sigma_e^2 = P^(-alpha).
    double csit_error_variance() const { return std::pow(total_power_w, -csit_alpha); }

    void validate() const
    {
        if (n_feeds < 1)
            throw std::invalid_argument("config: n_feeds must be >= 1");
        if (users_per_beam < 1)
            throw std::invalid_argument("config: users_per_beam must be >= 1");
        if (csit_alpha < 0.0 || csit_alpha > 1.0)
            throw std::invalid_argument("config: csit_alpha must lie in [0, 1]");
        if (sample_size < 1)
            throw std::invalid_argument("config: sample_size must be >= 1");
        if (!(carrier_frequency_hz > 0.0) || !(satellite_height_m > 0.0) ||
            !(user_bandwidth_hz > 0.0) || !(theta_3db_rad > 0.0))
            throw std::invalid_argument("config: frequencies, height and 3 dB angle must be positive");
        if (!(g_max > 0.0) || !(g_rx > 0.0) || !(t_sys_k > 0.0))
            throw std::invalid_argument("config: gains and system temperature must be positive");
        if (!(total_power_w > 0.0) || !(noise_variance > 0.0))
            throw std::invalid_argument("config: power and noise variance must be positive");
        if (!(rain_sigma > 0.0))
            throw std::invalid_argument("config: rain_sigma must be positive");
    }
};

/// Returns the stock GEO Ka-band configuration (the shipped default file
/// carries the same values).
inline system_config default_config() { return {}; }

namespace detail {

inline std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos)
        return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace detail

/// Parses a `key = value` config stream. Recognized keys (one per line,
/// `#` comments allowed):
///
///   carrier_frequency_hz, satellite_height_m, user_bandwidth_hz,
///   theta_3db_deg, g_max_dbi, g_rx_dbi, t_sys_k, rain_mu, rain_sigma,
///   n_feeds, users_per_beam, total_power_w, per_feed_power_w, csit_alpha,
///   sample_size, noise_variance, rng_seed
///
/// per_feed_power_w takes precedence over total_power_w when both appear.
/// Unknown keys are rejected.
inline system_config parse_config(std::istream& in, const system_config& base = default_config())
{
    system_config cfg = base;
    std::map<std::string, double> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = detail::trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected `key = value`");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        try
        {
            std::size_t used = 0;
            const double x = std::stod(val, &used);
            if (used != val.size())
                throw std::invalid_argument("trailing characters");
            kv[key] = x;
        }
        catch (const std::exception&)
        {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": bad numeric value for `" +
                                        key + "`");
        }
    }

    bool have_per_feed = false;
    double per_feed = 0.0;
    for (const auto& [key, x] : kv)
    {
        if (key == "carrier_frequency_hz") cfg.carrier_frequency_hz = x;
        else if (key == "satellite_height_m") cfg.satellite_height_m = x;
        else if (key == "user_bandwidth_hz") cfg.user_bandwidth_hz = x;
        else if (key == "theta_3db_deg") cfg.theta_3db_rad = deg_to_rad(x);
        else if (key == "g_max_dbi") cfg.g_max = dbi_to_linear(x);
        else if (key == "g_rx_dbi") cfg.g_rx = dbi_to_linear(x);
        else if (key == "t_sys_k") cfg.t_sys_k = x;
        else if (key == "rain_mu") cfg.rain_mu = x;
        else if (key == "rain_sigma") cfg.rain_sigma = x;
        else if (key == "n_feeds") cfg.n_feeds = static_cast<int>(x);
        else if (key == "users_per_beam") cfg.users_per_beam = static_cast<int>(x);
        else if (key == "total_power_w") cfg.total_power_w = x;
        else if (key == "per_feed_power_w") { have_per_feed = true; per_feed = x; }
        else if (key == "csit_alpha") cfg.csit_alpha = x;
        else if (key == "sample_size") cfg.sample_size = static_cast<int>(x);
        else if (key == "noise_variance") cfg.noise_variance = x;
        else if (key == "rng_seed") cfg.rng_seed = static_cast<std::uint64_t>(x);
        else throw std::invalid_argument("config: unknown key `" + key + "`");
    }
    if (have_per_feed)
        cfg.total_power_w = per_feed * cfg.n_feeds;

    cfg.validate();
    return cfg;
}

inline system_config load_config_file(const std::string& path, const system_config& base = default_config())
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config file: " + path);
    return parse_config(in, base);
}

} // namespace rsbeam

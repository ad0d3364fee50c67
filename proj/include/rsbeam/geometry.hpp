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
#include <stdexcept>
#include <vector>

#include "rsbeam/config.hpp"
#include "rsbeam/rng.hpp"

namespace rsbeam {

/// Multibeam layout: ground positions (meters, planar) of beam centers and
/// users, the user-to-beam map, slant ranges, and the boresight-angle matrix
/// theta(n, k) = angle at the satellite between user k and the center of
/// beam n. The footprint is tiny versus the GEO slant range, so a planar
/// small-angle model is used throughout and d_k is the satellite height.
struct geometry
{
    std::vector<Eigen::Vector2d> beam_centers;   // M ground positions [m]
    std::vector<Eigen::Vector2d> user_positions; // K ground positions [m]
    std::vector<int> beam_of_user;               // K entries: mu(k)
    std::vector<double> slant_ranges_m;          // K entries: d_k
    Eigen::MatrixXd boresight_angles;            // N_t x K [rad]
    std::vector<std::vector<int>> groups;        // M member lists, each of size rho

    int n_beams() const { return static_cast<int>(beam_centers.size()); }
    int n_users() const { return static_cast<int>(user_positions.size()); }
};

/// Lays out beam centers: one at nadir plus rings of 6, 12, ... beams at
/// angular radii 2*theta_3dB, 4*theta_3dB, ... so that adjacent beams cross
/// near their -3 dB contours. Covers any n_feeds, not just the stock 7.
inline std::vector<Eigen::Vector2d> hexagonal_beam_centers(int n_beams, double theta_3db_rad, double height_m)
{
    std::vector<Eigen::Vector2d> centers;
    centers.reserve(static_cast<std::size_t>(n_beams));
    centers.emplace_back(0.0, 0.0);
    int ring = 1;
    while (static_cast<int>(centers.size()) < n_beams)
    {
        const int in_ring = 6 * ring;
        const double radius = height_m * std::tan(2.0 * ring * theta_3db_rad);
        for (int i = 0; i < in_ring && static_cast<int>(centers.size()) < n_beams; ++i)
        {
            const double a = 2.0 * 3.14159265358979323846 * i / in_ring;
            centers.emplace_back(radius * std::cos(a), radius * std::sin(a));
        }
        ++ring;
    }
    return centers;
}

/// Draws rho users uniformly inside each beam's -3 dB footprint disk and
/// assembles the full geometry. Per-beam placement guarantees the partition
/// invariant (every beam serves exactly rho users).
inline geometry build_geometry(const system_config& cfg, rng_stream& rng)
{
    cfg.validate();
    const int m = cfg.n_beams();
    const int k_total = cfg.n_users();
    const double h = cfg.satellite_height_m;

    geometry g;
    g.beam_centers = hexagonal_beam_centers(m, cfg.theta_3db_rad, h);
    g.user_positions.reserve(static_cast<std::size_t>(k_total));
    g.beam_of_user.reserve(static_cast<std::size_t>(k_total));
    g.groups.assign(static_cast<std::size_t>(m), {});

    const double footprint_radius = h * std::tan(cfg.theta_3db_rad);
    for (int b = 0; b < m; ++b)
    {
        for (int u = 0; u < cfg.users_per_beam; ++u)
        {
            const double r = footprint_radius * std::sqrt(rng.uniform01());
            const double a = rng.uniform_angle();
            g.user_positions.emplace_back(g.beam_centers[static_cast<std::size_t>(b)] +
                                          Eigen::Vector2d(r * std::cos(a), r * std::sin(a)));
            g.groups[static_cast<std::size_t>(b)].push_back(static_cast<int>(g.beam_of_user.size()));
            g.beam_of_user.push_back(b);
        }
    }

    g.slant_ranges_m.assign(static_cast<std::size_t>(k_total), h);
    g.boresight_angles.resize(m, k_total);
    for (int n = 0; n < m; ++n)
        for (int k = 0; k < k_total; ++k)
        {
            const double ground_sep =
                (g.user_positions[static_cast<std::size_t>(k)] - g.beam_centers[static_cast<std::size_t>(n)]).norm();
            g.boresight_angles(n, k) = ground_sep / h; // small-angle
        }
    return g;
}

inline void validate_geometry(const geometry& g, const system_config& cfg)
{
    if (g.n_beams() != cfg.n_beams() || g.n_users() != cfg.n_users())
        throw std::invalid_argument("geometry: beam/user counts do not match config");
    std::vector<int> seen(static_cast<std::size_t>(g.n_users()), 0);
    for (int b = 0; b < g.n_beams(); ++b)
    {
        if (static_cast<int>(g.groups[static_cast<std::size_t>(b)].size()) != cfg.users_per_beam)
            throw std::invalid_argument("geometry: beam group sizes must equal users_per_beam");
        for (int k : g.groups[static_cast<std::size_t>(b)])
        {
            if (k < 0 || k >= g.n_users() || g.beam_of_user[static_cast<std::size_t>(k)] != b)
                throw std::invalid_argument("geometry: inconsistent beam_of_user map");
            seen[static_cast<std::size_t>(k)]++;
        }
    }
    for (int c : seen)
        if (c != 1)
            throw std::invalid_argument("geometry: groups must partition the user set");
    for (double d : g.slant_ranges_m)
        if (!(d >= cfg.satellite_height_m))
            throw std::invalid_argument("geometry: slant range below satellite height");
}

} // namespace rsbeam

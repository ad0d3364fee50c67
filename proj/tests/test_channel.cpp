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

#include "rsbeam/channel.hpp"
#include "rsbeam/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace rsbeam;

namespace {

// one beam at nadir, `users` users placed at given ground offsets
geometry single_beam_geometry(const system_config& cfg, const std::vector<Eigen::Vector2d>& users)
{
    geometry g;
    g.beam_centers = {{0.0, 0.0}};
    g.user_positions = users;
    g.groups = {{}};
    for (std::size_t k = 0; k < users.size(); ++k)
    {
        g.beam_of_user.push_back(0);
        g.groups[0].push_back(static_cast<int>(k));
        g.slant_ranges_m.push_back(cfg.satellite_height_m);
    }
    g.boresight_angles.resize(1, static_cast<Eigen::Index>(users.size()));
    for (std::size_t k = 0; k < users.size(); ++k)
        g.boresight_angles(0, static_cast<Eigen::Index>(k)) = users[k].norm() / cfg.satellite_height_m;
    return g;
}

system_config single_beam_config()
{
    system_config cfg = default_config();
    cfg.n_feeds = 1;
    cfg.users_per_beam = 1;
    return cfg;
}

} // namespace

TEST(beam_gain, peak_is_exact_gmax)
{
    const system_config cfg = default_config();
    EXPECT_EQ(beam_gain(0.0, cfg), cfg.g_max);
}

TEST(beam_gain, half_power_at_theta_3db)
{
    const system_config cfg = default_config();
    const double g = beam_gain(cfg.theta_3db_rad, cfg);
    const double db_offset = linear_to_db(g / (0.5 * cfg.g_max));
    EXPECT_LT(std::abs(db_offset), 0.2);
    // Table-I numbers: 52 dBi peak -> about 49 dBi at the 3 dB angle
    EXPECT_NEAR(linear_to_db(g), 49.0, 0.2);
}

TEST(beam_gain, strictly_below_peak_off_center)
{
    const system_config cfg = default_config();
    for (double f = 0.05; f <= 3.0; f += 0.05)
        EXPECT_LT(beam_gain(f * cfg.theta_3db_rad, cfg), cfg.g_max) << "f=" << f;
}

TEST(gain_matrix, golden_value_at_nadir)
{
    // boresight user at GEO nadir with Table-I parameters; expected value
    // computed once from B = sqrt(G_R G_max) / (4 pi (d/lambda) sqrt(k T B))
    const system_config cfg = single_beam_config();
    const geometry g = single_beam_geometry(cfg, {{0.0, 0.0}});
    const Eigen::MatrixXd b = build_gain_matrix(g, cfg);
    EXPECT_NEAR(b(0, 0), 0.854292701727988, 1e-9);
}

TEST(gain_matrix, sqrt_and_inverse_distance_scalings)
{
    system_config cfg = single_beam_config();
    geometry g = single_beam_geometry(cfg, {{0.0, 0.0}});
    const double base = build_gain_matrix(g, cfg)(0, 0);

    system_config cfg4 = cfg;
    cfg4.g_max *= 4.0;
    EXPECT_NEAR(build_gain_matrix(g, cfg4)(0, 0), 2.0 * base, 1e-12 * base);

    geometry far = g;
    far.slant_ranges_m[0] *= 2.0;
    EXPECT_NEAR(build_gain_matrix(far, cfg)(0, 0), 0.5 * base, 1e-12 * base);
}

TEST(gain_matrix, rejects_nonpositive_distance)
{
    const system_config cfg = single_beam_config();
    geometry g = single_beam_geometry(cfg, {{0.0, 0.0}});
    g.slant_ranges_m[0] = 0.0;
    EXPECT_THROW(build_gain_matrix(g, cfg), std::invalid_argument);
}

TEST(fading, columns_are_constant_and_attenuating)
{
    const system_config cfg = default_config();
    rng_stream rng(7);
    const Eigen::MatrixXcd q = sample_fading_matrix(cfg, rng);
    for (Eigen::Index k = 0; k < q.cols(); ++k)
    {
        for (Eigen::Index n = 1; n < q.rows(); ++n)
            EXPECT_EQ(q(n, k), q(0, k));
        EXPECT_LE(std::abs(q(0, k)), 1.0); // chi_dB > 0 always
        EXPECT_GT(std::abs(q(0, k)), 0.0);
    }
}

TEST(fading, log_domain_mean_matches_table)
{
    const system_config cfg = default_config();
    rng_stream rng(11);
    double acc = 0.0;
    long count = 0;
    while (count < 100000)
    {
        const Eigen::MatrixXcd q = sample_fading_matrix(cfg, rng);
        for (Eigen::Index k = 0; k < q.cols(); ++k)
        {
            const double chi = 1.0 / std::norm(q(0, k)); // |Q| = chi^(-1/2)
            const double chi_db = 20.0 * std::log10(chi);
            acc += std::log(chi_db);
            ++count;
        }
    }
    EXPECT_NEAR(acc / static_cast<double>(count), -3.125, 0.02);
}

TEST(channel, hadamard_structure)
{
    const system_config cfg = default_config();
    rng_stream grng(3);
    const geometry geom = build_geometry(cfg, grng);
    const Eigen::MatrixXd b = build_gain_matrix(geom, cfg);

    rng_stream crng(5);
    rng_stream crng_replay(5);
    const channel_matrix h = build_channel(geom, cfg, crng);
    const Eigen::MatrixXcd q = sample_fading_matrix(cfg, crng_replay);

    for (Eigen::Index n = 0; n < b.rows(); ++n)
        for (Eigen::Index k = 0; k < b.cols(); ++k)
        {
            EXPECT_NEAR(std::abs(h.entries(n, k)), b(n, k) * std::abs(q(n, k)), 1e-12);
            EXPECT_NEAR(std::abs(h.entries(n, k) - b(n, k) * q(n, k)), 0.0, 1e-12);
        }
}

TEST(geometry, partition_and_boresight)
{
    system_config cfg = default_config();
    cfg.users_per_beam = 3;
    rng_stream rng(42);
    const geometry g = build_geometry(cfg, rng);
    EXPECT_NO_THROW(validate_geometry(g, cfg));
    EXPECT_EQ(g.n_users(), cfg.n_users());
    for (int b = 0; b < g.n_beams(); ++b)
        EXPECT_EQ(static_cast<int>(g.groups[static_cast<std::size_t>(b)].size()), cfg.users_per_beam);
    // every user sits inside its own beam's 3 dB footprint
    for (int k = 0; k < g.n_users(); ++k)
    {
        const int own = g.beam_of_user[static_cast<std::size_t>(k)];
        EXPECT_LE(g.boresight_angles(own, k), cfg.theta_3db_rad * 1.0001);
    }
}

TEST(ensemble, error_variance_follows_power_scaling)
{
    system_config cfg = default_config();
    cfg.total_power_w = 100.0;
    cfg.csit_alpha = 0.0;
    EXPECT_DOUBLE_EQ(cfg.csit_error_variance(), 1.0);
    cfg.csit_alpha = 0.5;
    EXPECT_NEAR(cfg.csit_error_variance(), 0.1, 1e-15);
}

TEST(ensemble, statistics_match_contract)
{
    system_config cfg = default_config();
    cfg.n_feeds = 2;
    cfg.users_per_beam = 1;
    cfg.total_power_w = 100.0;
    cfg.csit_alpha = 0.5; // sigma_e^2 = 0.1
    cfg.sample_size = 20000;
    cfg.rng_seed = 99;

    channel_matrix truth;
    truth.entries = Eigen::MatrixXcd::Constant(2, 2, std::complex<double>(0.7, -0.3));
    const channel_ensemble ens = make_ensemble(truth, cfg, 0);

    const double var = cfg.csit_error_variance();
    const double s = static_cast<double>(ens.sample_size());
    Eigen::MatrixXcd mean = Eigen::MatrixXcd::Zero(2, 2);
    double emp_var = 0.0;
    for (const auto& r : ens.realizations)
    {
        mean += r.entries;
        emp_var += (r.entries - ens.estimate.entries).squaredNorm();
    }
    mean /= s;
    emp_var /= s * 4.0; // 4 entries

    const double se = std::sqrt(var / 2.0 / s); // per real component
    for (Eigen::Index i = 0; i < 2; ++i)
        for (Eigen::Index j = 0; j < 2; ++j)
        {
            EXPECT_NEAR(mean(i, j).real(), ens.estimate.entries(i, j).real(), 3.0 * se);
            EXPECT_NEAR(mean(i, j).imag(), ens.estimate.entries(i, j).imag(), 3.0 * se);
        }
    EXPECT_NEAR(emp_var, var, 0.1 * var);
    // estimate = truth - one error draw
    EXPECT_NEAR((ens.estimate.entries - truth.entries).norm() / std::sqrt(4.0 * var), 1.0, 0.9);
}

TEST(ensemble, deterministic_under_seed_split)
{
    system_config cfg = default_config();
    cfg.n_feeds = 3;
    cfg.users_per_beam = 2;
    cfg.sample_size = 5;

    rng_stream grng(1);
    const geometry geom = build_geometry(cfg, grng);
    rng_stream crng(2);
    const channel_matrix h = build_channel(geom, cfg, crng);

    const channel_ensemble a = make_ensemble(h, cfg, 17);
    const channel_ensemble b = make_ensemble(h, cfg, 17);
    const channel_ensemble c = make_ensemble(h, cfg, 18);

    ASSERT_EQ(a.sample_size(), b.sample_size());
    EXPECT_TRUE(a.estimate.entries == b.estimate.entries);
    for (int s = 0; s < a.sample_size(); ++s)
        EXPECT_TRUE(a.realizations[static_cast<std::size_t>(s)].entries ==
                    b.realizations[static_cast<std::size_t>(s)].entries);
    EXPECT_FALSE(a.estimate.entries == c.estimate.entries);
}

TEST(ensemble, rejects_bad_alpha)
{
    system_config cfg = default_config();
    cfg.csit_alpha = 1.5;
    channel_matrix h;
    h.entries = Eigen::MatrixXcd::Zero(2, 2);
    EXPECT_THROW(make_ensemble(h, cfg, 0), std::invalid_argument);
}

TEST(io, complex_matrix_and_ensemble_round_trip)
{
    system_config cfg = default_config();
    cfg.n_feeds = 3;
    cfg.users_per_beam = 1;
    cfg.sample_size = 4;
    rng_stream grng(1);
    const geometry geom = build_geometry(cfg, grng);
    rng_stream crng(2);
    const channel_matrix h = build_channel(geom, cfg, crng);
    const channel_ensemble ens = make_ensemble(h, cfg, 3);

    std::stringstream ss;
    write_ensemble(ss, ens);
    const channel_ensemble back = read_ensemble(ss);
    EXPECT_EQ(back.sample_size(), ens.sample_size());
    EXPECT_TRUE(back.estimate.entries == ens.estimate.entries); // exact: shortest round-trip format
    for (int s = 0; s < ens.sample_size(); ++s)
        EXPECT_TRUE(back.realizations[static_cast<std::size_t>(s)].entries ==
                    ens.realizations[static_cast<std::size_t>(s)].entries);
}

TEST(config, parse_and_precedence)
{
    std::stringstream ss;
    ss << "# sample config\n"
          "n_feeds = 3\n"
          "users_per_beam = 2\n"
          "per_feed_power_w = 40  # overrides total\n"
          "total_power_w = 999\n"
          "csit_alpha = 0.8\n"
          "theta_3db_deg = 0.4\n"
          "g_max_dbi = 52\n";
    const system_config cfg = parse_config(ss);
    EXPECT_EQ(cfg.n_feeds, 3);
    EXPECT_DOUBLE_EQ(cfg.total_power_w, 120.0);
    EXPECT_NEAR(cfg.g_max, 158489.3192461113, 1e-6);
    EXPECT_NEAR(cfg.theta_3db_rad, 0.4 * 3.14159265358979323846 / 180.0, 1e-15);

    std::stringstream bad1("nonsense_key = 1\n");
    EXPECT_THROW(parse_config(bad1), std::invalid_argument);
    std::stringstream bad2("csit_alpha = 1.5\n");
    EXPECT_THROW(parse_config(bad2), std::invalid_argument);
}

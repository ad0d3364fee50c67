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

#include "rsbeam/rates.hpp"

#include <gtest/gtest.h>

#include <complex>

using namespace rsbeam;
using cd = std::complex<double>;

namespace {

geometry trivial_geometry(int n_beams, int users_per_beam)
{
    geometry g;
    g.groups.assign(static_cast<std::size_t>(n_beams), {});
    for (int b = 0; b < n_beams; ++b)
    {
        g.beam_centers.emplace_back(0.0, 0.0);
        for (int u = 0; u < users_per_beam; ++u)
        {
            g.groups[static_cast<std::size_t>(b)].push_back(static_cast<int>(g.beam_of_user.size()));
            g.beam_of_user.push_back(b);
            g.user_positions.emplace_back(0.0, 0.0);
            g.slant_ranges_m.push_back(35786e3);
        }
    }
    g.boresight_angles = Eigen::MatrixXd::Zero(n_beams, n_beams * users_per_beam);
    return g;
}

precoder_matrix scalar_precoders()
{
    precoder_matrix p = precoder_matrix::zero(1, 1, precoding_mode::rs);
    p.common(0) = 1.0;
    p.privates(0, 0) = 1.0;
    return p;
}

rng_stream& test_rng()
{
    static rng_stream rng(12345);
    return rng;
}

precoder_matrix random_precoders(int n_feeds, int n_beams, precoding_mode mode, double scale = 1.0)
{
    precoder_matrix p = precoder_matrix::zero(n_feeds, n_beams, mode);
    auto& rng = test_rng();
    for (int n = 0; n < n_feeds; ++n)
    {
        if (mode == precoding_mode::rs)
            p.common(n) = scale * rng.complex_normal(1.0);
        for (int j = 0; j < n_beams; ++j)
            p.privates(n, j) = scale * rng.complex_normal(1.0);
    }
    return p;
}

Eigen::VectorXcd random_channel(int n_feeds)
{
    Eigen::VectorXcd h(n_feeds);
    for (int n = 0; n < n_feeds; ++n)
        h(n) = test_rng().complex_normal(1.0);
    return h;
}

} // namespace

TEST(sinr, scalar_cases)
{
    const precoder_matrix p = scalar_precoders();
    Eigen::VectorXcd h(1);
    h << cd(1.0, 0.0);
    EXPECT_DOUBLE_EQ(sinr_common(h, p, 0, 1.0), 0.5);
    EXPECT_DOUBLE_EQ(sinr_private(h, p, 0, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(rate_from_sinr(sinr_private(h, p, 0, 1.0)), 1.0);
}

TEST(sinr, zero_numerators)
{
    precoder_matrix p = scalar_precoders();
    p.common.setZero();
    Eigen::VectorXcd h(1);
    h << cd(1.0, 0.0);
    EXPECT_DOUBLE_EQ(sinr_common(h, p, 0, 1.0), 0.0);
    p.privates.setZero();
    EXPECT_DOUBLE_EQ(sinr_private(h, p, 0, 1.0), 0.0);
}

TEST(sinr, interference_free_common)
{
    // h orthogonal to the private precoder, |h^H p_c|^2 = 4
    precoder_matrix p = precoder_matrix::zero(2, 1, precoding_mode::rs);
    p.common << cd(2.0, 0.0), cd(0.0, 0.0);
    p.privates.col(0) << cd(0.0, 0.0), cd(1.0, 0.0);
    Eigen::VectorXcd h(2);
    h << cd(1.0, 0.0), cd(0.0, 0.0);
    EXPECT_DOUBLE_EQ(sinr_common(h, p, 0, 1.0), 4.0);
}

TEST(sinr, two_beam_private)
{
    precoder_matrix p = precoder_matrix::zero(2, 2, precoding_mode::nors);
    p.privates.col(0) << cd(std::sqrt(3.0), 0.0), cd(0.0, 0.0);
    p.privates.col(1) << cd(1.0, 0.0), cd(0.0, 0.0);
    Eigen::VectorXcd h(2);
    h << cd(1.0, 0.0), cd(0.0, 0.0);
    EXPECT_NEAR(sinr_private(h, p, 0, 1.0), 1.5, 1e-14);
}

TEST(sinr, monotone_in_noise)
{
    for (int trial = 0; trial < 20; ++trial)
    {
        const precoder_matrix p = random_precoders(3, 3, precoding_mode::rs);
        const Eigen::VectorXcd h = random_channel(3);
        const double lo_c = sinr_common(h, p, 1, 2.0);
        const double hi_c = sinr_common(h, p, 1, 1.0);
        const double lo_p = sinr_private(h, p, 1, 2.0);
        const double hi_p = sinr_private(h, p, 1, 1.0);
        EXPECT_LT(lo_c, hi_c);
        EXPECT_LT(lo_p, hi_p);
    }
}

TEST(sinr, sic_removes_common_interference)
{
    for (int trial = 0; trial < 20; ++trial)
    {
        const precoder_matrix p = random_precoders(3, 2, precoding_mode::rs);
        const Eigen::VectorXcd h = random_channel(3);
        const double num = std::norm(h.dot(p.privates.col(0)));
        double den = 1.0;
        for (int j = 1; j < 2; ++j)
            den += std::norm(h.dot(p.privates.col(j)));
        const double with_common = num / (den + std::norm(h.dot(p.common)));
        EXPECT_GE(sinr_private(h, p, 0, 1.0) + 1e-15, with_common);
    }
}

TEST(beam_rates, portions_and_minima)
{
    const geometry g = trivial_geometry(2, 2);
    rate_report rep;
    rep.common_rates = Eigen::VectorXd::Constant(4, 3.0);
    rep.private_rates.resize(4);
    rep.private_rates << 2.0, 1.0, 0.8, 2.5;

    common_rate_split split = common_rate_split::zero(2);
    split.portions << 0.5, 0.25;
    const rate_report rs = beam_rates(rep, split, g, precoding_mode::rs);
    EXPECT_DOUBLE_EQ(rs.beam_rates(0), 1.5);
    EXPECT_DOUBLE_EQ(rs.beam_rates(1), 1.05);
    EXPECT_DOUBLE_EQ(rs.mmf_value, 1.05);

    const rate_report nors = beam_rates(rep, common_rate_split::zero(2), g, precoding_mode::nors);
    EXPECT_DOUBLE_EQ(nors.beam_rates(0), 1.0);
    EXPECT_DOUBLE_EQ(nors.beam_rates(1), 0.8);

    // zero split: RS beam rates coincide with NoRS beam rates
    const rate_report rs0 = beam_rates(rep, common_rate_split::zero(2), g, precoding_mode::rs);
    EXPECT_TRUE(rs0.beam_rates == nors.beam_rates);

    // symmetric beams: MMF equals every beam rate
    rep.private_rates.setConstant(1.7);
    const rate_report sym = beam_rates(rep, common_rate_split::zero(2), g, precoding_mode::nors);
    EXPECT_DOUBLE_EQ(sym.mmf_value, 1.7);
    EXPECT_DOUBLE_EQ(sym.beam_rates.minCoeff(), sym.beam_rates.maxCoeff());
}

TEST(beam_rates, rejects_invalid_splits)
{
    const geometry g = trivial_geometry(2, 1);
    rate_report rep;
    rep.common_rates = Eigen::VectorXd::Constant(2, 0.6);
    rep.private_rates = Eigen::VectorXd::Constant(2, 1.0);

    common_rate_split nonzero = common_rate_split::zero(2);
    nonzero.portions << 0.1, 0.0;
    EXPECT_THROW(beam_rates(rep, nonzero, g, precoding_mode::nors), std::invalid_argument);

    common_rate_split too_big = common_rate_split::zero(2);
    too_big.portions << 0.5, 0.5; // sum 1.0 > min R_c,k = 0.6
    EXPECT_THROW(beam_rates(rep, too_big, g, precoding_mode::rs), std::invalid_argument);

    common_rate_split negative = common_rate_split::zero(2);
    negative.portions << -0.1, 0.1;
    EXPECT_THROW(beam_rates(rep, negative, g, precoding_mode::rs), std::invalid_argument);
}

TEST(check_power, slack_reporting)
{
    system_config cfg = default_config();
    cfg.n_feeds = 2;
    cfg.users_per_beam = 1;
    cfg.total_power_w = 8.0; // 4 W per feed

    const precoder_matrix zero = precoder_matrix::zero(2, 2, precoding_mode::rs);
    const power_check pc0 = check_power(zero, cfg);
    EXPECT_TRUE(pc0.feasible);
    EXPECT_DOUBLE_EQ(pc0.slack.minCoeff(), 4.0);

    precoder_matrix hot = precoder_matrix::zero(2, 2, precoding_mode::rs);
    hot.common << cd(std::sqrt(8.0), 0.0), cd(0.0, 0.0); // full budget on one feed
    EXPECT_FALSE(check_power(hot, cfg).feasible);

    precoder_matrix edge = precoder_matrix::zero(2, 2, precoding_mode::nors);
    edge.privates.col(0) << cd(2.0, 0.0), cd(0.0, 0.0); // exactly P/N_t on feed 1
    const power_check pce = check_power(edge, cfg);
    EXPECT_TRUE(pce.feasible);
    EXPECT_NEAR(pce.slack(0), 0.0, 1e-12);
}

TEST(average_rates, single_sample_and_constancy)
{
    const geometry g = trivial_geometry(2, 1);
    const precoder_matrix p = random_precoders(2, 2, precoding_mode::rs);

    channel_ensemble ens;
    ens.estimate.entries = Eigen::MatrixXcd::Random(2, 2);
    channel_matrix r;
    r.entries = ens.estimate.entries;
    ens.realizations = {r};

    const rate_report one = average_rates(ens, p, g, 1.0);
    const rate_report direct = compute_rates(r, p, g, 1.0);
    EXPECT_TRUE(one.common_rates == direct.common_rates);
    EXPECT_TRUE(one.private_rates == direct.private_rates);

    ens.realizations.assign(5, r); // identical realizations
    const rate_report five = average_rates(ens, p, g, 1.0);
    EXPECT_TRUE((five.private_rates - direct.private_rates).lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST(average_rates, vanishing_error_approaches_estimate_rates)
{
    system_config cfg = default_config();
    cfg.n_feeds = 3;
    cfg.users_per_beam = 1;
    cfg.sample_size = 64;
    cfg.total_power_w = 100.0;
    cfg.csit_alpha = 1.0;

    rng_stream grng(5);
    const geometry geom = build_geometry(cfg, grng);
    rng_stream crng(6);
    const channel_matrix h = build_channel(geom, cfg, crng);

    // shrink the error variance to ~1e-8 by inflating the power scale used
    // for sigma_e^2 only
    system_config tiny = cfg;
    tiny.total_power_w = 1e8;
    const channel_ensemble ens = make_ensemble(h, tiny, 1);
    ASSERT_NEAR(ens.error_variance, 1e-8, 1e-20);

    const precoder_matrix p = random_precoders(3, 3, precoding_mode::rs, 2.0);
    const rate_report avg = average_rates(ens, p, geom, 1.0);
    const rate_report at_hat = compute_rates(ens.estimate, p, geom, 1.0);
    EXPECT_LT((avg.private_rates - at_hat.private_rates).lpNorm<Eigen::Infinity>(), 1e-3);
    EXPECT_LT((avg.common_rates - at_hat.common_rates).lpNorm<Eigen::Infinity>(), 1e-3);
}

TEST(average_rates, permutation_invariant)
{
    const geometry g = trivial_geometry(2, 1);
    const precoder_matrix p = random_precoders(2, 2, precoding_mode::rs);
    channel_ensemble ens;
    ens.estimate.entries = Eigen::MatrixXcd::Random(2, 2);
    for (int s = 0; s < 6; ++s)
    {
        channel_matrix r;
        r.entries = Eigen::MatrixXcd::Random(2, 2);
        ens.realizations.push_back(r);
    }
    channel_ensemble shuffled = ens;
    std::reverse(shuffled.realizations.begin(), shuffled.realizations.end());
    const rate_report a = average_rates(ens, p, g, 1.0);
    const rate_report b = average_rates(shuffled, p, g, 1.0);
    EXPECT_LT((a.private_rates - b.private_rates).lpNorm<Eigen::Infinity>(), 1e-13);
    EXPECT_LT((a.common_rates - b.common_rates).lpNorm<Eigen::Infinity>(), 1e-13);
}

TEST(rate_report, csv_has_labeled_user_and_beam_rows)
{
    const geometry g = trivial_geometry(2, 2);
    rate_report rep;
    rep.common_rates = Eigen::VectorXd::Constant(4, 3.0);
    rep.private_rates.resize(4);
    rep.private_rates << 2.0, 1.0, 0.8, 2.5;
    const rate_report full = beam_rates(rep, common_rate_split::zero(2), g, precoding_mode::nors);

    std::stringstream ss;
    write_rate_report(ss, full, g);
    const std::string csv = ss.str();
    EXPECT_NE(csv.find("kind,index,beam,common_rate,private_rate,beam_rate"), std::string::npos);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 4 + 2 + 1); // header + users + beams + mmf
    EXPECT_NE(csv.find("user,0,0,3,2,"), std::string::npos);
    EXPECT_NE(csv.find("beam,1,1,,,0.8"), std::string::npos);
    EXPECT_NE(csv.find("mmf,,,,,0.8"), std::string::npos);
}

TEST(precoders, nors_invariant_and_round_trip)
{
    precoder_matrix p = random_precoders(3, 2, precoding_mode::nors);
    EXPECT_NO_THROW(p.validate());
    p.common(1) = cd(0.1, 0.0);
    EXPECT_THROW(p.validate(), std::invalid_argument);

    const precoder_matrix q = random_precoders(3, 2, precoding_mode::rs);
    std::stringstream ss;
    write_complex_matrix(ss, q.full_matrix());
    const Eigen::MatrixXcd back = read_complex_matrix(ss);
    EXPECT_TRUE(back == q.full_matrix());
}

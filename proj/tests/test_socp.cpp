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

#include "rsbeam/socp.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace rsbeam::socp;

TEST(socp_internals, jordan_and_scaling_identities)
{
    cone_dims dims;
    dims.nonneg = 3;
    dims.soc = {3, 4};

    std::mt19937_64 eng(5);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    auto interior_point = [&]() {
        Eigen::VectorXd v(dims.total());
        for (int i = 0; i < dims.nonneg; ++i)
            v(i) = 0.5 + std::abs(unif(eng));
        int off = dims.nonneg;
        for (int d : dims.soc)
        {
            for (int i = 1; i < d; ++i)
                v(off + i) = unif(eng);
            v(off) = v.segment(off + 1, d - 1).norm() + 0.3 + std::abs(unif(eng));
            off += d;
        }
        return v;
    };

    const Eigen::VectorXd s = interior_point();
    const Eigen::VectorXd z = interior_point();

    detail::nt_scaling w;
    ASSERT_TRUE(detail::compute_scaling(dims, s, z, w));

    // lambda = W z = W^{-1} s
    const Eigen::VectorXd wz = detail::apply_scaling(dims, w, z, detail::scale_dir::forward);
    const Eigen::VectorXd winv_s = detail::apply_scaling(dims, w, s, detail::scale_dir::inverse);
    EXPECT_LT((wz - w.lambda).norm(), 1e-12 * w.lambda.norm());
    EXPECT_LT((winv_s - w.lambda).norm(), 1e-12 * w.lambda.norm());

    // W^{-1} W v = v
    const Eigen::VectorXd v = interior_point();
    const Eigen::VectorXd round =
        detail::apply_scaling(dims, w, detail::apply_scaling(dims, w, v, detail::scale_dir::forward),
                              detail::scale_dir::inverse);
    EXPECT_LT((round - v).norm(), 1e-12 * v.norm());

    // jordan_solve inverts the jordan product
    const Eigen::VectorXd lam = interior_point();
    const Eigen::VectorXd prod = detail::jordan_product(dims, lam, v);
    const Eigen::VectorXd back = detail::jordan_solve(dims, lam, prod);
    EXPECT_LT((back - v).norm(), 1e-11 * v.norm());

    // max_step reaches the boundary without crossing it
    Eigen::VectorXd dir(dims.total());
    for (int i = 0; i < dims.total(); ++i)
        dir(i) = unif(eng);
    const double alpha = detail::max_step(dims, s, dir);
    if (std::isfinite(alpha))
    {
        EXPECT_LE(detail::cone_violation(dims, s + 0.999 * alpha * dir), 1e-12); // still inside
        EXPECT_GE(detail::cone_violation(dims, s + 1.01 * alpha * dir), -1e-9);  // crossed
    }
}

TEST(socp, small_lp)
{
    // min -x1 - x2  s.t.  x >= 0, x1 + x2 <= 1
    problem p;
    p.c.resize(2);
    p.c << -1.0, -1.0;
    p.G.resize(3, 2);
    p.G << -1.0, 0.0, 0.0, -1.0, 1.0, 1.0;
    p.h.resize(3);
    p.h << 0.0, 0.0, 1.0;
    p.cones.nonneg = 3;

    const solution sol = solve(p);
    ASSERT_TRUE(sol.usable()) << status_name(sol.status);
    EXPECT_NEAR(sol.primal_objective, -1.0, 1e-8);
    EXPECT_NEAR(sol.x(0) + sol.x(1), 1.0, 1e-8);
}

TEST(socp, boundary_only_feasible_lp)
{
    // max x  s.t.  x <= 0 and -x <= 0: the only feasible point is x = 0
    problem p;
    p.c.resize(1);
    p.c << -1.0;
    p.G.resize(2, 1);
    p.G << 1.0, -1.0;
    p.h.setZero(2);
    p.cones.nonneg = 2;

    const solution sol = solve(p);
    ASSERT_TRUE(sol.usable()) << status_name(sol.status);
    EXPECT_NEAR(sol.x(0), 0.0, 1e-7);
}

TEST(socp, norm_ball_linear_objective)
{
    // max c'x s.t. ||x|| <= 1  ->  optimum ||c||
    Eigen::VectorXd c(4);
    c << 1.0, -2.0, 0.5, 3.0;
    problem p;
    p.c = -c;
    p.G.resize(5, 4);
    p.G.setZero();
    p.G.bottomRows(4) = -Eigen::MatrixXd::Identity(4, 4);
    p.h.setZero(5);
    p.h(0) = 1.0;
    p.cones.soc = {5};

    const solution sol = solve(p);
    ASSERT_TRUE(sol.usable()) << status_name(sol.status);
    EXPECT_NEAR(-sol.primal_objective, c.norm(), 1e-7);
    EXPECT_LT((sol.x - c / c.norm()).norm(), 1e-6);
}

TEST(socp, projection_onto_point_degenerate_gap)
{
    // min t s.t. ||x - p0|| <= t: optimum t = 0, x = p0 (cone boundary)
    Eigen::VectorXd p0(3);
    p0 << 0.3, -1.2, 2.0;
    problem p;
    p.c.setZero(4);
    p.c(3) = 1.0;
    p.G.resize(4, 4);
    p.G.setZero();
    p.G(0, 3) = -1.0;
    p.G(1, 0) = -1.0;
    p.G(2, 1) = -1.0;
    p.G(3, 2) = -1.0;
    p.h.resize(4);
    p.h << 0.0, -p0(0), -p0(1), -p0(2);
    p.cones.soc = {4};

    const solution sol = solve(p);
    ASSERT_TRUE(sol.usable()) << status_name(sol.status);
    EXPECT_NEAR(sol.primal_objective, 0.0, 1e-6);
    EXPECT_LT((sol.x.head(3) - p0).norm(), 1e-5);
}

namespace {

// epigraph embedding of x'Qx + q'x <= w(x) with Q = L L'
void append_quadratic_soc(problem& p, const Eigen::MatrixXd& lt, const Eigen::VectorXd& lin_w,
                          double const_w)
{
    // rows: s0 = 1 + w;  s_mid = 2 L' x;  s_last = w - 1, with w = const_w + lin_w'x
    const Eigen::Index n = p.c.size();
    const Eigen::Index r = lt.rows();
    const Eigen::Index old_rows = p.G.rows();
    p.G.conservativeResize(old_rows + r + 2, n);
    p.h.conservativeResize(old_rows + r + 2);
    p.G.row(old_rows) = -lin_w.transpose();
    p.h(old_rows) = 1.0 + const_w;
    p.G.middleRows(old_rows + 1, r) = -2.0 * lt;
    p.h.segment(old_rows + 1, r).setZero();
    p.G.row(old_rows + r + 1) = -lin_w.transpose();
    p.h(old_rows + r + 1) = const_w - 1.0;
    p.cones.soc.push_back(static_cast<int>(r + 2));
}

} // namespace

TEST(socp, scalar_quadratic_epigraph)
{
    // min w - 2x  s.t.  x^2 <= w  ->  x = 1, w = 1, objective -1
    problem p;
    p.c.resize(2);
    p.c << -2.0, 1.0; // vars (x, w)
    p.G.resize(0, 2);
    p.h.resize(0);
    Eigen::MatrixXd lt(1, 2);
    lt << 1.0, 0.0;
    Eigen::VectorXd lin_w(2);
    lin_w << 0.0, 1.0;
    append_quadratic_soc(p, lt, lin_w, 0.0);

    const solution sol = solve(p);
    ASSERT_TRUE(sol.usable()) << status_name(sol.status);
    EXPECT_NEAR(sol.primal_objective, -1.0, 1e-7);
    // the argmin is flatter than the optimum: sqrt(gap)-level accuracy
    EXPECT_NEAR(sol.x(0), 1.0, 1e-4);
    EXPECT_NEAR(sol.x(1), 1.0, 1e-4);
}

TEST(socp, random_qcqp_matches_grid_search)
{
    std::mt19937_64 eng(11);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int trial = 0; trial < 5; ++trial)
    {
        // min c'x s.t. x'A x + b'x <= d, |x_i| <= 1.5 over x in R^2
        Eigen::MatrixXd l(2, 2);
        l << 1.0 + std::abs(unif(eng)), 0.0, unif(eng), 0.5 + std::abs(unif(eng));
        const Eigen::MatrixXd a = l * l.transpose();
        Eigen::VectorXd b(2), c(2);
        b << unif(eng), unif(eng);
        c << unif(eng) + 1.5, unif(eng) - 0.5;
        const double d = 1.0 + std::abs(unif(eng));

        problem p;
        p.c = c;
        p.G.resize(4, 2);
        p.G << 1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0;
        p.h.setConstant(4, 1.5);
        p.cones.nonneg = 4;
        append_quadratic_soc(p, l.transpose(), -b, d);

        const solution sol = solve(p);
        ASSERT_TRUE(sol.usable()) << status_name(sol.status);

        double best = 1e100;
        const int grid = 600;
        for (int i = 0; i <= grid; ++i)
            for (int j = 0; j <= grid; ++j)
            {
                Eigen::VectorXd x(2);
                x << -1.5 + 3.0 * i / grid, -1.5 + 3.0 * j / grid;
                if (x.dot(a * x) + b.dot(x) <= d)
                    best = std::min(best, c.dot(x));
            }
        EXPECT_NEAR(sol.primal_objective, best, 2e-2) << "trial " << trial;
        EXPECT_LE(sol.primal_objective, best + 1e-6);
    }
}

TEST(socp, hard_scaled_problem_still_converges)
{
    // norm-ball problem with badly scaled data
    Eigen::VectorXd c(3);
    c << 1e4, -2e4, 5e3;
    problem p;
    p.c = -c;
    p.G.resize(4, 3);
    p.G.setZero();
    p.G.bottomRows(3) = -Eigen::MatrixXd::Identity(3, 3);
    p.h.setZero(4);
    p.h(0) = 1e-3;
    p.cones.soc = {4};

    const solution sol = solve(p);
    ASSERT_TRUE(sol.usable()) << status_name(sol.status);
    EXPECT_NEAR(-sol.primal_objective, c.norm() * 1e-3, 1e-6 * c.norm() * 1e-3 + 1e-9);
}

TEST(socp, rejects_malformed_problems)
{
    problem p;
    p.c.resize(2);
    p.c << 1.0, 1.0;
    p.G.resize(3, 2);
    p.G.setZero();
    p.h.setZero(3);
    p.cones.nonneg = 2; // covers only 2 of 3 rows
    EXPECT_THROW(solve(p), std::invalid_argument);
}

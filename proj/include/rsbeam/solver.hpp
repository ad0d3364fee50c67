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
#include <chrono>
#include <cmath>
#include <vector>

#include "rsbeam/channel.hpp"
#include "rsbeam/config.hpp"
#include "rsbeam/geometry.hpp"
#include "rsbeam/rates.hpp"
#include "rsbeam/rng.hpp"
#include "rsbeam/subproblem.hpp"
#include "rsbeam/wmmse.hpp"

namespace rsbeam {

enum class ao_status
{
    converged,
    max_iterations,
    solver_failure
};

inline const char* ao_status_name(ao_status s)
{
    switch (s)
    {
    case ao_status::converged: return "converged";
    case ao_status::max_iterations: return "max_iterations";
    default: return "solver_failure";
    }
}

struct ao_trace_row
{
    precoding_mode mode = precoding_mode::rs;
    int iteration = 0;
    double objective_bits = 0.0;
    double max_violation = 0.0;
    double wall_seconds = 0.0;
};

struct ao_options
{
    double tolerance_bits = 1e-4; // |r_g change| convergence threshold
    int max_iterations = 200;
    int restarts = 1; // first start is matched-filter, further ones random
    std::uint64_t restart_seed = 0x5eedu;
    socp::settings socp_opts;
    bool verbose = false;
    std::vector<ao_trace_row>* trace_sink = nullptr;
};

struct solve_result
{
    precoder_matrix precoders;
    common_rate_split split;          // bits/s/Hz
    double objective = 0.0;           // final worst-beam bound r_g, bits/s/Hz
    Eigen::VectorXd beam_bounds;      // final per-beam epigraphs, bits/s/Hz
    int iterations = 0;
    std::vector<double> objective_trace;
    ao_status status = ao_status::solver_failure;
    double final_violation = 0.0; // independent constraint re-check
    bool lifted_from_nors = false;
};

/// Matched-filter starting point: each private column points along the sum
/// of its group's estimated channels, the common column (RS) along the
/// principal left singular vector of the estimate. Half the power budget
/// goes to the common column in RS mode, the rest is split evenly; a final
/// global rescale puts the hottest feed exactly at P/N_t.
inline precoder_matrix initialize_precoders(const channel_matrix& estimate, const geometry& geom,
                                            const system_config& cfg, precoding_mode mode)
{
    const int n_t = static_cast<int>(estimate.entries.rows());
    const int m = geom.n_beams();
    const bool rs = mode == precoding_mode::rs;
    precoder_matrix p = precoder_matrix::zero(n_t, m, mode);

    const Eigen::VectorXcd fallback = Eigen::VectorXcd::Ones(n_t) / std::sqrt(static_cast<double>(n_t));
    for (int b = 0; b < m; ++b)
    {
        Eigen::VectorXcd dir = Eigen::VectorXcd::Zero(n_t);
        for (int k : geom.groups[static_cast<std::size_t>(b)])
            dir += estimate.entries.col(k);
        p.privates.col(b) = dir.norm() > 0.0 ? Eigen::VectorXcd(dir / dir.norm()) : fallback;
    }
    if (rs)
    {
        if (estimate.entries.norm() > 0.0)
        {
            Eigen::JacobiSVD<Eigen::MatrixXcd> svd(estimate.entries, Eigen::ComputeThinU);
            p.common = svd.matrixU().col(0);
        }
        else
        {
            p.common = fallback;
        }
    }

    const double pw = cfg.total_power_w;
    if (rs)
    {
        p.common *= std::sqrt(pw / 2.0);
        p.privates *= std::sqrt(pw / (2.0 * m));
    }
    else
    {
        p.privates *= std::sqrt(pw / m);
    }

    const power_check pc = check_power(p, cfg, 0.0);
    const double hottest = pc.per_feed.maxCoeff();
    const double scale = std::sqrt(cfg.per_feed_power() / hottest);
    p.common *= scale;
    p.privates *= scale;
    return p;
}

namespace detail {

inline precoder_matrix random_precoders_scaled(const system_config& cfg, int n_t, int m, precoding_mode mode,
                                               rng_stream& rng)
{
    precoder_matrix p = precoder_matrix::zero(n_t, m, mode);
    for (int n = 0; n < n_t; ++n)
    {
        if (mode == precoding_mode::rs)
            p.common(n) = rng.complex_normal(1.0);
        for (int b = 0; b < m; ++b)
            p.privates(n, b) = rng.complex_normal(1.0);
    }
    if (mode == precoding_mode::rs)
    {
        p.common *= std::sqrt(cfg.total_power_w / 2.0) / p.common.norm();
        for (int b = 0; b < m; ++b)
            p.privates.col(b) *= std::sqrt(cfg.total_power_w / (2.0 * m)) / p.privates.col(b).norm();
    }
    else
    {
        for (int b = 0; b < m; ++b)
            p.privates.col(b) *= std::sqrt(cfg.total_power_w / m) / p.privates.col(b).norm();
    }
    const power_check pc = check_power(p, cfg, 0.0);
    const double scale = std::sqrt(cfg.per_feed_power() / pc.per_feed.maxCoeff());
    p.common *= scale;
    p.privates *= scale;
    return p;
}

inline solve_result ao_solve_from(const channel_ensemble& ens, const geometry& geom, const system_config& cfg,
                                  precoding_mode mode, precoder_matrix start, const ao_options& opts)
{
    const auto t0 = std::chrono::steady_clock::now();
    solve_result out;
    out.precoders = std::move(start);
    out.split = common_rate_split::zero(geom.n_beams());
    out.beam_bounds = Eigen::VectorXd::Zero(geom.n_beams());

    double prev = -std::numeric_limits<double>::infinity();
    for (int it = 1; it <= opts.max_iterations; ++it)
    {
        const saf_coefficients saf = compute_saf(ens, out.precoders, geom, cfg.noise_variance);
        const subproblem_spec sp = build_subproblem(saf, geom, cfg, mode);
        const subproblem_result res = solve_subproblem(sp, opts.socp_opts);
        out.iterations = it;
        if (!res.usable())
        {
            out.status = ao_status::solver_failure;
            return out; // partial trace and the last good precoders
        }
        out.precoders = res.precoders;
        out.split = res.split;
        out.objective = res.objective_bits;
        out.beam_bounds = res.rbar_bits;
        out.objective_trace.push_back(res.objective_bits);
        out.final_violation = subproblem_violation(saf, geom, cfg, res);

        if (opts.trace_sink || opts.verbose)
        {
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (opts.trace_sink)
                opts.trace_sink->push_back({mode, it, res.objective_bits, out.final_violation, secs});
            if (opts.verbose)
                std::printf("ao %s iter %3d  r_g %.6f bits  viol %.2e  %.2fs\n", mode_name(mode), it,
                            res.objective_bits, out.final_violation, secs);
        }

        if (std::abs(res.objective_bits - prev) < opts.tolerance_bits)
        {
            out.status = ao_status::converged;
            return out;
        }
        prev = res.objective_bits;
    }
    out.status = ao_status::max_iterations;
    return out;
}

} // namespace detail

/// Alternating optimization: closed-form MMSE equalizer/weight updates over
/// all realizations, then the convex precoder update, until the worst-beam
/// bound moves less than the tolerance. With restarts > 1, additional runs
/// start from random feasible precoders and the best final objective wins.
inline solve_result ao_solve(const channel_ensemble& ens, const geometry& geom, const system_config& cfg,
                             precoding_mode mode, const ao_options& opts = {})
{
    validate_geometry(geom, cfg);
    solve_result best;
    bool have = false;
    for (int attempt = 0; attempt < std::max(1, opts.restarts); ++attempt)
    {
        precoder_matrix start;
        if (attempt == 0)
        {
            start = initialize_precoders(ens.estimate, geom, cfg, mode);
        }
        else
        {
            rng_stream rng(cfg.rng_seed, opts.restart_seed, static_cast<std::uint64_t>(attempt));
            start = detail::random_precoders_scaled(cfg, static_cast<int>(ens.estimate.entries.rows()),
                                                    geom.n_beams(), mode, rng);
        }
        solve_result r = detail::ao_solve_from(ens, geom, cfg, mode, std::move(start), opts);
        const bool better = !have || (r.status != ao_status::solver_failure &&
                                      (best.status == ao_status::solver_failure || r.objective > best.objective));
        if (better)
        {
            best = std::move(r);
            have = true;
        }
    }
    return best;
}

struct mmf_evaluation
{
    double mmf_average_rate = 0.0;        // min over beams, bits/s/Hz
    Eigen::VectorXd per_beam;             // beam rates on the evaluation set
    double achieved_common_rate_floor = 0.0; // min_k average common rate
};

/// Re-scores a solution on an evaluation ensemble via plain sample-average
/// rates. If the trained common-rate split exceeds the common-rate floor
/// achieved on this set, the portions are scaled down to fit (the common
/// stream cannot carry more than every user can decode).
inline mmf_evaluation evaluate_solution(const solve_result& result, const channel_ensemble& eval_ens,
                                        const geometry& geom, const system_config& cfg)
{
    if (result.status == ao_status::solver_failure)
        throw std::invalid_argument("evaluate_solution: refusing to evaluate a failed solve");

    const rate_report avg = average_rates(eval_ens, result.precoders, geom, cfg.noise_variance);
    mmf_evaluation out;
    out.achieved_common_rate_floor = avg.common_rates.minCoeff();

    common_rate_split split = result.split;
    if (result.precoders.mode == precoding_mode::nors)
    {
        split = common_rate_split::zero(geom.n_beams());
    }
    else
    {
        const double total = split.total();
        const double floor = std::max(out.achieved_common_rate_floor, 0.0);
        if (total > floor && total > 0.0)
            split.portions *= floor / total;
    }
    const rate_report rep = beam_rates(avg, split, geom, result.precoders.mode);
    out.per_beam = rep.beam_rates;
    out.mmf_average_rate = rep.mmf_value;
    return out;
}

struct paired_result
{
    solve_result rs;
    solve_result nors;
};

/// Solves RS and NoRS on the same ensemble. NoRS is feasible inside the RS
/// design space (zero common column, zero split), so if the RS run lands on
/// a worse stationary point, the NoRS solution is lifted into RS form; the
/// paired outputs then satisfy subset dominance structurally.
inline paired_result solve_paired(const channel_ensemble& ens, const geometry& geom, const system_config& cfg,
                                  const ao_options& opts = {})
{
    paired_result out;
    out.nors = ao_solve(ens, geom, cfg, precoding_mode::nors, opts);
    out.rs = ao_solve(ens, geom, cfg, precoding_mode::rs, opts);

    const bool nors_ok = out.nors.status != ao_status::solver_failure;
    const bool rs_ok = out.rs.status != ao_status::solver_failure;
    if (nors_ok && (!rs_ok || out.rs.objective < out.nors.objective))
    {
        solve_result lifted = out.nors;
        lifted.precoders.mode = precoding_mode::rs;
        lifted.precoders.common.setZero();
        lifted.split = common_rate_split::zero(geom.n_beams());
        lifted.lifted_from_nors = true;
        out.rs = std::move(lifted);
    }
    return out;
}

} // namespace rsbeam

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
// Command-line front end:
//   rsbeam channel  - dump a seeded channel ensemble to CSV
//   rsbeam solve    - run one RS/NoRS instance and print the trace
//   rsbeam sweep    - full RS-vs-NoRS Monte Carlo sweep with CSV outputs

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "rsbeam/experiment.hpp"
#include "rsbeam/io.hpp"
#include "rsbeam/solver.hpp"

namespace {

struct common_flags
{
    std::string config_path;
    std::optional<double> per_feed_power;
    std::optional<double> alpha;
    std::optional<int> n_feeds;
    std::optional<int> users;
    std::optional<int> samples;
    std::optional<std::uint64_t> seed;
};

void add_common_flags(CLI::App* cmd, common_flags& f)
{
    cmd->add_option("--config", f.config_path, "key=value config file (defaults: stock GEO Ka-band setup)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--per-feed-power", f.per_feed_power, "per-feed power budget P/N_t in Watts");
    cmd->add_option("--alpha", f.alpha, "CSIT error scaling exponent in [0,1]");
    cmd->add_option("--feeds", f.n_feeds, "number of antenna feeds (= beams)");
    cmd->add_option("--users", f.users, "users per beam");
    cmd->add_option("--samples", f.samples, "training sample size S");
    cmd->add_option("--seed", f.seed, "base RNG seed");
}

rsbeam::system_config resolve_config(const common_flags& f)
{
    rsbeam::system_config cfg =
        f.config_path.empty() ? rsbeam::default_config() : rsbeam::load_config_file(f.config_path);
    if (f.n_feeds)
        cfg.n_feeds = *f.n_feeds;
    if (f.users)
        cfg.users_per_beam = *f.users;
    if (f.per_feed_power)
        cfg.total_power_w = *f.per_feed_power * cfg.n_feeds;
    if (f.alpha)
        cfg.csit_alpha = *f.alpha;
    if (f.samples)
        cfg.sample_size = *f.samples;
    if (f.seed)
        cfg.rng_seed = *f.seed;
    cfg.validate();
    return cfg;
}

// the same stream discipline the experiment harness uses for estimate 0
rsbeam::geometry seeded_geometry(const rsbeam::system_config& cfg, int estimate)
{
    rsbeam::rng_stream rng(cfg.rng_seed, 0x47454F4D + static_cast<std::uint64_t>(cfg.n_users()),
                           static_cast<std::uint64_t>(estimate));
    return rsbeam::build_geometry(cfg, rng);
}

rsbeam::channel_matrix seeded_channel(const rsbeam::system_config& cfg, const rsbeam::geometry& geom,
                                      int estimate)
{
    rsbeam::rng_stream rng(cfg.rng_seed, 0x4348414E + static_cast<std::uint64_t>(cfg.n_users()),
                           static_cast<std::uint64_t>(estimate));
    return rsbeam::build_channel(geom, cfg, rng);
}

int run_channel(const common_flags& flags, const std::string& out_path, int estimate)
{
    const rsbeam::system_config cfg = resolve_config(flags);
    const rsbeam::geometry geom = seeded_geometry(cfg, estimate);
    const rsbeam::channel_matrix truth = seeded_channel(cfg, geom, estimate);
    const rsbeam::channel_ensemble ens = rsbeam::make_ensemble(truth, cfg, (1ull << 48) | 0);

    std::ostringstream os;
    rsbeam::write_ensemble(os, ens);
    rsbeam::write_file(out_path, os.str());
    std::printf("wrote %s: %d feeds, %d users, %d samples, sigma_e^2 = %g\n", out_path.c_str(), cfg.n_feeds,
                cfg.n_users(), ens.sample_size(), ens.error_variance);
    return 0;
}

int run_solve(const common_flags& flags, const std::string& mode_str, const std::string& trace_path,
              int eval_samples, int restarts, double tolerance, int max_iters, bool quiet)
{
    const rsbeam::system_config cfg = resolve_config(flags);
    const rsbeam::geometry geom = seeded_geometry(cfg, 0);
    const rsbeam::channel_matrix truth = seeded_channel(cfg, geom, 0);
    const rsbeam::channel_ensemble train = rsbeam::make_ensemble(truth, cfg, (1ull << 48) | 0);
    rsbeam::system_config eval_cfg = cfg;
    eval_cfg.sample_size = eval_samples;
    const rsbeam::channel_ensemble eval = rsbeam::make_ensemble(truth, eval_cfg, (2ull << 48) | 0);

    rsbeam::ao_options opts;
    opts.tolerance_bits = tolerance;
    opts.max_iterations = max_iters;
    opts.restarts = restarts;
    opts.verbose = !quiet;
    std::vector<rsbeam::ao_trace_row> trace;
    if (!trace_path.empty())
        opts.trace_sink = &trace;

    const bool want_rs = mode_str == "rs" || mode_str == "both";
    const bool want_nors = mode_str == "nors" || mode_str == "both";

    int rc = 0;
    auto report = [&](const rsbeam::solve_result& r) {
        if (r.status == rsbeam::ao_status::solver_failure)
        {
            std::printf("%s: solver failure after %d iterations\n", rsbeam::mode_name(r.precoders.mode),
                        r.iterations);
            rc = 1;
            return;
        }
        const rsbeam::mmf_evaluation ev = rsbeam::evaluate_solution(r, eval, geom, cfg);
        std::printf("%s: %s after %d iterations, bound %.6f bits/s/Hz, evaluated MMF %.6f bits/s/Hz%s\n",
                    rsbeam::mode_name(r.precoders.mode), rsbeam::ao_status_name(r.status), r.iterations,
                    r.objective, ev.mmf_average_rate, r.lifted_from_nors ? " (lifted from NoRS)" : "");
        std::printf("  per-beam rates:");
        for (Eigen::Index b = 0; b < ev.per_beam.size(); ++b)
            std::printf(" %.6f", ev.per_beam(b));
        std::printf("\n  common-rate split total %.6f, floor %.6f, per-feed power slack min %.3e W\n",
                    r.split.total(), ev.achieved_common_rate_floor,
                    rsbeam::check_power(r.precoders, cfg).slack.minCoeff());
    };

    if (want_rs && want_nors)
    {
        const rsbeam::paired_result pair = rsbeam::solve_paired(train, geom, cfg, opts);
        report(pair.rs);
        report(pair.nors);
        if (pair.rs.status != rsbeam::ao_status::solver_failure &&
            pair.nors.status != rsbeam::ao_status::solver_failure && pair.nors.objective > 0.0)
            std::printf("RS/NoRS bound ratio: %.4f\n", pair.rs.objective / pair.nors.objective);
    }
    else
    {
        const rsbeam::precoding_mode mode =
            want_rs ? rsbeam::precoding_mode::rs : rsbeam::precoding_mode::nors;
        report(rsbeam::ao_solve(train, geom, cfg, mode, opts));
    }

    if (!trace_path.empty())
    {
        std::ostringstream os;
        os << "mode,iteration,objective_bits,max_violation,wall_seconds\n";
        for (const auto& row : trace)
            os << rsbeam::mode_name(row.mode) << ',' << row.iteration << ','
               << rsbeam::format_double(row.objective_bits) << ','
               << rsbeam::format_double(row.max_violation) << ','
               << rsbeam::format_double(row.wall_seconds, 6) << "\n";
        rsbeam::write_file(trace_path, os.str());
        std::printf("trace written to %s\n", trace_path.c_str());
    }
    return rc;
}

int run_sweep(const common_flags& flags, const std::string& axis_str, const std::vector<double>& values,
              int estimates, int eval_samples, int restarts, const std::string& out_prefix, int threads,
              bool full_scale)
{
    rsbeam::experiment_spec spec;
    spec.base = resolve_config(flags);
    spec.axis = rsbeam::parse_axis(axis_str);
    spec.values = values;
    spec.n_estimates = estimates;
    spec.eval_sample_size = eval_samples;
    spec.restarts = restarts;
    spec.seed = spec.base.rng_seed;
    spec.threads = threads;
    spec.output_prefix = out_prefix;
    if (full_scale)
    {
        spec.n_estimates = 100;
        spec.base.sample_size = 1000;
        spec.eval_sample_size = 1000;
        std::fprintf(stderr,
                     "warning: full-scale protocol (100 estimates, S=1000) selected; "
                     "expect hours of conic solves\n");
    }

    const rsbeam::experiment_result res = rsbeam::run_experiment(spec);
    rsbeam::emit_outputs(res, out_prefix);

    std::printf("%-14s %-6s %10s %10s %8s\n", "sweep_value", "mode", "mean_mmf", "stderr", "failed");
    for (const auto& s : res.summary)
        std::printf("%-14g %-6s %10.6f %10.6f %8d\n", s.sweep_value, rsbeam::mode_name(s.mode), s.mean_mmf,
                    s.stderr_mmf, s.failures);
    std::printf("outputs: %s_tidy.csv %s_summary.csv %s_plot.csv\n", out_prefix.c_str(), out_prefix.c_str(),
                out_prefix.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"rate-splitting multibeam satellite MMF beamforming simulator"};
    app.require_subcommand(1);

    common_flags flags;

    auto* channel = app.add_subcommand("channel", "dump a seeded channel ensemble to CSV");
    std::string channel_out = "ensemble.csv";
    int channel_estimate = 0;
    add_common_flags(channel, flags);
    channel->add_option("--out", channel_out, "output CSV path")->required();
    channel->add_option("--estimate", channel_estimate, "channel estimate index (seed offset)");

    auto* solve = app.add_subcommand("solve", "solve one instance and print the optimizer trace");
    std::string solve_mode = "both";
    std::string trace_path;
    int eval_samples = 200;
    int restarts = 1;
    double tolerance = 1e-4;
    int max_iters = 200;
    bool quiet = false;
    add_common_flags(solve, flags);
    solve->add_option("--mode", solve_mode, "rs | nors | both")
        ->check(CLI::IsMember({"rs", "nors", "both"}));
    solve->add_option("--trace", trace_path, "write the per-iteration trace CSV here");
    solve->add_option("--eval-samples", eval_samples, "evaluation ensemble size");
    solve->add_option("--restarts", restarts, "AO restarts (first is matched-filter)");
    solve->add_option("--tolerance", tolerance, "AO convergence threshold on r_g (bits)");
    solve->add_option("--max-iters", max_iters, "AO iteration cap");
    solve->add_flag("--quiet", quiet, "suppress per-iteration output");

    auto* sweep = app.add_subcommand("sweep", "RS-vs-NoRS Monte Carlo sweep");
    std::string axis_str = "power";
    std::vector<double> values;
    int estimates = 10;
    int sweep_eval_samples = 200;
    int sweep_restarts = 1;
    std::string out_prefix;
    int threads = 0;
    bool full_scale = false;
    add_common_flags(sweep, flags);
    sweep->add_option("--axis", axis_str, "power | alpha | users");
    sweep->add_option("--values", values, "sweep values (sorted)")->required()->delimiter(',');
    sweep->add_option("--estimates", estimates, "number of channel estimates");
    sweep->add_option("--eval-samples", sweep_eval_samples, "evaluation ensemble size");
    sweep->add_option("--restarts", sweep_restarts, "AO restarts per solve");
    sweep->add_option("--out", out_prefix, "output file prefix")->required();
    sweep->add_option("--threads", threads, "worker threads (0 = auto)");
    sweep->add_flag("--full-scale", full_scale, "paper-scale protocol: 100 estimates, S=1000 (slow)");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (channel->parsed())
            return run_channel(flags, channel_out, channel_estimate);
        if (solve->parsed())
            return run_solve(flags, solve_mode, trace_path, eval_samples, restarts, tolerance, max_iters,
                             quiet);
        return run_sweep(flags, axis_str, values, estimates, sweep_eval_samples, sweep_restarts, out_prefix,
                         threads, full_scale);
    }
    catch (const std::exception& e)
    {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

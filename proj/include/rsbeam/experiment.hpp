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
// Monte Carlo experiment harness: sweeps one axis (per-feed power, CSIT
// quality alpha, or users per beam), draws seeded channel estimates, solves
// RS and NoRS on identical training ensembles, scores both on fresh
// evaluation ensembles, and emits byte-stable CSV outputs.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "rsbeam/channel.hpp"
#include "rsbeam/config.hpp"
#include "rsbeam/geometry.hpp"
#include "rsbeam/io.hpp"
#include "rsbeam/solver.hpp"

namespace rsbeam {

constexpr const char* k_version = "rsbeam-0.1.0";

enum class sweep_axis
{
    per_feed_power,
    alpha,
    users_per_beam
};

inline const char* axis_name(sweep_axis a)
{
    switch (a)
    {
    case sweep_axis::per_feed_power: return "per_feed_power";
    case sweep_axis::alpha: return "alpha";
    default: return "users_per_beam";
    }
}

inline sweep_axis parse_axis(const std::string& s)
{
    if (s == "power" || s == "per_feed_power")
        return sweep_axis::per_feed_power;
    if (s == "alpha")
        return sweep_axis::alpha;
    if (s == "users" || s == "users_per_beam")
        return sweep_axis::users_per_beam;
    throw std::invalid_argument("unknown sweep axis: " + s + " (expected power|alpha|users)");
}

/// Raised when the experiment as a whole is unusable (too many failed
/// instances, bad spec).
class experiment_error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

struct experiment_spec
{
    system_config base = default_config();
    sweep_axis axis = sweep_axis::per_feed_power;
    std::vector<double> values;
    int n_estimates = 10;
    int eval_sample_size = 200;
    int restarts = 1;
    std::string output_prefix; // used by emit_outputs
    std::uint64_t seed = 1;
    int threads = 0; // 0 = hardware concurrency
    ao_options ao;

    void validate() const
    {
        if (values.empty())
            throw experiment_error("experiment: sweep_values must be nonempty");
        if (!std::is_sorted(values.begin(), values.end()))
            throw experiment_error("experiment: sweep_values must be sorted");
        if (n_estimates < 1)
            throw experiment_error("experiment: n_estimates must be >= 1");
        if (eval_sample_size < 1)
            throw experiment_error("experiment: eval_sample_size must be >= 1");
        if (axis == sweep_axis::users_per_beam)
            for (double v : values)
                if (v < 1.0 || v != std::floor(v))
                    throw experiment_error("experiment: users_per_beam values must be positive integers");
    }
};

/// Resolves the system configuration at one sweep value.
inline system_config config_for_value(const experiment_spec& spec, double value)
{
    system_config cfg = spec.base;
    cfg.rng_seed = spec.seed;
    switch (spec.axis)
    {
    case sweep_axis::per_feed_power:
        cfg.total_power_w = value * cfg.n_feeds;
        break;
    case sweep_axis::alpha:
        cfg.csit_alpha = value;
        break;
    case sweep_axis::users_per_beam:
        cfg.users_per_beam = static_cast<int>(value);
        break;
    }
    cfg.validate();
    return cfg;
}

struct instance_outcome
{
    int value_index = 0;
    double sweep_value = 0.0;
    int estimate_index = 0;
    precoding_mode mode = precoding_mode::rs;
    bool failed = false;
    double mmf_eval = 0.0;  // MMF average rate on the evaluation ensemble
    double mmf_train = 0.0; // same on the training ensemble (diagnostic)
    double objective = 0.0; // final solver bound
    int iterations = 0;
    bool lifted = false;
};

struct summary_row
{
    double sweep_value = 0.0;
    precoding_mode mode = precoding_mode::rs;
    int count = 0;
    int failures = 0;
    double mean_mmf = 0.0;
    double stderr_mmf = 0.0;
};

struct experiment_result
{
    experiment_spec spec;
    std::vector<instance_outcome> rows;    // (value, estimate, RS-then-NoRS) order
    std::vector<summary_row> summary;      // (value, RS-then-NoRS) order
    int total_failures = 0;
    std::string version = k_version;
};

namespace detail {

// deterministic stream ids for the nested draws
constexpr std::uint64_t k_geom_tag = 0x47454F4D;  // geometry per (K, estimate)
constexpr std::uint64_t k_chan_tag = 0x4348414E;  // true channel per (K, estimate)
constexpr std::uint64_t k_train_tag = 1;
constexpr std::uint64_t k_eval_tag = 2;

inline std::uint64_t ensemble_stream(std::uint64_t tag, int value_index, int estimate)
{
    return (tag << 48) | (static_cast<std::uint64_t>(value_index) << 24) |
           static_cast<std::uint64_t>(estimate);
}

struct instance_pair
{
    instance_outcome rs, nors;
};

inline instance_pair run_instance(const experiment_spec& spec, int value_index, int estimate)
{
    const double value = spec.values[static_cast<std::size_t>(value_index)];
    const system_config cfg = config_for_value(spec, value);
    const std::uint64_t k_users = static_cast<std::uint64_t>(cfg.n_users());

    rng_stream geom_rng(spec.seed, k_geom_tag + k_users, static_cast<std::uint64_t>(estimate));
    const geometry geom = build_geometry(cfg, geom_rng);
    rng_stream chan_rng(spec.seed, k_chan_tag + k_users, static_cast<std::uint64_t>(estimate));
    const channel_matrix truth = build_channel(geom, cfg, chan_rng);

    const channel_ensemble train =
        make_ensemble(truth, cfg, ensemble_stream(k_train_tag, value_index, estimate));
    system_config eval_cfg = cfg;
    eval_cfg.sample_size = spec.eval_sample_size;
    const channel_ensemble eval =
        make_ensemble(truth, eval_cfg, ensemble_stream(k_eval_tag, value_index, estimate));

    ao_options ao = spec.ao;
    ao.restarts = spec.restarts;
    paired_result pair;
    bool blown_up = false;
    try
    {
        pair = solve_paired(train, geom, cfg, ao);
    }
    catch (const std::exception&)
    {
        // exclude-and-count: a blown instance must not abort a long sweep
        blown_up = true;
    }

    auto to_outcome = [&](const solve_result& r, precoding_mode mode) {
        instance_outcome o;
        o.value_index = value_index;
        o.sweep_value = value;
        o.estimate_index = estimate;
        o.mode = mode;
        o.failed = blown_up || r.status == ao_status::solver_failure;
        o.objective = r.objective;
        o.iterations = r.iterations;
        o.lifted = r.lifted_from_nors;
        if (!o.failed)
        {
            o.mmf_eval = evaluate_solution(r, eval, geom, cfg).mmf_average_rate;
            o.mmf_train = evaluate_solution(r, train, geom, cfg).mmf_average_rate;
        }
        return o;
    };
    return {to_outcome(pair.rs, precoding_mode::rs), to_outcome(pair.nors, precoding_mode::nors)};
}

} // namespace detail

/// Runs the full sweep. Instances execute in a small thread pool with
/// per-instance derived seeds, so the result is a pure function of the spec
/// regardless of scheduling. More than 10% failed instances aborts.
inline experiment_result run_experiment(const experiment_spec& spec)
{
    spec.validate();
    const int n_vals = static_cast<int>(spec.values.size());
    const int n_jobs = n_vals * spec.n_estimates;

    std::vector<detail::instance_pair> slots(static_cast<std::size_t>(n_jobs));
    int n_threads = spec.threads > 0 ? spec.threads : static_cast<int>(std::thread::hardware_concurrency());
    n_threads = std::max(1, std::min(n_threads, n_jobs));

    std::vector<std::string> worker_errors(static_cast<std::size_t>(n_threads));
    auto worker = [&](int tid) {
        try
        {
            for (int j = tid; j < n_jobs; j += n_threads)
                slots[static_cast<std::size_t>(j)] =
                    detail::run_instance(spec, j / spec.n_estimates, j % spec.n_estimates);
        }
        catch (const std::exception& e)
        {
            worker_errors[static_cast<std::size_t>(tid)] = e.what();
        }
    };
    if (n_threads == 1)
    {
        worker(0);
    }
    else
    {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t)
            pool.emplace_back(worker, t);
        for (auto& t : pool)
            t.join();
    }
    for (const auto& err : worker_errors)
        if (!err.empty())
            throw experiment_error("experiment worker failed: " + err);

    experiment_result out;
    out.spec = spec;
    for (int vi = 0; vi < n_vals; ++vi)
        for (int e = 0; e < spec.n_estimates; ++e)
        {
            const auto& pr = slots[static_cast<std::size_t>(vi * spec.n_estimates + e)];
            out.rows.push_back(pr.rs);
            out.rows.push_back(pr.nors);
            out.total_failures += (pr.rs.failed ? 1 : 0) + (pr.nors.failed ? 1 : 0);
        }

    for (int vi = 0; vi < n_vals; ++vi)
        for (precoding_mode mode : {precoding_mode::rs, precoding_mode::nors})
        {
            summary_row s;
            s.sweep_value = spec.values[static_cast<std::size_t>(vi)];
            s.mode = mode;
            std::vector<double> vals;
            for (const auto& r : out.rows)
                if (r.value_index == vi && r.mode == mode)
                {
                    if (r.failed)
                        s.failures++;
                    else
                        vals.push_back(r.mmf_eval);
                }
            s.count = static_cast<int>(vals.size());
            if (!vals.empty())
            {
                double mean = 0.0;
                for (double v : vals)
                    mean += v;
                mean /= static_cast<double>(vals.size());
                double var = 0.0;
                for (double v : vals)
                    var += (v - mean) * (v - mean);
                s.mean_mmf = mean;
                s.stderr_mmf = vals.size() > 1
                                   ? std::sqrt(var / (static_cast<double>(vals.size()) - 1.0) /
                                               static_cast<double>(vals.size()))
                                   : 0.0;
            }
            out.summary.push_back(s);
        }

    if (out.total_failures * 10 > static_cast<int>(out.rows.size()))
        throw experiment_error("experiment: more than 10% of instances failed (" +
                               std::to_string(out.total_failures) + " of " + std::to_string(out.rows.size()) +
                               ")");
    return out;
}

namespace detail {

inline void write_metadata(std::ostream& os, const experiment_result& res)
{
    const experiment_spec& sp = res.spec;
    const system_config& c = sp.base;
    os << "# " << res.version << "\n";
    os << "# axis=" << axis_name(sp.axis) << " seed=" << sp.seed << " estimates=" << sp.n_estimates
       << " eval_samples=" << sp.eval_sample_size << " restarts=" << sp.restarts
       << " failures=" << res.total_failures << "\n";
    os << "# config: carrier_frequency_hz=" << format_double(c.carrier_frequency_hz)
       << " satellite_height_m=" << format_double(c.satellite_height_m)
       << " user_bandwidth_hz=" << format_double(c.user_bandwidth_hz)
       << " theta_3db_deg=" << format_double(c.theta_3db_rad * 180.0 / 3.14159265358979323846)
       << " g_max_dbi=" << format_double(linear_to_db(c.g_max))
       << " g_rx_dbi=" << format_double(linear_to_db(c.g_rx)) << " t_sys_k=" << format_double(c.t_sys_k)
       << " rain_mu=" << format_double(c.rain_mu) << " rain_sigma=" << format_double(c.rain_sigma)
       << " n_feeds=" << c.n_feeds << " users_per_beam=" << c.users_per_beam
       << " total_power_w=" << format_double(c.total_power_w) << " csit_alpha=" << format_double(c.csit_alpha)
       << " sample_size=" << c.sample_size << " noise_variance=" << format_double(c.noise_variance) << "\n";
}

} // namespace detail

/// Writes <prefix>_tidy.csv (one row per estimate x value x mode),
/// <prefix>_summary.csv (means and standard errors) and <prefix>_plot.csv
/// (x, RS mean/err, NoRS mean/err). Byte-stable for a fixed spec.
inline void emit_outputs(const experiment_result& res, const std::string& prefix)
{
    {
        std::ostringstream os;
        detail::write_metadata(os, res);
        os << "sweep_axis,sweep_value,estimate,mode,failed,lifted,mmf_eval,mmf_train,objective,iterations\n";
        for (const auto& r : res.rows)
            os << axis_name(res.spec.axis) << ',' << format_double(r.sweep_value) << ',' << r.estimate_index
               << ',' << mode_name(r.mode) << ',' << (r.failed ? 1 : 0) << ',' << (r.lifted ? 1 : 0) << ','
               << format_double(r.mmf_eval) << ',' << format_double(r.mmf_train) << ','
               << format_double(r.objective) << ',' << r.iterations << "\n";
        write_file(prefix + "_tidy.csv", os.str());
    }
    {
        std::ostringstream os;
        detail::write_metadata(os, res);
        os << "sweep_value,mode,count,failures,mean_mmf,stderr_mmf\n";
        for (const auto& s : res.summary)
            os << format_double(s.sweep_value) << ',' << mode_name(s.mode) << ',' << s.count << ','
               << s.failures << ',' << format_double(s.mean_mmf) << ',' << format_double(s.stderr_mmf)
               << "\n";
        write_file(prefix + "_summary.csv", os.str());
    }
    {
        std::ostringstream os;
        os << "x,rs_mean,rs_err,nors_mean,nors_err\n";
        for (std::size_t i = 0; i + 1 < res.summary.size(); i += 2)
        {
            const summary_row& rs = res.summary[i];
            const summary_row& nors = res.summary[i + 1];
            os << format_double(rs.sweep_value) << ',' << format_double(rs.mean_mmf) << ','
               << format_double(rs.stderr_mmf) << ',' << format_double(nors.mean_mmf) << ','
               << format_double(nors.stderr_mmf) << "\n";
        }
        write_file(prefix + "_plot.csv", os.str());
    }
}

/// Convenience accessor for the summary mean of one (value, mode) cell.
inline double summary_mean(const experiment_result& res, double value, precoding_mode mode)
{
    for (const auto& s : res.summary)
        if (s.sweep_value == value && s.mode == mode)
            return s.mean_mmf;
    throw std::out_of_range("summary_mean: no such sweep value");
}

} // namespace rsbeam

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
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsbeam/channel.hpp"

namespace rsbeam {

/// Locale-independent, shortest round-trip decimal rendering. All CSV output
/// goes through here so re-runs are byte-identical.
inline std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// Fixed-precision variant for report-style columns.
inline std::string format_double(double v, int precision)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, precision);
    return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Complex-matrix CSV: `# complex-matrix rows=R cols=C`, then R lines of
// C comma-separated re,im pairs in row-major order.
// ---------------------------------------------------------------------------

inline void write_complex_matrix(std::ostream& out, const Eigen::MatrixXcd& m)
{
    out << "# complex-matrix rows=" << m.rows() << " cols=" << m.cols() << "\n";
    for (Eigen::Index r = 0; r < m.rows(); ++r)
    {
        for (Eigen::Index c = 0; c < m.cols(); ++c)
        {
            if (c)
                out << ',';
            out << format_double(m(r, c).real()) << ',' << format_double(m(r, c).imag());
        }
        out << "\n";
    }
}

inline Eigen::MatrixXcd read_complex_matrix(std::istream& in)
{
    std::string header;
    if (!std::getline(in, header))
        throw std::runtime_error("complex-matrix: missing header");
    Eigen::Index rows = 0, cols = 0;
    if (std::sscanf(header.c_str(), "# complex-matrix rows=%td cols=%td", &rows, &cols) != 2)
        throw std::runtime_error("complex-matrix: malformed header: " + header);
    Eigen::MatrixXcd m(rows, cols);
    std::string line;
    for (Eigen::Index r = 0; r < rows; ++r)
    {
        if (!std::getline(in, line))
            throw std::runtime_error("complex-matrix: truncated file");
        std::stringstream ss(line);
        std::string tok;
        for (Eigen::Index c = 0; c < cols; ++c)
        {
            double re = 0.0, im = 0.0;
            if (!std::getline(ss, tok, ','))
                throw std::runtime_error("complex-matrix: short row");
            re = std::stod(tok);
            if (!std::getline(ss, tok, ','))
                throw std::runtime_error("complex-matrix: short row");
            im = std::stod(tok);
            m(r, c) = {re, im};
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Channel-ensemble CSV: a header line carrying N_t, K, S and the error
// variance, then the estimate followed by the S realizations, each in the
// complex-matrix block format above.
// ---------------------------------------------------------------------------

inline void write_ensemble(std::ostream& out, const channel_ensemble& ens)
{
    out << "# channel-ensemble n_feeds=" << ens.estimate.entries.rows() << " users="
        << ens.estimate.entries.cols() << " samples=" << ens.sample_size() << " error_variance="
        << format_double(ens.error_variance) << "\n";
    write_complex_matrix(out, ens.estimate.entries);
    for (const auto& r : ens.realizations)
        write_complex_matrix(out, r.entries);
}

inline channel_ensemble read_ensemble(std::istream& in)
{
    std::string header;
    if (!std::getline(in, header))
        throw std::runtime_error("channel-ensemble: missing header");
    long nt = 0, k = 0, s = 0;
    double var = 0.0;
    if (std::sscanf(header.c_str(), "# channel-ensemble n_feeds=%ld users=%ld samples=%ld error_variance=%lf",
                    &nt, &k, &s, &var) != 4)
        throw std::runtime_error("channel-ensemble: malformed header: " + header);
    channel_ensemble ens;
    ens.error_variance = var;
    ens.estimate.entries = read_complex_matrix(in);
    ens.estimate.role = channel_role::estimate;
    if (ens.estimate.entries.rows() != nt || ens.estimate.entries.cols() != k)
        throw std::runtime_error("channel-ensemble: estimate dimensions disagree with header");
    ens.realizations.reserve(static_cast<std::size_t>(s));
    for (long i = 0; i < s; ++i)
    {
        channel_matrix r;
        r.entries = read_complex_matrix(in);
        r.role = channel_role::realization;
        ens.realizations.push_back(std::move(r));
    }
    return ens;
}

inline void write_file(const std::string& path, const std::string& contents)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    out << contents;
    if (!out)
        throw std::runtime_error("write failed: " + path);
}

} // namespace rsbeam

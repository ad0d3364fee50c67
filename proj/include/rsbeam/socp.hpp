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
// Dense second-order cone programming by an infeasible-start primal-dual
// interior-point method (Nesterov-Todd scaling, Mehrotra predictor-
// corrector, dense Schur-complement KKT solves with iterative refinement):
//
//   minimize    c'x
//   subject to  Gx + s = h,   s in K = R^l_+  x  Q_d1 x ... x Q_dN,
//
// where Q_d = { (s0, s1) : ||s1|| <= s0 } is the second-order cone of
// dimension d. Problems here are small (a few hundred variables, a few
// thousand cone rows), so everything is dense Eigen.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <vector>

namespace rsbeam::socp {

struct cone_dims
{
    int nonneg = 0;        // leading rows in the nonnegative orthant
    std::vector<int> soc;  // second-order cone dimensions, in row order

    int total() const
    {
        int t = nonneg;
        for (int d : soc)
            t += d;
        return t;
    }
    // barrier degree: 1 per LP row, 1 per second-order cone
    int degree() const { return nonneg + static_cast<int>(soc.size()); }
};

struct problem
{
    Eigen::VectorXd c;
    Eigen::MatrixXd G;
    Eigen::VectorXd h;
    cone_dims cones;

    void validate() const
    {
        if (G.rows() != h.size() || G.cols() != c.size())
            throw std::invalid_argument("socp: inconsistent problem dimensions");
        if (cones.total() != G.rows())
            throw std::invalid_argument("socp: cone dimensions do not cover the rows of G");
        if (cones.nonneg < 0)
            throw std::invalid_argument("socp: negative orthant dimension");
        for (int d : cones.soc)
            if (d < 2)
                throw std::invalid_argument("socp: second-order cones must have dimension >= 2");
    }
};

enum class solve_status
{
    optimal,
    near_optimal, // tolerances relaxed to the `near_*` thresholds
    max_iterations,
    primal_infeasible,
    dual_infeasible,
    numerical_failure
};

inline const char* status_name(solve_status s)
{
    switch (s)
    {
    case solve_status::optimal: return "optimal";
    case solve_status::near_optimal: return "near_optimal";
    case solve_status::max_iterations: return "max_iterations";
    case solve_status::primal_infeasible: return "primal_infeasible";
    case solve_status::dual_infeasible: return "dual_infeasible";
    default: return "numerical_failure";
    }
}

struct settings
{
    double feas_tol = 1e-9;
    double abs_gap_tol = 1e-9;
    double rel_gap_tol = 1e-9;
    // fallback acceptance for degenerate problems (no strict interior);
    // final answers are still re-checked against the caller's contract
    double near_feas_tol = 1e-6;
    double near_gap_tol = 1e-5;
    int max_iterations = 100;
    int stall_iterations = 10; // quit after this many non-improving steps
    double step_fraction = 0.99;
    bool verbose = false;
};

struct solution
{
    solve_status status = solve_status::numerical_failure;
    Eigen::VectorXd x, s, z;
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    double duality_gap = 0.0;
    double rel_gap = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    int iterations = 0;

    bool usable() const
    {
        return status == solve_status::optimal || status == solve_status::near_optimal;
    }
};

namespace detail {

constexpr double k_inf = std::numeric_limits<double>::infinity();

// Nesterov-Todd scaling state: W is block diagonal with diag(lp_w) on the
// orthant and eta * H(wbar) on each second-order cone, H(w) = 2ww' - J
// square-rooted in the usual arrow form. lambda = W z = W^{-1} s.
struct nt_scaling
{
    Eigen::VectorXd lp_w;
    std::vector<double> eta;
    std::vector<Eigen::VectorXd> wbar;
    Eigen::VectorXd lambda;
};

inline bool compute_scaling(const cone_dims& dims, const Eigen::VectorXd& s, const Eigen::VectorXd& z,
                            nt_scaling& w)
{
    const int l = dims.nonneg;
    w.lp_w.resize(l);
    w.lambda.resize(s.size());
    for (int i = 0; i < l; ++i)
    {
        if (!(s(i) > 0.0) || !(z(i) > 0.0))
            return false;
        w.lp_w(i) = std::sqrt(s(i) / z(i));
        w.lambda(i) = std::sqrt(s(i) * z(i));
    }
    w.eta.assign(dims.soc.size(), 0.0);
    w.wbar.assign(dims.soc.size(), {});
    int off = l;
    for (std::size_t k = 0; k < dims.soc.size(); ++k)
    {
        const int d = dims.soc[k];
        const auto sb = s.segment(off, d);
        const auto zb = z.segment(off, d);
        const double res_s = sb(0) * sb(0) - sb.tail(d - 1).squaredNorm();
        const double res_z = zb(0) * zb(0) - zb.tail(d - 1).squaredNorm();
        if (!(res_s > 0.0) || !(res_z > 0.0) || !(sb(0) > 0.0) || !(zb(0) > 0.0))
            return false;
        const double a_s = std::sqrt(res_s);
        const double a_z = std::sqrt(res_z);
        const Eigen::VectorXd sbar = sb / a_s;
        const Eigen::VectorXd zbar = zb / a_z;
        const double gamma = std::sqrt(0.5 * (1.0 + sbar.dot(zbar)));
        Eigen::VectorXd wb(d);
        wb(0) = (sbar(0) + zbar(0)) / (2.0 * gamma);
        wb.tail(d - 1) = (sbar.tail(d - 1) - zbar.tail(d - 1)) / (2.0 * gamma);
        w.eta[k] = std::sqrt(a_s / a_z);
        w.wbar[k] = wb;

        // lambda block = W z, using the arrow form of H(wbar)
        const auto z1 = zb.tail(d - 1);
        const double w1z1 = wb.tail(d - 1).dot(z1);
        Eigen::VectorXd lam(d);
        lam(0) = wb(0) * zb(0) + w1z1;
        lam.tail(d - 1) = zb(0) * wb.tail(d - 1) + z1 + (w1z1 / (1.0 + wb(0))) * wb.tail(d - 1);
        w.lambda.segment(off, d) = w.eta[k] * lam;
        off += d;
    }
    return true;
}

enum class scale_dir
{
    forward, // W v
    inverse  // W^{-1} v
};

inline Eigen::VectorXd apply_scaling(const cone_dims& dims, const nt_scaling& w, const Eigen::VectorXd& v,
                                     scale_dir dir)
{
    Eigen::VectorXd out(v.size());
    const int l = dims.nonneg;
    for (int i = 0; i < l; ++i)
        out(i) = dir == scale_dir::forward ? w.lp_w(i) * v(i) : v(i) / w.lp_w(i);
    int off = l;
    for (std::size_t k = 0; k < dims.soc.size(); ++k)
    {
        const int d = dims.soc[k];
        const auto vb = v.segment(off, d);
        const Eigen::VectorXd& wb = w.wbar[k];
        const double sgn = dir == scale_dir::forward ? 1.0 : -1.0;
        const double scale = dir == scale_dir::forward ? w.eta[k] : 1.0 / w.eta[k];
        const double w1v1 = wb.tail(d - 1).dot(vb.tail(d - 1));
        Eigen::VectorXd r(d);
        r(0) = wb(0) * vb(0) + sgn * w1v1;
        r.tail(d - 1) =
            sgn * vb(0) * wb.tail(d - 1) + vb.tail(d - 1) + (w1v1 / (1.0 + wb(0))) * wb.tail(d - 1);
        out.segment(off, d) = scale * r;
        off += d;
    }
    return out;
}

inline Eigen::VectorXd jordan_product(const cone_dims& dims, const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    Eigen::VectorXd out(a.size());
    const int l = dims.nonneg;
    out.head(l) = a.head(l).cwiseProduct(b.head(l));
    int off = l;
    for (int d : dims.soc)
    {
        const auto ab = a.segment(off, d);
        const auto bb = b.segment(off, d);
        out(off) = ab.dot(bb);
        out.segment(off + 1, d - 1) = ab(0) * bb.tail(d - 1) + bb(0) * ab.tail(d - 1);
        off += d;
    }
    return out;
}

// solves lambda o x = d blockwise (arrow-matrix inverse on each cone)
inline Eigen::VectorXd jordan_solve(const cone_dims& dims, const Eigen::VectorXd& lam, const Eigen::VectorXd& d)
{
    Eigen::VectorXd out(d.size());
    const int l = dims.nonneg;
    out.head(l) = d.head(l).cwiseQuotient(lam.head(l));
    int off = l;
    for (int dim : dims.soc)
    {
        const auto lb = lam.segment(off, dim);
        const auto db = d.segment(off, dim);
        const double det = lb(0) * lb(0) - lb.tail(dim - 1).squaredNorm();
        const double x0 = (lb(0) * db(0) - lb.tail(dim - 1).dot(db.tail(dim - 1))) / det;
        out(off) = x0;
        out.segment(off + 1, dim - 1) = (db.tail(dim - 1) - x0 * lb.tail(dim - 1)) / lb(0);
        off += dim;
    }
    return out;
}

inline Eigen::VectorXd cone_identity(const cone_dims& dims)
{
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dims.total());
    e.head(dims.nonneg).setOnes();
    int off = dims.nonneg;
    for (int d : dims.soc)
    {
        e(off) = 1.0;
        off += d;
    }
    return e;
}

// largest violation of cone membership (<= 0 means strictly inside)
inline double cone_violation(const cone_dims& dims, const Eigen::VectorXd& v)
{
    double worst = -k_inf;
    for (int i = 0; i < dims.nonneg; ++i)
        worst = std::max(worst, -v(i));
    int off = dims.nonneg;
    for (int d : dims.soc)
    {
        worst = std::max(worst, v.segment(off + 1, d - 1).norm() - v(off));
        off += d;
    }
    return worst;
}

// max alpha >= 0 with u + alpha du still in the cone (u strictly inside)
inline double max_step(const cone_dims& dims, const Eigen::VectorXd& u, const Eigen::VectorXd& du)
{
    double alpha = k_inf;
    for (int i = 0; i < dims.nonneg; ++i)
        if (du(i) < 0.0)
            alpha = std::min(alpha, -u(i) / du(i));
    int off = dims.nonneg;
    for (int dim : dims.soc)
    {
        const auto ub = u.segment(off, dim);
        const auto db = du.segment(off, dim);
        const double a = db(0) * db(0) - db.tail(dim - 1).squaredNorm();
        const double b = ub(0) * db(0) - ub.tail(dim - 1).dot(db.tail(dim - 1));
        const double c = ub(0) * ub(0) - ub.tail(dim - 1).squaredNorm();
        double root = k_inf;
        const double disc = b * b - a * c;
        if (a < 0.0 || (b < 0.0 && disc > 0.0))
        {
            const double sq = std::sqrt(std::max(disc, 0.0));
            const double q = -(b + (b >= 0.0 ? sq : -sq));
            // candidate roots q/a and c/q of a t^2 + 2 b t + c
            for (double r : {a != 0.0 ? q / a : k_inf, q != 0.0 ? c / q : k_inf})
                if (r > 0.0)
                    root = std::min(root, r);
        }
        if (db(0) < 0.0)
            root = std::min(root, -ub(0) / db(0));
        alpha = std::min(alpha, root);
        off += dim;
    }
    return alpha;
}

} // namespace detail

namespace detail {

// Ruiz-style equilibration. Row scales are uniform inside each second-order
// cone block (any positive per-block scalar preserves the cone); columns
// scale freely. Returns multipliers applied as G <- R G C, h <- R h,
// c <- C c; the solution maps back as x = C x', s = s'/R, z = R z'.
inline void equilibrate(const cone_dims& dims, Eigen::MatrixXd& g, Eigen::VectorXd& h, Eigen::VectorXd& c,
                        Eigen::VectorXd& row_mult, Eigen::VectorXd& col_mult)
{
    const Eigen::Index m = g.rows();
    const Eigen::Index n = g.cols();
    row_mult = Eigen::VectorXd::Ones(m);
    col_mult = Eigen::VectorXd::Ones(n);
    auto clamp_scale = [](double v) { return std::clamp(v, 1e-6, 1e6); };

    for (int pass = 0; pass < 5; ++pass)
    {
        for (int i = 0; i < dims.nonneg; ++i)
        {
            const double r = g.row(i).cwiseAbs().maxCoeff();
            if (r > 0.0)
            {
                const double s = clamp_scale(1.0 / std::sqrt(r));
                g.row(i) *= s;
                h(i) *= s;
                row_mult(i) *= s;
            }
        }
        int off = dims.nonneg;
        for (int d : dims.soc)
        {
            const double r = g.middleRows(off, d).cwiseAbs().maxCoeff();
            if (r > 0.0)
            {
                const double s = clamp_scale(1.0 / std::sqrt(r));
                g.middleRows(off, d) *= s;
                h.segment(off, d) *= s;
                row_mult.segment(off, d) *= s;
            }
            off += d;
        }
        for (Eigen::Index j = 0; j < n; ++j)
        {
            const double r = g.col(j).cwiseAbs().maxCoeff();
            if (r > 0.0)
            {
                const double s = clamp_scale(1.0 / std::sqrt(r));
                g.col(j) *= s;
                c(j) *= s;
                col_mult(j) *= s;
            }
        }
    }
}

} // namespace detail

/// Solves the cone program. The returned solution carries the final
/// residuals (measured on the original, unequilibrated data) so callers can
/// re-check the contract themselves.
inline solution solve(const problem& orig, const settings& opts = {})
{
    using namespace detail;
    orig.validate();

    problem prob = orig; // equilibrated working copy
    Eigen::VectorXd row_mult, col_mult;
    equilibrate(orig.cones, prob.G, prob.h, prob.c, row_mult, col_mult);

    const Eigen::Index n = prob.c.size();
    const cone_dims& dims = prob.cones;
    const double degree = static_cast<double>(dims.degree());

    solution sol;
    sol.x = Eigen::VectorXd::Zero(n);

    // maps the equilibrated iterate back to the original data and restates
    // objectives and residuals there
    auto finish = [&](solution s) {
        s.x = col_mult.asDiagonal() * s.x;
        s.s = s.s.cwiseQuotient(row_mult);
        s.z = row_mult.asDiagonal() * s.z;
        s.primal_objective = orig.c.dot(s.x);
        s.dual_objective = -orig.h.dot(s.z);
        s.duality_gap = s.s.dot(s.z);
        s.rel_gap =
            s.duality_gap / std::max({1.0, std::abs(s.primal_objective), std::abs(s.dual_objective)});
        s.primal_residual = (orig.G * s.x + s.s - orig.h).norm() / std::max(1.0, orig.h.norm());
        s.dual_residual = (orig.G.transpose() * s.z + orig.c).norm() / std::max(1.0, orig.c.norm());
        return s;
    };

    // --- cone block offsets and the constant parts of the Schur complement
    std::vector<int> soc_offset(dims.soc.size());
    {
        int off = dims.nonneg;
        for (std::size_t k = 0; k < dims.soc.size(); ++k)
        {
            soc_offset[k] = off;
            off += dims.soc[k];
        }
    }
    // C_k = G_k' J G_k = g0 g0' - G1' G1 per second-order cone (constant)
    std::vector<Eigen::MatrixXd> soc_cjg(dims.soc.size());
    for (std::size_t k = 0; k < dims.soc.size(); ++k)
    {
        const int d = dims.soc[k];
        const auto gk = prob.G.middleRows(soc_offset[k], d);
        soc_cjg[k] = gk.row(0).transpose() * gk.row(0) - gk.bottomRows(d - 1).transpose() * gk.bottomRows(d - 1);
    }

    // --- initial point: least-squares x, then shift s and z into the cone
    Eigen::MatrixXd gtg = prob.G.transpose() * prob.G;
    const double reg0 = 1e-12 * (gtg.trace() / static_cast<double>(n) + 1.0);
    gtg.diagonal().array() += reg0;
    Eigen::LDLT<Eigen::MatrixXd> gtg_ldlt(gtg);
    sol.x = gtg_ldlt.solve(prob.G.transpose() * prob.h);

    const Eigen::VectorXd e = cone_identity(dims);
    sol.s = prob.h - prob.G * sol.x;
    {
        const double viol = cone_violation(dims, sol.s);
        if (viol >= -1e-8)
            sol.s += (1.0 + viol) * e;
    }
    sol.z = -gtg_ldlt.solve(prob.c); // minimal-norm-ish G'z = -c
    sol.z = prob.G * sol.z;
    {
        const double viol = cone_violation(dims, sol.z);
        if (viol >= -1e-8)
            sol.z += (1.0 + viol) * e;
    }

    const double h_norm = std::max(1.0, prob.h.norm());
    const double c_norm = std::max(1.0, prob.c.norm());

    nt_scaling w;
    Eigen::MatrixXd schur(n, n);
    Eigen::LDLT<Eigen::MatrixXd> schur_fact;

    solution best = sol;
    double best_score = k_inf;
    bool have_best = false;
    int stalled = 0;

    auto evaluate = [&](solution& out) {
        out.primal_objective = prob.c.dot(out.x);
        out.dual_objective = -prob.h.dot(out.z);
        out.duality_gap = out.s.dot(out.z);
        out.rel_gap = out.duality_gap / std::max({1.0, std::abs(out.primal_objective), std::abs(out.dual_objective)});
        out.primal_residual = (prob.G * out.x + out.s - prob.h).norm() / h_norm;
        out.dual_residual = (prob.G.transpose() * out.z + prob.c).norm() / c_norm;
    };

    // Solves the scaled KKT system for given right-hand sides:
    //   G' dz                 = bx
    //   G dx + ds             = bz
    //   W dz + W^{-1} ds      = lambda \ d      (linearized centrality)
    auto kkt_solve = [&](const Eigen::VectorXd& bx, const Eigen::VectorXd& bz, const Eigen::VectorXd& d,
                         Eigen::VectorXd& dx, Eigen::VectorXd& dz, Eigen::VectorXd& ds) {
        const Eigen::VectorXd q = jordan_solve(dims, w.lambda, d);
        const Eigen::VectorXd wq = apply_scaling(dims, w, q, scale_dir::forward);
        const Eigen::VectorXd rhs_z = bz - wq; // G dx - W^2 dz = rhs_z
        // rhs_x = bx + G' W^{-2} rhs_z
        Eigen::VectorXd winv_rhs = apply_scaling(dims, w, rhs_z, scale_dir::inverse);
        winv_rhs = apply_scaling(dims, w, winv_rhs, scale_dir::inverse);
        Eigen::VectorXd rhs_x = bx + prob.G.transpose() * winv_rhs;
        dx = schur_fact.solve(rhs_x);
        for (int refine = 0; refine < 2; ++refine)
        {
            // true residual of G' W^{-2} (G dx - rhs_z) = bx
            Eigen::VectorXd tmp = apply_scaling(dims, w, prob.G * dx - rhs_z, scale_dir::inverse);
            tmp = apply_scaling(dims, w, tmp, scale_dir::inverse);
            const Eigen::VectorXd resid = bx - prob.G.transpose() * tmp;
            if (resid.norm() <= 1e-13 * (1.0 + rhs_x.norm()))
                break;
            dx += schur_fact.solve(resid);
        }
        Eigen::VectorXd t = prob.G * dx - rhs_z; // = W^2 dz
        dz = apply_scaling(dims, w, t, scale_dir::inverse);
        dz = apply_scaling(dims, w, dz, scale_dir::inverse);
        ds = bz - prob.G * dx;
    };

    for (int iter = 0; iter <= opts.max_iterations; ++iter)
    {
        evaluate(sol);
        sol.iterations = iter;

        const double score = std::max({sol.primal_residual, sol.dual_residual, std::max(sol.rel_gap, 0.0)});
        if (!have_best || score < best_score)
        {
            best = sol;
            best_score = score;
            have_best = true;
            stalled = 0;
        }
        else if (++stalled >= opts.stall_iterations)
        {
            break; // residuals diverging or stuck; keep the best iterate
        }

        if (opts.verbose)
            std::printf("socp iter %3d  pcost % .6e  gap %.3e  pres %.3e  dres %.3e\n", iter,
                        sol.primal_objective, sol.duality_gap, sol.primal_residual, sol.dual_residual);

        if (sol.primal_residual <= opts.feas_tol && sol.dual_residual <= opts.feas_tol &&
            (sol.duality_gap <= opts.abs_gap_tol || sol.rel_gap <= opts.rel_gap_tol))
        {
            sol.status = solve_status::optimal;
            return finish(sol);
        }

        // infeasibility certificates (not expected for well-posed inputs)
        const double hz = -prob.h.dot(sol.z);
        if (hz > 0.0 && (prob.G.transpose() * sol.z).norm() / hz <= 1e-11 * c_norm)
        {
            sol.status = solve_status::primal_infeasible;
            return finish(sol);
        }
        const double cx = prob.c.dot(sol.x);
        if (cx < 0.0 && (prob.G * sol.x + sol.s).norm() / (-cx) <= 1e-11 * h_norm &&
            cone_violation(dims, sol.s) <= 1e-11)
        {
            sol.status = solve_status::dual_infeasible;
            return finish(sol);
        }

        if (iter == opts.max_iterations)
            break;

        if (!compute_scaling(dims, sol.s, sol.z, w))
            break; // boundary hit; report the best iterate below

        // Schur complement G' W^{-2} G, exploiting W^{-2} = eta^{-2} (2vv' - J)
        // on each second-order cone with v = J wbar.
        schur.setZero();
        if (dims.nonneg > 0)
        {
            const auto glp = prob.G.topRows(dims.nonneg);
            schur.noalias() =
                glp.transpose() * w.lp_w.array().square().inverse().matrix().asDiagonal() * glp;
        }
        for (std::size_t k = 0; k < dims.soc.size(); ++k)
        {
            const int d = dims.soc[k];
            const auto gk = prob.G.middleRows(soc_offset[k], d);
            Eigen::VectorXd v = w.wbar[k];
            v.tail(d - 1) = -v.tail(d - 1); // v = J wbar
            const Eigen::VectorXd a = gk.transpose() * v;
            const double inv_eta2 = 1.0 / (w.eta[k] * w.eta[k]);
            schur.noalias() += inv_eta2 * (2.0 * a * a.transpose() - soc_cjg[k]);
        }
        const double reg = 1e-13 * (schur.trace() / static_cast<double>(n) + 1.0);
        schur.diagonal().array() += reg;
        schur_fact.compute(schur);
        if (schur_fact.info() != Eigen::Success)
            break;

        const double mu = sol.duality_gap / degree;
        const Eigen::VectorXd res_x = prob.G.transpose() * sol.z + prob.c;
        const Eigen::VectorXd res_z = prob.G * sol.x + sol.s - prob.h;

        // predictor
        Eigen::VectorXd dx_a, dz_a, ds_a;
        const Eigen::VectorXd lam_sq = jordan_product(dims, w.lambda, w.lambda);
        kkt_solve(-res_x, -res_z, -lam_sq, dx_a, dz_a, ds_a);
        const double alpha_aff =
            std::min({1.0, max_step(dims, sol.s, ds_a), max_step(dims, sol.z, dz_a)});
        const double gap_aff = (sol.s + alpha_aff * ds_a).dot(sol.z + alpha_aff * dz_a);
        double sigma = gap_aff / std::max(sol.duality_gap, 1e-300);
        sigma = std::clamp(sigma * sigma * sigma, 0.0, 1.0);

        // corrector (combined step)
        const Eigen::VectorXd ws_a = apply_scaling(dims, w, ds_a, scale_dir::inverse);
        const Eigen::VectorXd wz_a = apply_scaling(dims, w, dz_a, scale_dir::forward);
        const Eigen::VectorXd d_comb = -lam_sq - jordan_product(dims, ws_a, wz_a) + sigma * mu * e;
        Eigen::VectorXd dx, dz, ds;
        kkt_solve(-res_x, -res_z, d_comb, dx, dz, ds);

        double alpha = std::min({1.0, opts.step_fraction * max_step(dims, sol.s, ds),
                                 opts.step_fraction * max_step(dims, sol.z, dz)});
        if (!(alpha > 1e-10))
            break; // step collapsed

        sol.x += alpha * dx;
        sol.s += alpha * ds;
        sol.z += alpha * dz;
    }

    // no clean exit: fall back to the best iterate seen
    sol = best;
    evaluate(sol);
    if (sol.primal_residual <= opts.near_feas_tol && sol.dual_residual <= opts.near_feas_tol &&
        (sol.duality_gap <= opts.near_gap_tol || sol.rel_gap <= opts.near_gap_tol))
        sol.status = solve_status::near_optimal;
    else if (sol.iterations >= opts.max_iterations)
        sol.status = solve_status::max_iterations;
    else
        sol.status = solve_status::numerical_failure;
    return finish(sol);
}

} // namespace rsbeam::socp

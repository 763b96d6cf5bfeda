// SPDX-License-Identifier: MIT
/**
 * @file continuum_solver.hpp
 * @brief Breadth/depth solution of the continuum-limit problem.
 *
 * In the continuum limit the agent's state at time t is the breadth x
 * (measure of approaches opened) and the depth d = t/x (effort per
 * approach).  The optimal breadth is pinned down pointwise in t by a
 * first-order condition that, written in depth, reads
 *
 *     delta0 S_H(d,t) phi_H(d) + (1 - delta0) S_E(d,t) phi_E(d) = 0,
 *     S_theta(d,t) = exp(-nu0 t (1 - e^{-lambda_theta d}) / d),
 *
 * with phi_theta the depth value function from core_model.hpp.  Under known
 * difficulty the solution is a constant depth d* and breadth is linear.  The
 * header also runs the discrete-to-continuum convergence experiment.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "brainstorm/core_model.hpp"
#include "brainstorm/discrete_solver.hpp"
#include "brainstorm/errors.hpp"
#include "brainstorm/numerics.hpp"

namespace brainstorm {

/// Breadth path on a time grid with diagnostics.
struct Trajectory {
    std::vector<double> times;
    std::vector<double> breadth;      ///< x(t)
    std::vector<double> depth;        ///< t / x(t)
    std::vector<double> el_residual;  ///< first-order condition residual / (1 - F)
    std::vector<bool> held;           ///< true where no interior root existed and x was held
};

namespace detail {

inline double depth_root(double r, double nu0, double c, double lambda, double alpha) {
    if (!(lambda > 0.0) || !(alpha * nu0 > c)) return kInf;
    auto f = [&](double d) { return depth_value(r, nu0, c, lambda, d, alpha); };
    auto df = [&](double d) { return depth_value_derivative(r, nu0, c, lambda, d, alpha); };
    double hi = 1.0 / lambda;
    for (int k = 0; k < 200 && f(hi) < 0.0; ++k) hi *= 2.0;
    return numerics::monotone_root(f, df, 0.0, hi, 3, "constant depth");
}

/// Mixture of depth values with the breadth-dependent posterior weights at time t.
struct DepthCondition {
    const ModelParams& p;
    double t;
    double alpha;

    [[nodiscard]] double log_weight(Difficulty th, double d) const {
        const double l = p.lambda(th);
        const double pr = p.prior(th);
        if (pr <= 0.0) return -std::numeric_limits<double>::infinity();
        return std::log(pr) - p.nu0 * t * numerics::one_minus_exp(l * d) / d;
    }
    /// Posterior-weighted depth value (sign-equivalent to the raw condition).
    [[nodiscard]] double operator()(double d) const {
        const double wH = log_weight(Difficulty::hard, d);
        const double wE = log_weight(Difficulty::easy, d);
        const double norm = numerics::log_add(wH, wE);
        double v = 0.0;
        if (std::isfinite(wH))
            v += std::exp(wH - norm) * depth_value(p.r, p.nu0, p.c, p.lambdaH, d, alpha);
        if (std::isfinite(wE))
            v += std::exp(wE - norm) * depth_value(p.r, p.nu0, p.c, p.lambdaE, d, alpha);
        return v;
    }
};

}  // namespace detail

/// Constant optimal depth d* under known difficulty.
inline double constant_depth(const ModelParams& p) {
    if (!p.known_difficulty()) throw DomainError("constant_depth: requires lambdaE == lambdaH");
    if (!(p.lambdaE > 0.0)) throw DomainError("constant_depth: requires lambda > 0");
    validate(p, Regime::continuum);
    return detail::depth_root(p.r, p.nu0, p.c, p.lambdaE, 1.0);
}

/// Depth limits (d0 as t -> 0, dH as t -> infinity) under share alpha.
struct DepthLimits {
    double d0 = 0.0;
    double dH = kInf;
};

inline DepthLimits depth_limits(const ModelParams& p, double alpha = 1.0) {
    validate(p, Regime::continuum);
    DepthLimits out;
    out.dH = p.delta0 > 0.0 ? detail::depth_root(p.r, p.nu0, p.c, p.lambdaH, alpha)
                            : detail::depth_root(p.r, p.nu0, p.c, p.lambdaE, alpha);
    auto mix = [&](double d) {
        double v = -p.r * p.c;
        for (Difficulty th : kStates) {
            const double l = p.lambda(th);
            const double w = p.prior(th);
            if (w == 0.0) continue;
            // depth_value minus its -rc term, prior-weighted
            v += w * (depth_value(p.r, p.nu0, p.c, l, d, alpha) + p.r * p.c);
        }
        return v;
    };
    if (!(alpha * p.nu0 > p.c)) {
        out.d0 = kInf;
        return out;
    }
    double hi = 1.0 / std::max(p.lambdaE, 1e-12);
    for (int k = 0; k < 200 && mix(hi) < 0.0; ++k) hi *= 2.0;
    out.d0 = numerics::bisect(mix, 0.0, hi, 1e-15 * std::max(1.0, hi), "initial depth");
    return out;
}

/// Optimal breadth at a single time (share alpha scales the success payoff).
struct BreadthPoint {
    double x = 0.0;
    double depth = kInf;
    double residual = 0.0;
    bool root_found = true;
};

/**
 * Solves the depth condition at time t.  The bracket is [d0, dH] (slightly
 * widened); when the hard state never yields success dH is infinite and a
 * geometric ladder is used, and the point is reported without a root when
 * the condition stays negative.
 */
inline BreadthPoint breadth_at(const ModelParams& p, double t, double alpha = 1.0,
                               const DepthLimits* limits = nullptr) {
    if (!(t > 0.0)) throw DomainError("breadth_at: t must be > 0");
    DepthLimits lim = limits ? *limits : depth_limits(p, alpha);
    BreadthPoint out;
    if (!std::isfinite(lim.d0)) {
        out.x = 0.0;
        out.depth = kInf;
        out.root_found = false;
        return out;
    }
    detail::DepthCondition cond{p, t, alpha};
    double lo = lim.d0 * (1.0 - 1e-6);
    double hi = lim.dH * (1.0 + 1e-6);
    if (cond(lo) > 0.0) lo = 0.5 * lim.d0;  // guards roundoff at tiny t
    if (!std::isfinite(hi)) {
        hi = kInf;
        for (int k = 0; k <= 60; ++k) {
            const double d = lim.d0 * std::ldexp(1.0, k);
            if (cond(d) > 0.0) {
                hi = d;
                break;
            }
        }
        if (!std::isfinite(hi)) {
            out.root_found = false;
            return out;
        }
    }
    const double d = numerics::bisect(cond, lo, hi, 1e-15 * hi, "trajectory depth");
    out.depth = d;
    out.x = t / d;
    const ContinuumPartials P = continuum_partials(p, out.x, t);
    out.residual = p.r * alpha * P.fx - p.r * p.c - p.c * P.ft;
    return out;
}

namespace detail {

inline Trajectory solve_trajectory_alpha(const ModelParams& p, std::span<const double> grid,
                                         double alpha) {
    if (grid.empty()) throw DomainError("solve_trajectory: empty grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0)) throw DomainError("solve_trajectory: grid must be positive");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw DomainError("solve_trajectory: grid must be strictly increasing");
    }
    const DepthLimits lim = depth_limits(p, alpha);
    Trajectory tr;
    tr.times.assign(grid.begin(), grid.end());
    double last_x = 0.0;
    for (double t : grid) {
        BreadthPoint bp = breadth_at(p, t, alpha, &lim);
        if (!bp.root_found) {
            // Exploration has stopped: keep the breadth reached so far.
            bp.x = last_x;
            bp.depth = last_x > 0.0 ? t / last_x : kInf;
            bp.residual = 0.0;
        }
        last_x = bp.x;
        tr.breadth.push_back(bp.x);
        tr.depth.push_back(bp.depth);
        tr.el_residual.push_back(bp.residual);
        tr.held.push_back(!bp.root_found);
    }
    return tr;
}

}  // namespace detail

/// First-best breadth trajectory on @p grid.
inline Trajectory solve_trajectory(const ModelParams& p, std::span<const double> grid) {
    validate(p, Regime::continuum);
    return detail::solve_trajectory_alpha(p, grid, 1.0);
}

/**
 * Discounted payoff int_0^inf e^{-rt} (r F(x,t) - (1-F) c x'(t)) dt of a
 * breadth path.  x is interpolated linearly from the origin through the grid
 * points and continued at the final depth; each piece is integrated by
 * Gauss-Kronrod until the discount factor drops below 1e-12.
 */
inline double continuum_payoff(const ModelParams& p, const Trajectory& tr, double success_share = 1.0,
                               double cost_share = 1.0) {
    validate(p, Regime::basic);
    const std::size_t n = tr.times.size();
    if (n == 0 || tr.breadth.size() != n) throw DomainError("continuum_payoff: malformed trajectory");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(tr.breadth[i] >= 0.0)) throw PreconditionError("continuum_payoff: negative breadth");
        if (i > 0 && tr.breadth[i] < tr.breadth[i - 1] * (1.0 - 1e-12))
            throw PreconditionError("continuum_payoff: breadth must be nondecreasing");
        if (i > 0 && tr.breadth[i] > 0.0 && tr.breadth[i - 1] > 0.0 &&
            tr.times[i] / tr.breadth[i] < tr.times[i - 1] / tr.breadth[i - 1] * (1.0 - 1e-9))
            throw PreconditionError("continuum_payoff: depth must be nondecreasing");
    }
    std::vector<double> ts{0.0}, xs{0.0};
    ts.insert(ts.end(), tr.times.begin(), tr.times.end());
    xs.insert(xs.end(), tr.breadth.begin(), tr.breadth.end());
    const double T = std::max(ts.back(), 28.0 / p.r);
    if (T > ts.back()) {
        const double slope = xs.back() / ts.back();  // constant final depth
        const double dt = (T - ts.back()) / 200.0;
        const double t0 = ts.back();
        for (int k = 1; k <= 200; ++k) {
            ts.push_back(t0 + k * dt);
            xs.push_back(slope * ts.back());
        }
    }
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        const double a = ts[i], b = ts[i + 1];
        const double xdot = (xs[i + 1] - xs[i]) / (b - a);
        auto f = [&](double t) {
            const double x = xs[i] + xdot * (t - a);
            const double F = continuum_cdf(p, x, t);
            return std::exp(-p.r * t) *
                   (success_share * p.r * F - cost_share * (1.0 - F) * p.c * xdot);
        };
        total += numerics::integrate(f, a, b, 1e-13);
    }
    return total;
}

/// Closed-form payoff of a linear breadth path x = t/d under known difficulty.
inline double linear_path_payoff(const ModelParams& p, double d) {
    const double k = p.nu0 * numerics::one_minus_exp(p.lambdaE * d);
    return (k - p.c) / (p.r * d + k);
}

/// Sup-distance between the normalised arm count and the continuum breadth.
struct ConvergenceRow {
    double n = 0.0;
    double sup_gap = kInf;
    double argmax_t = 0.0;
    std::size_t arms = 0;             ///< approaches brainstormed by the window end
    std::vector<double> step_times;   ///< j K_j^n inside the window
    bool ok = true;
    std::string error;
};

/// Scaled problem: validity nu0/n, rates n lambda, cost c/n.
inline ModelParams scaled_problem(const ModelParams& p, double n) {
    ModelParams q = p;
    q.nu0 = p.nu0 / n;
    q.lambdaE = p.lambdaE * n;
    q.lambdaH = p.lambdaH * n;
    q.c = p.c / n;
    return q;
}

/**
 * For each scale n, solves the scaled discrete problem and measures
 * sup_t |N^n(t) - x*(t)| over [grid.front(), grid.back()], where
 * N^n(t) = (1 + #{j : j K_j^n < t}) / n.  Both functions are monotone and N^n
 * is a step function, so the supremum is attained at window endpoints or at
 * one-sided limits at jump times; it is computed exactly there.
 */
inline std::vector<ConvergenceRow> convergence_experiment(const ModelParams& p,
                                                          std::span<const double> n_values,
                                                          std::span<const double> grid) {
    validate(p, Regime::continuum);
    if (grid.size() < 2) throw DomainError("convergence_experiment: grid needs >= 2 points");
    const double t_lo = grid.front(), t_hi = grid.back();
    const DepthLimits lim = depth_limits(p);
    auto xstar = [&](double t) {
        BreadthPoint bp = breadth_at(p, t, 1.0, &lim);
        return bp.x;
    };
    std::vector<ConvergenceRow> rows;
    for (double n : n_values) {
        ConvergenceRow row;
        row.n = n;
        try {
            if (!(n >= 1.0)) throw DomainError("convergence_experiment: n must be >= 1");
            const ModelParams q = scaled_problem(p, n);
            validate(q, Regime::discrete);
            const ValidityArm e = arm_for(q, Difficulty::easy), h = arm_for(q, Difficulty::hard);
            // Solve thresholds until the brainstorm calendar passes the window.
            std::vector<double> jumps;
            std::size_t chunk = 64;
            std::size_t solved = 0;
            bool done = false;
            while (!done) {
                const std::size_t target = solved + chunk;
                ThresholdSequence seq =
                    detail::solve_threshold_sequence(e, h, q.r, q.c, q.delta0, target);
                jumps.clear();
                for (double tb : seq.brainstorm_times) {
                    if (tb >= t_hi) {
                        done = true;
                        break;
                    }
                    jumps.push_back(tb);
                }
                if (seq.truncated()) done = true;
                solved = target;
                chunk *= 2;
                if (solved > 50'000'000) throw SolverError("convergence_experiment: too many arms");
            }
            auto count_before = [&](double t) {  // #{j : t_j < t}
                return static_cast<double>(std::lower_bound(jumps.begin(), jumps.end(), t) -
                                           jumps.begin());
            };
            double best = -1.0, best_t = t_lo;
            auto probe = [&](double t, double N) {
                const double gap = std::fabs(N - xstar(t));
                if (gap > best) {
                    best = gap;
                    best_t = t;
                }
            };
            probe(t_lo, (1.0 + count_before(t_lo)) / n);
            probe(t_hi, (1.0 + count_before(t_hi)) / n);
            for (std::size_t j = 0; j < jumps.size(); ++j) {
                const double tj = jumps[j];
                if (tj < t_lo) continue;
                row.step_times.push_back(tj);
                const double xs = xstar(tj);
                const double left = (1.0 + count_before(tj)) / n;
                const double right = left + 1.0 / n;
                const double gap = std::max(std::fabs(left - xs), std::fabs(right - xs));
                if (gap > best) {
                    best = gap;
                    best_t = tj;
                }
            }
            row.sup_gap = best;
            row.argmax_t = best_t;
            row.arms = static_cast<std::size_t>(1.0 + count_before(t_hi));
        } catch (const std::exception& ex) {
            row.ok = false;
            row.error = ex.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace brainstorm

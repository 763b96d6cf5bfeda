// SPDX-License-Identifier: MIT
/**
 * @file contracts.hpp
 * @brief Share contracts between a principal and an exploring agent.
 *
 * The agent solves the continuum problem but keeps only a share alpha of the
 * success payoff while bearing the full brainstorming cost.  This header
 * provides:
 *
 *  - the agent's best response to a constant share and the principal's
 *    optimal constant share;
 *  - the optimal dynamic (committed) contract: a breadth law solved
 *    pointwise in t, the incentive share I(x,t) needed to induce it, the
 *    distortion relative to first best, and the share path
 *    alpha(t) = int_t^inf r e^{-r(s-t)} I(s) ds;
 *  - the no-commitment stationary share under known difficulty;
 *  - extensive-margin (work/shirk) benchmark contracts.
 */

#pragma once

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "brainstorm/continuum_solver.hpp"
#include "brainstorm/core_model.hpp"
#include "brainstorm/errors.hpp"
#include "brainstorm/numerics.hpp"

namespace brainstorm {

// ---------------------------------------------------------------------------
// Constant shares
// ---------------------------------------------------------------------------

/// Agent's breadth path when it keeps a constant share alpha.
inline Trajectory agent_best_response(const ModelParams& p, double alpha,
                                      std::span<const double> grid) {
    validate(p, Regime::continuum);
    if (!(alpha <= 1.0)) throw DomainError("agent_best_response: alpha must be <= 1");
    if (!(alpha * p.nu0 > p.c)) {
        // The share cannot cover the brainstorming cost: no exploration.
        Trajectory tr;
        tr.times.assign(grid.begin(), grid.end());
        tr.breadth.assign(grid.size(), 0.0);
        tr.depth.assign(grid.size(), kInf);
        tr.el_residual.assign(grid.size(), 0.0);
        tr.held.assign(grid.size(), true);
        return tr;
    }
    return detail::solve_trajectory_alpha(p, grid, alpha);
}

/// Principal's payoff (1 - alpha) int_0^inf r e^{-rt} F(x(t; alpha), t) dt.
inline double static_share_profit(const ModelParams& p, double alpha) {
    validate(p, Regime::continuum);
    if (!(alpha * p.nu0 > p.c) || alpha >= 1.0) return 0.0;
    if (p.known_difficulty()) {
        const double d = detail::depth_root(p.r, p.nu0, p.c, p.lambdaE, alpha);
        const double k = p.nu0 * numerics::one_minus_exp(p.lambdaE * d) / d;
        return (1.0 - alpha) * k / (p.r + k);
    }
    const DepthLimits lim = depth_limits(p, alpha);
    // Substitute u = 1 - e^{-rt}: int_0^1 F(x(t(u)), t(u)) du.
    auto f = [&](double u) {
        if (u <= 0.0) return 0.0;
        if (u >= 1.0) u = std::nextafter(1.0, 0.0);
        const double t = -std::log1p(-u) / p.r;
        const BreadthPoint bp = breadth_at(p, t, alpha, &lim);
        return continuum_cdf(p, bp.x, t);
    };
    return (1.0 - alpha) * numerics::integrate(f, 0.0, 1.0, 1e-10);
}

struct StaticShare {
    double alpha = 1.0;
    double profit = 0.0;
};

/// Profit-maximising constant share.
inline StaticShare optimal_static_share(const ModelParams& p) {
    validate(p, Regime::continuum);
    const double lo = p.c / p.nu0;
    auto [a, v] = numerics::maximize([&](double al) { return static_share_profit(p, al); }, lo,
                                     1.0, 40);
    return {a, v};
}

// ---------------------------------------------------------------------------
// Dynamic contract
// ---------------------------------------------------------------------------

/// Pointwise quantities of the dynamic contract at (x, t).
struct ContractTerms {
    double law = 0.0;         ///< breadth law / (1 - F)
    double incentive = 0.0;   ///< I(x, t)
    double distortion = 0.0;  ///< Delta(x, t)
    double costate = 0.0;     ///< F / F_x
};

inline ContractTerms contract_terms(const ModelParams& p, double x, double t) {
    const ContinuumPartials P = continuum_partials(p, x, t);
    const double r = p.r, c = p.c;
    // Bracket of the distortion, divided by (1 - F):
    //   (fxx / fx)(r + ft) c + fx r c - c fxt.
    // Written through the posterior moments of the per-state exponents, the
    // fx^2 and fx ft parts cancel exactly; the direct form loses all accuracy
    // once F / (1 - F) is large.
    const double B = c * ((P.mean_gxx - P.var_gx) * (r + P.ft) / P.fx - P.mean_gxt + P.cov_gx_gt);
    const double odds = P.F / P.survival;  // F / (1 - F)
    ContractTerms out;
    out.distortion = odds * B / (P.fx * P.fx);
    out.law = r * P.fx - r * c - c * P.ft + P.fx * out.distortion;
    out.incentive = (r + P.ft) * c / (r * P.fx);
    out.costate = P.F / P.Fx;
    return out;
}

/// Dynamic-contract breadth at time t, bracketed below the first-best breadth.
inline double contract_breadth(const ModelParams& p, double t, double x_fb) {
    auto law = [&](double x) { return contract_terms(p, x, t).law; };
    double hi = x_fb;
    double lo = x_fb;
    if (law(hi) > 0.0) {
        for (int k = 0; k < 200 && law(hi) > 0.0; ++k) hi *= 2.0;
        lo = hi / 2.0;
    } else {
        for (int k = 0; k < 2000 && law(lo) <= 0.0; ++k) lo *= 0.5;
    }
    return numerics::bisect(law, lo, hi, 1e-15 * hi, "contract breadth");
}

/// Share path and diagnostics of the optimal dynamic contract.
struct ContractPath {
    std::vector<double> times;
    std::vector<double> alpha;
    std::vector<double> x_alpha;
    std::vector<double> x_first_best;
    std::vector<double> incentive;
    std::vector<double> distortion;
    std::vector<double> law_residual;
    std::vector<double> costate;
    std::vector<bool> out_of_range;  ///< alpha outside [0, 1] (reported, never clamped)
};

/**
 * Optimal dynamic contract on @p grid.
 *
 * alpha is integrated right to left: alpha(t_i) = e^{-r h} alpha(t_{i+1}) +
 * int over [t_i, t_{i+1}] by 10-point Gauss-Legendre with I re-solved at each
 * node.  Past the grid the integrand is followed for @p tail_span / r more
 * time units, after which I is replaced by its limit c / nu0.
 */
inline ContractPath solve_dynamic_contract(const ModelParams& p, std::span<const double> grid,
                                           double tail_span = 30.0) {
    validate(p, Regime::continuum);
    if (grid.size() < 2) throw DomainError("solve_dynamic_contract: grid needs >= 2 points");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0)) throw DomainError("solve_dynamic_contract: grid must be positive");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw DomainError("solve_dynamic_contract: grid must be strictly increasing");
    }
    const DepthLimits lim = depth_limits(p);
    auto incentive_at = [&](double t) {
        const BreadthPoint fb = breadth_at(p, t, 1.0, &lim);
        const double x = contract_breadth(p, t, fb.x);
        return contract_terms(p, x, t).incentive;
    };
    using GL = boost::math::quadrature::gauss<double, 10>;
    const double r = p.r;
    auto piece = [&](double a, double b) {
        return GL::integrate([&](double s) { return r * std::exp(-r * (s - a)) * incentive_at(s); },
                             a, b);
    };

    ContractPath out;
    const std::size_t n = grid.size();
    out.times.assign(grid.begin(), grid.end());
    for (double t : grid) {
        const BreadthPoint fb = breadth_at(p, t, 1.0, &lim);
        const double x = contract_breadth(p, t, fb.x);
        const ContractTerms ct = contract_terms(p, x, t);
        out.x_first_best.push_back(fb.x);
        out.x_alpha.push_back(x);
        out.incentive.push_back(ct.incentive);
        out.distortion.push_back(ct.distortion);
        out.law_residual.push_back(ct.law);
        out.costate.push_back(ct.costate);
    }

    // Tail beyond the grid.
    const double t_end = grid.back();
    const double T = t_end + tail_span / r;
    const int pieces = std::max(1, static_cast<int>(std::ceil((T - t_end) / 0.25)));
    double a_tail = p.c / p.nu0;
    for (int k = pieces - 1; k >= 0; --k) {
        const double a = t_end + (T - t_end) * k / pieces;
        const double b = t_end + (T - t_end) * (k + 1) / pieces;
        a_tail = std::exp(-r * (b - a)) * a_tail + piece(a, b);
    }
    out.alpha.assign(n, 0.0);
    out.alpha[n - 1] = a_tail;
    for (std::size_t i = n - 1; i-- > 0;) {
        const double a = grid[i], b = grid[i + 1];
        out.alpha[i] = std::exp(-r * (b - a)) * out.alpha[i + 1] + piece(a, b);
    }
    for (double al : out.alpha) out.out_of_range.push_back(!(al >= 0.0 && al <= 1.0));
    return out;
}

/**
 * Principal's profit int_0^T (1 - alpha) e^{-rt} dF(x_alpha(t), t) along a
 * solved contract path.  Breadth and share are interpolated linearly between
 * grid points (breadth from the origin, share held at its first value before
 * the grid); the neglected tail past T is at most e^{-rT}.
 */
inline double contract_profit(const ModelParams& p, const ContractPath& path) {
    validate(p, Regime::continuum);
    const std::size_t n = path.times.size();
    if (n < 2 || path.alpha.size() != n || path.x_alpha.size() != n)
        throw DomainError("contract_profit: malformed contract path");
    std::vector<double> ts{0.0}, xs{0.0}, as{path.alpha.front()};
    ts.insert(ts.end(), path.times.begin(), path.times.end());
    xs.insert(xs.end(), path.x_alpha.begin(), path.x_alpha.end());
    as.insert(as.end(), path.alpha.begin(), path.alpha.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        const double a = ts[i], b = ts[i + 1];
        const double xdot = (xs[i + 1] - xs[i]) / (b - a);
        const double adot = (as[i + 1] - as[i]) / (b - a);
        auto f = [&](double t) {
            const double x = xs[i] + xdot * (t - a);
            if (!(x > 0.0) || !(t > 0.0)) return 0.0;
            const ContinuumPartials P = continuum_partials(p, x, t);
            const double share = as[i] + adot * (t - a);
            return (1.0 - share) * std::exp(-p.r * t) * (P.Fx * xdot + P.Ft);
        };
        total += numerics::integrate(f, a, b, 1e-12);
    }
    return total;
}

// ---------------------------------------------------------------------------
// No commitment
// ---------------------------------------------------------------------------

struct NoCommitment {
    double alpha = 1.0;
    double depth = kInf;
    double profit = 0.0;
};

/// Stationary spot share and induced depth under known difficulty.
inline NoCommitment no_commitment_equilibrium(const ModelParams& p) {
    if (!p.known_difficulty())
        throw DomainError("no_commitment_equilibrium: requires lambdaE == lambdaH");
    validate(p, Regime::continuum);
    const double l = p.lambdaE;
    auto profit = [&](double alpha) {
        if (!(alpha * p.nu0 > p.c)) return 0.0;
        const double d = detail::depth_root(p.r, p.nu0, p.c, l, alpha);
        const double k = p.nu0 * numerics::one_minus_exp(l * d);
        return (1.0 - alpha) * k / (p.r * d + k);
    };
    auto [a, v] = numerics::maximize(profit, p.c / p.nu0, 1.0, 40);
    return {a, detail::depth_root(p.r, p.nu0, p.c, l, a), v};
}

// ---------------------------------------------------------------------------
// Extensive margin
// ---------------------------------------------------------------------------

/// Constant share that makes working (cost gamma) worthwhile at success rate lambda.
inline double extensive_margin_contract(double lambda, double gamma, double r) {
    if (!(r > 0.0) || !(gamma >= 0.0)) throw DomainError("extensive_margin_contract: bad inputs");
    if (!(gamma < lambda))
        throw PreconditionError("extensive_margin_contract: need gamma < lambda");
    return gamma / lambda;
}

namespace detail {

/// Posterior probability of the fast rate after s units of unsuccessful work.
inline double posterior_easy_weight(double lambdaE, double lambdaH, double delta0, double s) {
    const double wH = std::log(delta0) - lambdaH * s;
    const double wE = std::log1p(-delta0) - lambdaE * s;
    return std::exp(wE - numerics::log_add(wH, wE));
}

}  // namespace detail

/// Posterior mean success rate after s units of unsuccessful work.
inline double posterior_mean_rate(double lambdaE, double lambdaH, double delta0, double s) {
    if (delta0 <= 0.0) return lambdaE;
    if (delta0 >= 1.0) return lambdaH;
    return lambdaH + detail::posterior_easy_weight(lambdaE, lambdaH, delta0, s) * (lambdaE - lambdaH);
}

/**
 * Share path alpha(t) = (gamma/lambdaH) e^{rt} - e^{rt} int_0^t e^{-rs} r gamma / E[lambda|s] ds
 * when the agent learns the rate from its own failures.
 *
 * Evaluated in the equivalent form
 *   alpha(t) = gamma/lambdaH + e^{rt} int_0^t e^{-rs} r gamma (E[lambda|s] - lambdaH) / (lambdaH E[lambda|s]) ds,
 * whose integrand is nonnegative, so the path is free of cancellation at large t
 * and exactly constant when lambdaE == lambdaH.
 */
inline std::vector<double> extensive_margin_learning_contract(double lambdaE, double lambdaH,
                                                              double gamma, double r,
                                                              double delta0,
                                                              std::span<const double> grid) {
    if (!(r > 0.0) || !(delta0 >= 0.0 && delta0 <= 1.0) || !(lambdaE >= lambdaH))
        throw DomainError("extensive_margin_learning_contract: bad inputs");
    if (!(gamma < lambdaH))
        throw PreconditionError("extensive_margin_learning_contract: need gamma < lambdaH");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.0)) throw DomainError("extensive_margin_learning_contract: t < 0");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw DomainError("extensive_margin_learning_contract: grid must increase");
    }
    auto integrand = [&](double s) {
        if (delta0 >= 1.0) return 0.0;
        const double excess = delta0 <= 0.0 ? lambdaE - lambdaH
                                            : detail::posterior_easy_weight(lambdaE, lambdaH, delta0, s) *
                                                  (lambdaE - lambdaH);
        return std::exp(-r * s) * r * gamma * excess / (lambdaH * (lambdaH + excess));
    };
    std::vector<double> out;
    out.reserve(grid.size());
    double acc = 0.0, prev = 0.0;
    const double a0 = gamma / lambdaH;
    for (double t : grid) {
        acc += numerics::integrate(integrand, prev, t, 1e-13);
        prev = t;
        out.push_back(a0 + std::exp(r * t) * acc);
    }
    return out;
}

}  // namespace brainstorm

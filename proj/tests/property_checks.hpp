// SPDX-License-Identifier: MIT
/**
 * @file property_checks.hpp
 * @brief Module invariants evaluated on one parameter set at a time.
 *
 * Each check_* function appends failures to a Failures collector.  The
 * GoogleTest property suites and the acceptance runner both drive these
 * functions over the same seeded random draws.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "brainstorm/continuum_solver.hpp"
#include "brainstorm/contracts.hpp"
#include "brainstorm/core_model.hpp"
#include "brainstorm/discrete_solver.hpp"
#include "brainstorm/policy_eval.hpp"
#include "support.hpp"

namespace brainstorm::testing {

// ---------------------------------------------------------------------------
// core-model
// ---------------------------------------------------------------------------

/// Maximum relative error of every analytic partial of F against finite
/// differences over a log-spaced (x, t) grid on [1e-2, 1e2]^2.
inline double partials_max_relative_error(const ModelParams& p, int points = 13) {
    const std::vector<double> g = numerics::log_grid(1e-2, 1e2, static_cast<std::size_t>(points));
    double worst = 0.0;
    auto rel = [](double fd, double an) {
        const double scale = std::max(std::fabs(an), std::fabs(fd));
        return scale == 0.0 ? 0.0 : std::fabs(fd - an) / scale;
    };
    for (double x : g)
        for (double t : g) {
            const ContinuumPartials P = continuum_partials(p, x, t);
            const double hx = 1e-3 * x, ht = 1e-3 * t;
            auto Fx = [&](double xx) { return continuum_cdf(p, xx, t); };
            auto Ft = [&](double tt) { return continuum_cdf(p, x, tt); };
            auto dFx_dx = [&](double xx) { return continuum_partials(p, xx, t).Fx; };
            auto dFt_dt = [&](double tt) { return continuum_partials(p, x, tt).Ft; };
            auto dFx_dt = [&](double tt) { return continuum_partials(p, x, tt).Fx; };
            // Skip components that are below the rounding floor of F itself.
            const double floor = 1e-9 * std::max(P.F, 1e-300);
            auto acc = [&](double fd, double an, double step) {
                if (std::max(std::fabs(an), std::fabs(fd)) * step < floor) return;
                worst = std::max(worst, rel(fd, an));
            };
            acc(central_diff(Fx, x, hx), P.Fx, hx);
            acc(central_diff(Ft, t, ht), P.Ft, ht);
            acc(central_diff(dFx_dx, x, hx), P.Fxx, hx * hx);
            acc(central_diff(dFt_dt, t, ht), P.Ftt, ht * ht);
            acc(central_diff(dFx_dt, t, ht), P.Fxt, hx * ht);
        }
    return worst;
}

inline void check_core(const ModelParams& p, Failures& f) {
    for (Difficulty th : kStates) {
        const double l = p.lambda(th);
        double prevS = survival(p, th, 0.0), prevNu = interim_belief(p, l, 0.0);
        f.check(prevS == 1.0, "survival_at_zero", [&] { return num(prevS); });
        for (int i = 1; i <= 200; ++i) {
            const double K = 10.0 / l * i / 200.0;
            const double S = survival(p, th, K), nu = interim_belief(p, l, K);
            f.check(S < prevS && S > 1.0 - p.nu0, "survival_decreasing_bounded",
                    [&] { return describe(p) + " K=" + num(K); });
            f.check(nu < prevNu, "interim_belief_decreasing",
                    [&] { return describe(p) + " K=" + num(K); });
            prevS = S;
            prevNu = nu;
        }
        // phi decreasing on [0, 10 K*_theta] (K*_E when the hard state has no root).
        const ValidityArm arm = arm_for(p, th);
        double Kstar = kInf;
        if (p.c < arm.discounted_success(p.r, kInf)) Kstar = known_state_threshold(arm, p.r, p.c);
        if (!std::isfinite(Kstar))
            Kstar = known_state_threshold(arm_for(p, Difficulty::easy), p.r, p.c);
        double prev = phi(p, th, 0.0);
        f.check(std::fabs(prev - (p.r + l * p.nu0) * p.c) <= 1e-13, "phi_at_zero",
                [&] { return describe(p) + " phi(0)=" + num(prev); });
        const RateDistribution g = RateDistribution::two_point(p.nu0, l);
        for (int i = 1; i <= 1000; ++i) {
            const double K = 10.0 * Kstar * i / 1000.0;
            const double v = phi(p, th, K);
            f.check(v < prev || std::fabs(v - prev) <= 4e-16 * std::fabs(prev), "phi_decreasing",
                    [&] { return describe(p) + " K=" + num(K); });
            prev = v;
            if (i % 10 == 0) {
                const double vg = phi_general(g, p.r, p.c, K);
                f.check(std::fabs(vg - v) <= 1e-10, "phi_general_embedding",
                        [&] { return describe(p) + " K=" + num(K) + " diff " + num(vg - v); });
            }
        }
    }
    // Difficulty belief never crosses the prior and reverts to it.
    for (double N : {1.0, 2.0, 5.0}) {
        for (int i = 0; i <= 200; ++i) {
            const double K = 20.0 / p.lambdaH * i / 200.0;
            const double d = difficulty_belief(p, K, N);
            f.check(d >= p.delta0 - 1e-15 && d <= 1.0, "difficulty_belief_one_sided",
                    [&] { return describe(p) + " K=" + num(K) + " N=" + num(N); });
        }
        const double far = difficulty_belief(p, 40.0 / p.lambdaH, N);
        f.check(std::fabs(far - p.delta0) < 1e-6, "difficulty_belief_reverts",
                [&] { return describe(p) + " N=" + num(N) + " gap " + num(far - p.delta0); });
    }
    // Effort on approach 2 initially raises the belief in approach 1.
    for (double K1 : {0.5, 1.0, 2.0}) {
        const double h = 1e-6;
        const double slope =
            (two_arm_validity_belief(p, K1, h) - two_arm_validity_belief(p, K1, 0.0)) / h;
        f.check(slope > 0.0, "two_arm_right_derivative",
                [&] { return describe(p) + " K1=" + num(K1) + " slope " + num(slope); });
    }
    // Continuum CDF: bounded and monotone in both arguments.
    const std::vector<double> g = numerics::log_grid(1e-2, 1e2, 25);
    for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = 0; j < g.size(); ++j) {
            const double F = continuum_cdf(p, g[i], g[j]);
            // F < 1 is checked through the survival, since F itself rounds to 1 deep in the tail.
            const double S = continuum_partials(p, g[i], g[j]).survival;
            f.check(F >= 0.0 && F <= 1.0 && S > 0.0, "cdf_bounded",
                    [&] { return describe(p) + " x=" + num(g[i]) + " t=" + num(g[j]) + " S=" + num(S); });
            if (i > 0)
                f.check(F >= continuum_cdf(p, g[i - 1], g[j]), "cdf_monotone_x",
                        [&] { return describe(p) + " x=" + num(g[i]) + " t=" + num(g[j]); });
            if (j > 0)
                f.check(F >= continuum_cdf(p, g[i], g[j - 1]), "cdf_monotone_t",
                        [&] { return describe(p) + " x=" + num(g[i]) + " t=" + num(g[j]); });
            const ContinuumPartials P = continuum_partials(p, g[i], g[j]);
            f.check(P.Fxx <= 0.0 && P.Ftt <= 0.0, "cdf_second_partials_nonpositive",
                    [&] { return describe(p) + " x=" + num(g[i]) + " t=" + num(g[j]); });
        }
    const double err = partials_max_relative_error(p);
    f.check(err < 1e-6, "partials_finite_difference",
            [&] { return describe(p) + " max relative error " + num(err); });
}

// ---------------------------------------------------------------------------
// discrete-solver
// ---------------------------------------------------------------------------

inline void check_discrete(const ModelParams& p, Failures& f, std::size_t n_max = 10) {
    const ThresholdSequence seq = solve_learning_thresholds(p, n_max);
    f.check(!seq.truncated() && seq.thresholds.size() == n_max, "sequence_complete",
            [&] { return describe(p); });
    std::vector<double> deltas;
    for (std::size_t j = 0; j < seq.thresholds.size(); ++j) {
        const double K = seq.thresholds[j];
        f.check(std::fabs(seq.residuals[j]) < 1e-10, "threshold_residual",
                [&] { return describe(p) + " n=" + num(j + 1) + " " + num(seq.residuals[j]); });
        f.check(std::fabs(learning_condition(p, j + 1, K)) < 1e-10, "threshold_condition",
                [&] { return describe(p) + " n=" + num(j + 1); });
        if (j > 0)
            f.check(K > seq.thresholds[j - 1], "thresholds_increasing",
                    [&] { return describe(p) + " n=" + num(j + 1); });
        f.check(K > seq.bracket_low && K < seq.bracket_high, "threshold_bracket",
                [&] { return describe(p) + " n=" + num(j + 1) + " K=" + num(K); });
        f.check(seq.brainstorm_times[j] == static_cast<double>(j + 1) * K, "brainstorm_times",
                [&] { return describe(p) + " n=" + num(j + 1); });
        deltas.push_back(difficulty_belief(p, K, static_cast<double>(j + 1)));
        if (j > 0)
            f.check(deltas[j] > deltas[j - 1], "difficulty_threshold_increasing",
                    [&] { return describe(p) + " n=" + num(j + 1); });
    }
    // Comparative statics at fixed n: higher cost, later brainstorming; faster
    // rates, earlier brainstorming.
    ModelParams pc = p;
    pc.c = std::min(p.c * 1.05, 0.5 * (p.c + discrete_cost_bound(p)));
    const ThresholdSequence sc = solve_learning_thresholds(pc, n_max);
    ModelParams pl = p;
    pl.lambdaE *= 1.05;
    pl.lambdaH *= 1.05;
    const ThresholdSequence sl = solve_learning_thresholds(pl, n_max);
    for (std::size_t j = 0; j < n_max; ++j) {
        f.check(sc.thresholds[j] > seq.thresholds[j], "threshold_increasing_in_c",
                [&] { return describe(p) + " n=" + num(j + 1); });
        f.check(sl.thresholds[j] < seq.thresholds[j], "threshold_decreasing_in_lambda",
                [&] { return describe(p) + " n=" + num(j + 1); });
    }
}

/**
 * Per-approach belief at the brainstorm times, nu*_n, falling in n.  This holds
 * for the belief-threshold example but not for every feasible parameter set:
 * when the two rates are far apart, learning that the problem is hard can
 * outweigh the extra failures and nu*_n rises with n.
 */
inline void check_belief_threshold_decline(const ModelParams& p, Failures& f, std::size_t n_max = 10) {
    const ThresholdSequence seq = solve_learning_thresholds(p, n_max);
    double prev = 2.0;
    for (std::size_t j = 0; j < seq.thresholds.size(); ++j) {
        const double nu = beliefs(p, std::vector<double>(j + 1, seq.thresholds[j])).arm_beliefs.front();
        f.check(nu < prev, "belief_threshold_decreasing", [&] {
            return describe(p) + " n=" + num(j + 1) + " nu*=" + num(nu) + " previous " + num(prev);
        });
        prev = nu;
    }
}

// ---------------------------------------------------------------------------
// policy-eval
// ---------------------------------------------------------------------------

inline void check_policy(const ModelParams& p, std::mt19937_64& rng, Failures& f,
                         int perturbations = 1000) {
    const ThresholdSequence seq = solve_learning_thresholds(p, 12);
    const ThresholdPolicy opt = seq.policy();
    // CDF nondecreasing in t for each state.
    const double t_end = 4.0 * seq.brainstorm_times[4];
    for (Difficulty th : kStates) {
        double prev = 0.0;
        for (int i = 0; i <= 300; ++i) {
            const double t = t_end * i / 300.0;
            const double F = breakthrough_cdf(p, opt, th, t);
            // F reaches exactly 1.0 in floating point once all mass is exhausted.
            f.check(F >= prev - 1e-15 && F <= 1.0, "cdf_nondecreasing",
                    [&] { return describe(p) + " t=" + num(t) + " F=" + num(F) + " previous " + num(prev); });
            prev = F;
        }
    }
    // Finite-horizon constant policy: limit 1 - (1 - nu0)^N.
    for (std::size_t N : {1u, 2u, 4u}) {
        const ThresholdPolicy pol{std::vector<double>(N, seq.thresholds.front()), N};
        for (Difficulty th : kStates) {
            const double t = 80.0 * static_cast<double>(N) / p.lambdaH;
            const double F = breakthrough_cdf(p, pol, th, t);
            const double lim = 1.0 - std::pow(1.0 - p.nu0, static_cast<double>(N));
            f.check(std::fabs(F - lim) < 1e-9, "cdf_limit",
                    [&] { return describe(p) + " N=" + num(static_cast<double>(N)) + " F=" + num(F); });
        }
    }
    // Stationary policy matches the geometric-series closed form.
    const double K = seq.thresholds.front();
    const ThresholdPolicy stationary{{K}, 0};
    double closed = 0.0;
    for (Difficulty th : kStates) closed += p.prior(th) * stationary_value(p, th, K);
    const double direct = policy_payoff(p, stationary);
    f.check(std::fabs(closed - direct) < 1e-12, "stationary_closed_form",
            [&] { return describe(p) + " diff " + num(closed - direct); });
    // Optimality against random monotone perturbations (+-10% per coordinate).
    const double best = policy_payoff(p, opt);
    std::uniform_real_distribution<double> U(0.9, 1.1);
    for (int k = 0; k < perturbations; ++k) {
        ThresholdPolicy q = opt;
        for (double& v : q.thresholds) v *= U(rng);
        std::sort(q.thresholds.begin(), q.thresholds.end());
        const double v = policy_payoff(p, q);
        f.check(v <= best + 1e-13, "payoff_optimal_vs_perturbation",
                [&] { return describe(p) + " gain " + num(v - best); });
    }
    // Doubling c lowers the payoff of every fixed policy.
    ModelParams p2 = p;
    p2.c = 2.0 * p.c;
    for (const ThresholdPolicy& q :
         {opt, stationary, ThresholdPolicy{{0.5 * K, K, 2.0 * K}, 0}, ThresholdPolicy{{K}, 3}}) {
        const double a = policy_payoff(p, q), b = policy_payoff(p2, q);
        f.check(b <= a, "payoff_decreasing_in_c", [&] { return describe(p); });
    }
    // Gateaux condition at the grid optimum of the first threshold.
    std::vector<double> grid;
    for (double x = 0.8 * K; x <= 1.2 * K; x += 1e-3) grid.push_back(x);
    const std::vector<double> tail(seq.thresholds.begin() + 1, seq.thresholds.end());
    const BruteForceResult bf = brute_force_thresholds(p, 1, grid, tail, 1);
    const double g = learning_condition(p, 1, bf.policy.thresholds.front());
    f.check(std::fabs(g) < 1e-3, "gateaux_at_oracle",
            [&] { return describe(p) + " value " + num(g); });
    f.check(std::fabs(bf.policy.thresholds.front() - K) <= 1e-3 + 1e-12, "oracle_matches_root",
            [&] { return describe(p) + " " + num(bf.policy.thresholds.front()) + " vs " + num(K); });
}

// ---------------------------------------------------------------------------
// continuum-solver
// ---------------------------------------------------------------------------

inline void check_continuum(const ModelParams& p, Failures& f, int payoff_perturbations = 6) {
    const std::vector<double> grid = numerics::log_grid(1e-3, 1e2, 400);
    const Trajectory tr = solve_trajectory(p, grid);
    const DepthLimits lim = depth_limits(p);
    const bool learning = p.lambdaE > p.lambdaH && p.delta0 > 0.0 && p.delta0 < 1.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        f.check(std::fabs(tr.el_residual[i]) < 1e-9 && !tr.held[i], "el_residual",
                [&] { return describe(p) + " t=" + num(grid[i]) + " " + num(tr.el_residual[i]); });
        f.check(tr.depth[i] >= lim.d0 - 1e-8 && tr.depth[i] <= lim.dH + 1e-8, "depth_bracket",
                [&] { return describe(p) + " t=" + num(grid[i]); });
        if (i > 0) {
            f.check(tr.breadth[i] > tr.breadth[i - 1], "breadth_increasing",
                    [&] { return describe(p) + " t=" + num(grid[i]); });
            f.check(tr.depth[i] >= tr.depth[i - 1] * (1.0 - 1e-13), "depth_nondecreasing",
                    [&] { return describe(p) + " t=" + num(grid[i]); });
        }
    }
    if (learning) {
        // Strict increase of depth between well-separated times.
        for (std::size_t i = 50; i < grid.size(); i += 50)
            f.check(tr.depth[i] > tr.depth[i - 50], "depth_strictly_increasing",
                    [&] { return describe(p) + " t=" + num(grid[i]); });
        f.check(lim.d0 < lim.dH, "depth_limits_ordered", [&] { return describe(p); });
    }
    // Payoff of the solution beats admissible depth rescalings.
    const double base = continuum_payoff(p, tr);
    for (int k = 0; k < payoff_perturbations; ++k) {
        const double s = 0.95 + 0.1 * k / std::max(1, payoff_perturbations - 1);
        if (s == 1.0) continue;
        Trajectory q = tr;
        for (double& x : q.breadth) x /= s;
        const double v = continuum_payoff(p, q);
        f.check(v < base, "payoff_optimal_vs_depth_scaling",
                [&] { return describe(p) + " scale " + num(s) + " gain " + num(v - base); });
    }
}

/**
 * Second differences of the breadth path on a uniform grid are nonpositive.
 * Holds for the known-difficulty case (linear paths) and for the reference
 * learning case, but not for every learning draw: when depth saturates in a
 * concave way, x = t/d(t) has a convex stretch.
 */
inline void check_breadth_concave(const ModelParams& p, Failures& f) {
    const std::vector<double> ug = numerics::linear_grid(0.05, 50.0, 200);
    const Trajectory tu = solve_trajectory(p, ug);
    for (std::size_t i = 1; i + 1 < ug.size(); ++i) {
        const double d2 = tu.breadth[i + 1] - 2.0 * tu.breadth[i] + tu.breadth[i - 1];
        f.check(d2 <= 1e-8, "breadth_concave",
                [&] { return describe(p) + " t=" + num(ug[i]) + " second difference " + num(d2); });
    }
}

// ---------------------------------------------------------------------------
// contracts
// ---------------------------------------------------------------------------

/// Dynamic-contract invariants; @p known adds the frontloading checks.
inline void check_contract(const ModelParams& p, Failures& f) {
    const bool known = p.known_difficulty();
    const double t_max = 200.0 / std::min(p.r, known ? p.r : p.lambdaH);
    const std::vector<double> grid = numerics::log_grid(0.05, t_max, 300);
    const ContractPath cp = solve_dynamic_contract(p, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = grid[i], x = cp.x_alpha[i];
        f.check(std::fabs(cp.law_residual[i]) < 1e-8, "law_residual",
                [&] { return describe(p) + " t=" + num(t) + " " + num(cp.law_residual[i]); });
        f.check(x < cp.x_first_best[i], "below_first_best",
                [&] { return describe(p) + " t=" + num(t); });
        f.check(cp.alpha[i] >= 0.0 && cp.alpha[i] <= 1.0 && !cp.out_of_range[i], "alpha_in_range",
                [&] { return describe(p) + " t=" + num(t) + " alpha " + num(cp.alpha[i]); });
        if (i > 0 && i + 1 < grid.size()) {
            const double adot = grid_derivative(cp.times, cp.alpha, i);
            const double gap = cp.alpha[i] - adot / p.r - cp.incentive[i];
            f.check(std::fabs(gap) < 1e-4, "share_law_identity",
                    [&] { return describe(p) + " t=" + num(t) + " gap " + num(gap); });
        }
        // The breadth pointwise maximises F (1 - I).
        auto G = [&](double xx) {
            const ContinuumPartials P = continuum_partials(p, xx, t);
            return P.F * (1.0 - (P.survival * p.r + P.Ft) * p.c / (p.r * P.Fx));
        };
        const double dG = central_diff(G, x, 1e-4 * x);
        f.check(std::fabs(dG) < 1e-6, "profit_first_order_condition",
                [&] { return describe(p) + " t=" + num(t) + " dG " + num(dG); });
        if (known) {
            f.check(cp.distortion[i] <= 0.0, "distortion_nonpositive",
                    [&] { return describe(p) + " t=" + num(t); });
            if (i > 0)
                f.check(cp.alpha[i] < cp.alpha[i - 1], "alpha_strictly_decreasing",
                        [&] { return describe(p) + " t=" + num(t); });
        }
    }
    const double gap = std::fabs(cp.alpha.back() - p.c / p.nu0);
    f.check(gap < 1e-2, "alpha_limit", [&] { return describe(p) + " gap " + num(gap); });
    const double dyn = contract_profit(p, cp);
    const double stat = known ? optimal_static_share(p).profit : static_share_profit(p, 0.5 * (1.0 + p.c / p.nu0));
    f.check(dyn >= stat && stat >= 0.0, "first_best_dominance",
            [&] { return describe(p) + " dynamic " + num(dyn) + " static " + num(stat); });
}

inline void check_extensive(std::mt19937_64& rng, Failures& f) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double lH = 0.3 + 1.7 * U(rng);
    const double lE = lH * (1.0 + 3.0 * U(rng));
    const double gamma = lH * (0.05 + 0.9 * U(rng));
    const double r = 0.3 + 1.7 * U(rng);
    const double d0 = 0.05 + 0.9 * U(rng);
    const std::vector<double> grid = numerics::linear_grid(0.0, 10.0, 200);
    const std::vector<double> a = extensive_margin_learning_contract(lE, lH, gamma, r, d0, grid);
    f.check(std::fabs(a.front() - gamma / lH) <= 1e-12, "extensive_initial_share",
            [&] { return num(a.front()); });
    for (std::size_t i = 1; i < a.size(); ++i)
        f.check(a[i] >= a[i - 1], "extensive_nondecreasing", [&] { return "t=" + num(grid[i]); });
    const std::vector<double> k = extensive_margin_learning_contract(lH, lH, gamma, r, d0, grid);
    for (double v : k)
        f.check(std::fabs(v - gamma / lH) <= 1e-12 * (gamma / lH), "extensive_known_constant",
                [&] { return num(v); });
    f.check(extensive_margin_contract(lE, gamma, r) == gamma / lE, "extensive_known_exact",
            [&] { return std::string("share"); });
}

}  // namespace brainstorm::testing

// SPDX-License-Identifier: MIT
/**
 * @file experiments.hpp
 * @brief Named experiments dispatched by the command-line runner.
 *
 * Each experiment maps a ScenarioConfig to a set of numeric tables plus a
 * log of invariant checks that failed.  Experiments never write files; the
 * caller decides what to emit.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "brainstorm/continuum_solver.hpp"
#include "brainstorm/contracts.hpp"
#include "brainstorm/discrete_solver.hpp"
#include "scenario.hpp"

namespace brainstorm::cli {

/// Column-oriented numeric table written as one data file.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add(std::vector<double> row) { rows.push_back(std::move(row)); }
};

struct Violation {
    std::string check;
    std::string detail;
};

struct ExperimentResult {
    std::map<std::string, Table> tables;  ///< file stem -> data (ordered for determinism)
    std::vector<Violation> violations;
};

namespace detail {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class Checker {
public:
    explicit Checker(std::vector<Violation>& out) : out_(out) {}

    /// Records a violation of @p check when @p ok is false (first few per check).
    void expect(bool ok, const std::string& check, const std::function<std::string()>& detail) {
        if (ok) return;
        if (++counts_[check] <= 3) out_.push_back({check, detail()});
    }

private:
    std::vector<Violation>& out_;
    std::map<std::string, int> counts_;
};

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

inline std::string at_t(double t, const std::string& what, double v) {
    return "t = " + fmt(t) + ": " + what + " = " + fmt(v);
}

inline double bool_value(bool b) { return b ? 1.0 : 0.0; }

/// alpha-dot by the three-point formula for non-uniform grids.
inline double derivative(const std::vector<double>& t, const std::vector<double>& y,
                         std::size_t i) {
    const double h0 = t[i] - t[i - 1], h1 = t[i + 1] - t[i];
    return (-h1 / (h0 * (h0 + h1))) * y[i - 1] + ((h1 - h0) / (h0 * h1)) * y[i] +
           (h0 / (h1 * (h0 + h1))) * y[i + 1];
}

// ---------------------------------------------------------------------------

inline void benchmark(const ScenarioConfig& cfg, const ModelParams& p, ExperimentResult& res,
                      Checker& chk) {
    validate(p, Regime::discrete);
    const double K = solve_benchmark_threshold(p);
    const double resid = benchmark_condition(p, K);
    const double index = gittins_objective(p, K);
    const double nu = interim_belief(p, p.lambdaE, K);
    const double lnu = p.lambdaE * nu;
    const double index_closed = p.r * lnu / (lnu + p.r);
    chk.expect(std::fabs(resid) < cfg.solver.root_tol, "benchmark_residual",
               [&] { return "residual " + fmt(resid); });
    chk.expect(std::fabs(index - index_closed) < 1e-8, "gittins_index_at_threshold",
               [&] { return "G(K*) = " + fmt(index) + " vs " + fmt(index_closed); });
    Table& t = res.tables["benchmark"];
    if (t.columns.empty())
        t.columns = {"r", "lambda", "nu0", "c", "K_star", "index_value", "residual"};
    t.add({p.r, p.lambdaE, p.nu0, p.c, K, index, resid});
}

inline void learning_thresholds(const ScenarioConfig& cfg, const ModelParams& p,
                                ExperimentResult& res, Checker& chk) {
    ThresholdSequence seq;
    const bool general = cfg.general_rates.has_value();
    if (general) {
        seq = solve_general_thresholds(cfg.general_rates->first, cfg.general_rates->second, p.r,
                                       p.c, p.delta0, cfg.n_max);
    } else {
        seq = solve_learning_thresholds(p, cfg.n_max);
    }
    Table& t = res.tables["thresholds"];
    if (t.columns.empty()) {
        t.columns = {"n", "K_n", "t_brainstorm", "residual"};
        if (!general) {
            t.columns.emplace_back("nu_star");
            t.columns.emplace_back("delta_star");
        }
    }
    std::vector<double> nus, deltas;
    for (std::size_t j = 0; j < seq.thresholds.size(); ++j) {
        const double n = static_cast<double>(j + 1);
        const double K = seq.thresholds[j];
        std::vector<double> row{n, K, seq.brainstorm_times[j], seq.residuals[j]};
        if (!general) {
            const std::vector<double> efforts(j + 1, K);
            nus.push_back(beliefs(p, efforts).arm_beliefs.front());
            deltas.push_back(difficulty_belief(p, K, n));
            row.push_back(nus.back());
            row.push_back(deltas.back());
        }
        t.add(row);
        chk.expect(std::fabs(seq.residuals[j]) < cfg.solver.root_tol, "threshold_residual",
                   [&] { return "n = " + fmt(n) + ": residual " + fmt(seq.residuals[j]); });
        if (j > 0)
            chk.expect(K > seq.thresholds[j - 1], "thresholds_increasing",
                       [&] { return "K_" + fmt(n) + " = " + fmt(K) + " not above previous"; });
        if (std::isfinite(seq.bracket_high) && seq.bracket_high > seq.bracket_low)
            chk.expect(K > seq.bracket_low && K < seq.bracket_high, "threshold_bracket",
                       [&] { return "K_" + fmt(n) + " = " + fmt(K) + " outside bracket"; });
    }
    Table& s = res.tables["summary"];
    if (s.columns.empty()) s.columns = {"K_easy", "K_hard", "max_approaches"};
    s.add({seq.bracket_low, seq.bracket_high,
           seq.max_approaches ? static_cast<double>(*seq.max_approaches) : kNaN});
}

inline void belief_path(const ScenarioConfig& cfg, const ModelParams& p, ExperimentResult& res,
                        Checker& chk) {
    if (cfg.two_arm) {
        validate(p, Regime::basic);
        Table& t = res.tables["two_arm"];
        if (t.columns.empty()) t.columns = {"K1", "K2", "belief_approach1"};
        for (double K2 : numerics::linear_grid(0.0, cfg.two_arm->K2_max, cfg.two_arm->points)) {
            const double b = two_arm_validity_belief(p, cfg.two_arm->K1, K2);
            chk.expect(b >= 0.0 && b <= 1.0, "belief_range", [&] { return "belief " + fmt(b); });
            t.add({cfg.two_arm->K1, K2, b});
        }
        return;
    }
    const ThresholdSequence seq = solve_learning_thresholds(p, cfg.n_max);
    const std::vector<double> grid = cfg.grid.build();
    // Approaches open by the end of the window fix the column layout.
    const std::size_t arms = effort_profile(seq.policy(), grid.back()).efforts.size();
    Table& t = res.tables["belief_path"];
    if (t.columns.empty()) {
        t.columns = {"t", "approaches", "difficulty_belief"};
        for (std::size_t i = 1; i <= arms; ++i) t.columns.push_back("belief_" + std::to_string(i));
        for (std::size_t i = 1; i <= arms; ++i) t.columns.push_back("effort_" + std::to_string(i));
        for (std::size_t i = 1; i <= arms; ++i) t.columns.push_back("share_" + std::to_string(i));
    }
    for (double tt : grid) {
        const PathPoint pp = optimal_belief_path(p, seq, tt);
        const std::size_t k = pp.profile.efforts.size();
        std::vector<double> row{tt, static_cast<double>(k), pp.beliefs.difficulty_belief};
        for (std::size_t i = 0; i < arms; ++i)
            row.push_back(i < k ? pp.beliefs.arm_beliefs[i] : kNaN);
        for (std::size_t i = 0; i < arms; ++i) row.push_back(i < k ? pp.profile.efforts[i] : kNaN);
        for (std::size_t i = 0; i < arms; ++i)
            row.push_back(i < k ? pp.profile.allocation[i] : kNaN);
        for (double b : pp.beliefs.arm_beliefs)
            chk.expect(b >= 0.0 && b <= 1.0, "belief_range", [&] { return at_t(tt, "belief", b); });
        t.add(row);
    }
    // Regime table: each maximal interval with a fixed set of worked approaches.
    Table& r = res.tables["regimes"];
    if (r.columns.empty()) r.columns = {"t_start", "t_end", "approaches", "worked", "effort_from"};
    EffortSchedule sched(seq.policy());
    for (;;) {
        const double t0 = sched.time();
        const auto ev = sched.step();
        if (ev == EffortSchedule::Event::done) break;
        if (ev == EffortSchedule::Event::brainstorm) continue;
        const EffortSegment& seg = sched.segment();
        const double t1 = std::isinf(seg.to) ? kInf : t0 + seg.duration();
        r.add({t0, t1, static_cast<double>(seg.arms), static_cast<double>(seg.group), seg.from});
        if (t1 > grid.back()) break;
    }
}

inline void continuum(const ScenarioConfig& cfg, const ModelParams& p, ExperimentResult& res,
                      Checker& chk) {
    const std::vector<double> grid = cfg.grid.build();
    const Trajectory tr = solve_trajectory(p, grid);
    const DepthLimits lim = depth_limits(p);
    Table& t = res.tables["trajectory"];
    if (t.columns.empty())
        t.columns = {"t", "x", "depth", "residual", "difficulty_belief", "valid_belief"};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = tr.breadth[i];
        const ContinuumPartials P = continuum_partials(p, x, grid[i]);
        t.add({grid[i], x, tr.depth[i], tr.el_residual[i], P.posterior_hard,
               continuum_valid_belief(p, x, grid[i])});
        chk.expect(std::fabs(tr.el_residual[i]) < cfg.solver.root_tol, "el_residual",
                   [&] { return at_t(grid[i], "residual", tr.el_residual[i]); });
        chk.expect(tr.depth[i] >= lim.d0 - 1e-8 && tr.depth[i] <= lim.dH + 1e-8, "depth_bracket",
                   [&] { return at_t(grid[i], "depth", tr.depth[i]); });
        if (i > 0)
            chk.expect(tr.depth[i] >= tr.depth[i - 1] * (1.0 - 1e-12), "depth_nondecreasing",
                       [&] { return at_t(grid[i], "depth", tr.depth[i]); });
    }
    Table& s = res.tables["summary"];
    if (s.columns.empty()) s.columns = {"d0", "dH", "payoff"};
    s.add({lim.d0, lim.dH, continuum_payoff(p, tr)});
}

inline void convergence(const ScenarioConfig& cfg, const ModelParams& p, ExperimentResult& res,
                        Checker& chk) {
    const std::vector<double> grid = cfg.grid.build();
    const auto rows = convergence_experiment(p, cfg.n_values, grid);
    Table& t = res.tables["convergence"];
    if (t.columns.empty()) t.columns = {"n", "sup_gap", "argmax_t", "approaches", "ok"};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        t.add({row.n, row.sup_gap, row.argmax_t, static_cast<double>(row.arms),
               bool_value(row.ok)});
        chk.expect(row.ok, "convergence_solve", [&] { return "n = " + fmt(row.n) + ": " + row.error; });
        if (i > 0 && rows[i - 1].ok && row.ok)
            chk.expect(row.sup_gap < rows[i - 1].sup_gap, "sup_gap_decreasing",
                       [&] { return "n = " + fmt(row.n) + ": gap " + fmt(row.sup_gap); });
    }
}

inline void static_contract(const ScenarioConfig& cfg, const ModelParams& p, ExperimentResult& res,
                            Checker& chk) {
    const StaticShare s = optimal_static_share(p);
    const std::vector<double> grid = cfg.grid.build();
    const Trajectory xs = agent_best_response(p, s.alpha, grid);
    const Trajectory fb = solve_trajectory(p, grid);
    chk.expect(s.alpha < 1.0, "static_share_below_one", [&] { return "alpha " + fmt(s.alpha); });
    Table& t = res.tables["static_path"];
    if (t.columns.empty()) t.columns = {"t", "x_static", "x_first_best"};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        t.add({grid[i], xs.breadth[i], fb.breadth[i]});
        chk.expect(xs.breadth[i] < fb.breadth[i], "static_below_first_best",
                   [&] { return at_t(grid[i], "x_static", xs.breadth[i]); });
    }
    Table& sm = res.tables["summary"];
    if (sm.columns.empty()) sm.columns = {"alpha", "profit"};
    sm.add({s.alpha, s.profit});
}

inline void check_contract(const ScenarioConfig& cfg, const ModelParams& p, const ContractPath& cp,
                           Checker& chk) {
    const std::size_t n = cp.times.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double t = cp.times[i];
        chk.expect(!cp.out_of_range[i], "alpha_in_unit_interval",
                   [&] { return at_t(t, "alpha", cp.alpha[i]); });
        chk.expect(std::fabs(cp.law_residual[i]) < std::max(cfg.solver.root_tol, 1e-8),
                   "law_residual", [&] { return at_t(t, "residual", cp.law_residual[i]); });
        chk.expect(cp.x_alpha[i] < cp.x_first_best[i], "contract_below_first_best",
                   [&] { return at_t(t, "x_alpha", cp.x_alpha[i]); });
        if (i > 0 && i + 1 < n) {
            const double adot = derivative(cp.times, cp.alpha, i);
            const double gap = cp.alpha[i] - adot / p.r - cp.incentive[i];
            chk.expect(std::fabs(gap) < cfg.solver.integral_tol, "share_law_identity",
                       [&] { return at_t(t, "alpha - alpha'/r - I", gap); });
        }
        if (p.known_difficulty()) {
            chk.expect(cp.distortion[i] <= 0.0, "distortion_nonpositive",
                       [&] { return at_t(t, "distortion", cp.distortion[i]); });
            if (i > 0)
                chk.expect(cp.alpha[i] < cp.alpha[i - 1], "alpha_decreasing",
                           [&] { return at_t(t, "alpha", cp.alpha[i]); });
        }
    }
}

inline ContractPath contract_path(const ScenarioConfig& cfg, const ModelParams& p,
                                  const std::vector<double>& grid) {
    const double tail = -std::log(cfg.solver.tail_tol);
    return solve_dynamic_contract(p, grid, tail);
}

inline void dynamic_contract(const ScenarioConfig& cfg, const ModelParams& p,
                             ExperimentResult& res, Checker& chk) {
    const std::vector<double> grid = cfg.grid.build();
    const ContractPath cp = contract_path(cfg, p, grid);
    check_contract(cfg, p, cp, chk);
    Table& t = res.tables["contract"];
    if (t.columns.empty())
        t.columns = {"t",          "alpha",      "x_alpha",           "x_first_best",
                     "incentive",  "distortion", "residual",          "costate",
                     "difficulty_belief", "valid_belief", "out_of_range"};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = cp.x_alpha[i];
        const ContinuumPartials P = continuum_partials(p, x, grid[i]);
        t.add({grid[i], cp.alpha[i], x, cp.x_first_best[i], cp.incentive[i], cp.distortion[i],
               cp.law_residual[i], cp.costate[i], P.posterior_hard,
               continuum_valid_belief(p, x, grid[i]), bool_value(cp.out_of_range[i])});
    }
    Table& s = res.tables["summary"];
    if (s.columns.empty()) s.columns = {"profit", "alpha_first", "alpha_last", "share_limit"};
    s.add({contract_profit(p, cp), cp.alpha.front(), cp.alpha.back(), p.c / p.nu0});
}

inline void no_commitment(const ScenarioConfig& cfg, const ModelParams& p, ExperimentResult& res,
                          Checker& chk) {
    const NoCommitment nc = no_commitment_equilibrium(p);
    const double resid = depth_value(p.r, p.nu0, p.c, p.lambdaE, nc.depth, nc.alpha);
    chk.expect(std::fabs(resid) < cfg.solver.root_tol, "no_commitment_residual",
               [&] { return "residual " + fmt(resid); });
    const std::vector<double> grid = cfg.grid.build();
    const ContractPath cp = contract_path(cfg, p, grid);
    check_contract(cfg, p, cp, chk);
    Table& t = res.tables["comparison"];
    if (t.columns.empty())
        t.columns = {"t", "alpha_contract", "alpha_no_commitment", "x_contract", "x_no_commitment",
                     "breadth_gap"};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x_nc = grid[i] / nc.depth;
        t.add({grid[i], cp.alpha[i], nc.alpha, cp.x_alpha[i], x_nc, x_nc - cp.x_alpha[i]});
    }
    Table& s = res.tables["summary"];
    if (s.columns.empty()) s.columns = {"alpha_no_commitment", "depth_no_commitment", "profit", "residual"};
    s.add({nc.alpha, nc.depth, nc.profit, resid});
}

inline void extensive_margin(const ScenarioConfig& cfg, const ModelParams& p,
                             ExperimentResult& res, Checker& chk) {
    const double gamma = *cfg.gamma;
    std::vector<double> grid{0.0};
    const std::vector<double> g = cfg.grid.build();
    grid.insert(grid.end(), g.begin(), g.end());
    std::vector<double> alpha;
    if (p.known_difficulty()) {
        alpha.assign(grid.size(), extensive_margin_contract(p.lambdaE, gamma, p.r));
    } else {
        alpha = extensive_margin_learning_contract(p.lambdaE, p.lambdaH, gamma, p.r, p.delta0, grid);
    }
    Table& t = res.tables["share"];
    if (t.columns.empty()) t.columns = {"t", "alpha", "posterior_mean_rate"};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        t.add({grid[i], alpha[i], posterior_mean_rate(p.lambdaE, p.lambdaH, p.delta0, grid[i])});
        if (i > 0)
            chk.expect(alpha[i] >= alpha[i - 1], "share_nondecreasing",
                       [&] { return at_t(grid[i], "alpha", alpha[i]); });
    }
}

using Runner = void (*)(const ScenarioConfig&, const ModelParams&, ExperimentResult&, Checker&);

inline Runner runner_for(const std::string& name) {
    static const std::map<std::string, Runner> table{
        {"benchmark", benchmark},
        {"learning-thresholds", learning_thresholds},
        {"belief-path", belief_path},
        {"continuum", continuum},
        {"convergence", convergence},
        {"static-contract", static_contract},
        {"dynamic-contract", dynamic_contract},
        {"no-commitment", no_commitment},
        {"extensive-margin", extensive_margin},
    };
    return table.at(name);
}

}  // namespace detail

/**
 * Runs the configured experiment, once per sweep value if a sweep is given.
 * Swept runs prepend the swept parameter as the first column of every table.
 * Library exceptions propagate to the caller.
 */
inline ExperimentResult run_experiment(const ScenarioConfig& cfg) {
    ExperimentResult res;
    detail::Checker chk(res.violations);
    const detail::Runner run = detail::runner_for(cfg.experiment);
    if (!cfg.sweep) {
        run(cfg, cfg.model, res, chk);
        return res;
    }
    const std::string& name = cfg.sweep->parameter;
    for (double v : cfg.sweep->values) {
        ModelParams p = cfg.model;
        set_model_field(p, name, v);
        ExperimentResult one;
        detail::Checker one_chk(one.violations);
        run(cfg, p, one, one_chk);
        for (auto& [stem, table] : one.tables) {
            Table& dst = res.tables[stem];
            const bool present =
                std::find(table.columns.begin(), table.columns.end(), name) != table.columns.end();
            if (dst.columns.empty()) {
                if (!present) dst.columns = {name};
                dst.columns.insert(dst.columns.end(), table.columns.begin(), table.columns.end());
            }
            for (auto& row : table.rows) {
                if (!present) row.insert(row.begin(), v);
                dst.rows.push_back(std::move(row));
            }
        }
        for (auto& viol : one.violations)
            res.violations.push_back({viol.check, name + " = " + detail::fmt(v) + ": " + viol.detail});
    }
    return res;
}

}  // namespace brainstorm::cli

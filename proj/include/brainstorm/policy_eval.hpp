// SPDX-License-Identifier: MIT
/**
 * @file policy_eval.hpp
 * @brief Exact evaluation of effort-threshold policies.
 *
 * A threshold policy brainstorms approach N+1 as soon as every one of the N
 * existing approaches has received at least K_N effort; in between it spreads
 * effort equally over the least-worked approaches ("water-filling").  Between
 * consecutive events the breakthrough CDF is a product of per-arm survival
 * factors, so each piece of the discounted payoff is integrated exactly
 * (closed form for the baseline law, Gauss-Kronrod for rate mixtures).  The
 * tail after the last listed threshold is either a stationary continuation,
 * summed as a geometric series, or a stop rule where existing approaches are
 * worked forever.
 */

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "brainstorm/arm_law.hpp"
#include "brainstorm/core_model.hpp"
#include "brainstorm/errors.hpp"

namespace brainstorm {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/**
 * Candidate effort thresholds.
 *
 * thresholds[n-1] is K_n, the common effort at which approach n+1 is
 * brainstormed; +infinity means "never brainstorm again".  When horizon is
 * 0 the last listed threshold repeats forever (stationary continuation);
 * otherwise at most @c horizon approaches are ever brainstormed and the last
 * ones are worked forever.
 */
struct ThresholdPolicy {
    std::vector<double> thresholds;
    std::size_t horizon = 0;

    /// K_n for n existing approaches (n >= 1).
    [[nodiscard]] double threshold(std::size_t n) const {
        if (horizon > 0 && n >= horizon) return kInf;
        if (thresholds.empty()) return kInf;
        if (n <= thresholds.size()) return thresholds[n - 1];
        return horizon == 0 ? thresholds.back() : kInf;
    }
};

inline void validate(const ThresholdPolicy& pol) {
    for (double K : pol.thresholds)
        if (!(K >= 0.0)) throw DomainError("ThresholdPolicy: thresholds must be >= 0");
}

/// One piece of the effort path: a group of equally-worked approaches.
struct EffortSegment {
    double t0 = 0.0;           ///< calendar start
    std::size_t arms = 0;      ///< approaches existing during the segment
    std::size_t group = 0;     ///< number of approaches being worked (equal split)
    double from = 0.0;         ///< common effort of the group at t0
    double to = 0.0;           ///< common effort of the group at the end (may be inf)
    [[nodiscard]] double duration() const {
        return static_cast<double>(group) * (to - from);
    }
};

/**
 * Incremental generator of the water-filling effort path of a policy.
 *
 * step() advances to the next event and reports either a brainstorm or an
 * effort segment.  levels() holds every approach's cumulative effort.
 */
class EffortSchedule {
public:
    enum class Event { brainstorm, segment, done };

    explicit EffortSchedule(const ThresholdPolicy& pol) : pol_(pol) { validate(pol_); }

    Event step() {
        if (done_) return Event::done;
        const std::size_t n = levels_.size();
        if (n == 0) return brainstorm();
        const double target = pol_.threshold(n);
        const double lo = *std::min_element(levels_.begin(), levels_.end());
        if (lo >= target) return brainstorm();
        // Group = approaches at the minimum; next stop at the next distinct
        // level or the target, whichever is first.
        std::size_t g = 0;
        double next = target;
        for (double v : levels_) {
            if (v == lo)
                ++g;
            else
                next = std::min(next, v);
        }
        seg_ = EffortSegment{time_, n, g, lo, next};
        if (std::isinf(next)) {
            done_ = true;
        } else {
            for (double& v : levels_)
                if (v == lo) v = next;
            time_ += seg_.duration();
        }
        return Event::segment;
    }

    [[nodiscard]] const EffortSegment& segment() const { return seg_; }
    [[nodiscard]] const std::vector<double>& levels() const { return levels_; }
    [[nodiscard]] double time() const { return time_; }
    [[nodiscard]] std::size_t arms() const { return levels_.size(); }
    [[nodiscard]] bool finished() const { return done_; }

private:
    Event brainstorm() {
        levels_.push_back(0.0);
        return Event::brainstorm;
    }

    ThresholdPolicy pol_;
    std::vector<double> levels_;
    EffortSegment seg_{};
    double time_ = 0.0;
    bool done_ = false;
};

/// Cumulative efforts and the current effort split at calendar time t.
struct EffortProfile {
    std::vector<double> efforts;     ///< per approach, brainstorm order
    std::vector<double> allocation;  ///< effort rate per approach just after t
};

/// Effort profile induced by @p pol at time @p t (brainstorms at t included).
inline EffortProfile effort_profile(const ThresholdPolicy& pol, double t) {
    detail::require(t >= 0.0, "effort_profile: t must be >= 0");
    EffortSchedule s(pol);
    std::vector<double> before;
    for (;;) {
        before = s.levels();
        const double t0 = s.time();
        const auto ev = s.step();
        if (ev == EffortSchedule::Event::brainstorm) continue;
        if (ev == EffortSchedule::Event::done) break;
        const EffortSegment& seg = s.segment();
        const double t1 = t0 + seg.duration();
        if (t < t1) {
            EffortProfile out;
            out.efforts = before;
            out.allocation.assign(before.size(), 0.0);
            const double per = (t - t0) / static_cast<double>(seg.group);
            for (std::size_t i = 0; i < before.size(); ++i) {
                if (before[i] == seg.from) {
                    out.efforts[i] = seg.from + per;
                    out.allocation[i] = 1.0 / static_cast<double>(seg.group);
                }
            }
            return out;
        }
    }
    throw SolverError("effort_profile: schedule ended before t");
}

namespace detail {

/// Discounted payoff of a policy conditional on one arm law.
template <ArmLaw Arm>
double conditional_payoff(const Arm& arm, double r, double c, const ThresholdPolicy& pol) {
    EffortSchedule s(pol);
    double logP = 0.0;  // log survival of all approaches so far
    double value = 0.0;
    const bool stationary = pol.horizon == 0 && !pol.thresholds.empty() &&
                            std::isfinite(pol.thresholds.back());
    for (int guard = 0; guard < 10'000'000; ++guard) {
        const double t = s.time();
        // Stationary continuation: every approach is at or above the final
        // threshold K; each later approach is brainstormed, worked alone up
        // to K, and abandoned: a geometric series.
        if (stationary && s.arms() == pol.thresholds.size() && s.arms() > 0) {
            const double K = pol.thresholds.back();
            const double lo = *std::min_element(s.levels().begin(), s.levels().end());
            if (lo >= K) {
                const double denom = 1.0 - std::exp(-r * K) * arm.survival(K);
                if (!(denom > 0.0))
                    throw SolverError("policy_payoff: divergent stationary tail (K = 0)");
                value += std::exp(-r * t + logP) * (-c + arm.discounted_success(r, K)) / denom;
                return value;
            }
        }
        const auto ev = s.step();
        if (ev == EffortSchedule::Event::done) return value;
        if (ev == EffortSchedule::Event::brainstorm) {
            value -= c * std::exp(-r * t + logP);
            continue;
        }
        const EffortSegment& seg = s.segment();
        const int m = static_cast<int>(seg.group);
        value += std::exp(-r * t + logP) * arm.segment_success(r, m, seg.from, seg.to - seg.from);
        if (std::isinf(seg.to)) return value;
        logP += m * (arm.log_survival(seg.to) - arm.log_survival(seg.from));
        if (-r * s.time() + logP < -80.0) return value;  // remaining mass < 1e-34
    }
    throw SolverError("policy_payoff: schedule did not terminate");
}

}  // namespace detail

/// 1 - prod_n S_theta(xi_n(t)): breakthrough probability by time t in state theta.
inline double breakthrough_cdf(const ModelParams& p, const ThresholdPolicy& pol,
                               Difficulty theta, double t) {
    const EffortProfile prof = effort_profile(pol, t);
    double logS = 0.0;
    for (double K : prof.efforts) logS += log_survival_at(p.nu0, p.lambda(theta), K);
    return -std::expm1(logS);
}

/// Prior-weighted breakthrough CDF.
inline double breakthrough_cdf(const ModelParams& p, const ThresholdPolicy& pol, double t) {
    double F = 0.0;
    for (Difficulty th : kStates)
        if (p.prior(th) > 0.0) F += p.prior(th) * breakthrough_cdf(p, pol, th, t);
    return F;
}

/// Expected discounted payoff net of survival-weighted brainstorm costs.
inline double policy_payoff(const ModelParams& p, const ThresholdPolicy& pol) {
    double v = 0.0;
    for (Difficulty th : kStates)
        if (p.prior(th) > 0.0)
            v += p.prior(th) * detail::conditional_payoff(arm_for(p, th), p.r, p.c, pol);
    return v;
}

/// Payoff in the rate-mixture model with hard-state prior @p delta0.
inline double policy_payoff_general(const RateDistribution& gE, const RateDistribution& gH,
                                    double r, double c, double delta0,
                                    const ThresholdPolicy& pol) {
    double v = 0.0;
    if (delta0 < 1.0)
        v += (1.0 - delta0) * detail::conditional_payoff(MixtureArm{gE}, r, c, pol);
    if (delta0 > 0.0) v += delta0 * detail::conditional_payoff(MixtureArm{gH}, r, c, pol);
    return v;
}

/// Closed-form value of the stationary policy {K, K, ...} in one state.
inline double stationary_value(const ModelParams& p, Difficulty theta, double K) {
    if (!(K > 0.0)) throw SolverError("stationary_value: K must be > 0");
    const ValidityArm arm = arm_for(p, theta);
    return (-p.c + arm.discounted_success(p.r, K)) / (1.0 - std::exp(-p.r * K) * arm.survival(K));
}

/// Result of a grid search over monotone threshold vectors.
struct BruteForceResult {
    ThresholdPolicy policy;
    double payoff = -kInf;
    std::size_t evaluations = 0;
};

/**
 * Exhaustive search over nondecreasing threshold vectors of length
 * @p n_arms drawn from @p grid.  Later approaches follow @p tail when it is
 * non-empty (e.g. the solved thresholds K_{n_arms+1}, ...); otherwise the
 * continuation is frozen at the last searched threshold.
 *
 * @p payoff maps a ThresholdPolicy to its value.  Cells are evaluated in
 * parallel over the first coordinate; ties resolve to the
 * lexicographically smallest vector so the result is deterministic.
 */
template <class Payoff>
BruteForceResult brute_force_search(Payoff&& payoff, std::size_t n_arms,
                                    std::span<const double> grid,
                                    std::span<const double> tail = {}, unsigned workers = 0) {
    if (grid.empty()) throw DomainError("brute_force_thresholds: empty grid");
    if (n_arms < 1 || n_arms > 4)
        throw DomainError("brute_force_thresholds: n_arms must be in [1, 4]");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw DomainError("brute_force_thresholds: grid must be strictly increasing");
    const std::size_t G = grid.size();
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, G));

    struct Best {
        std::vector<std::size_t> idx;
        double value = -kInf;
        std::size_t count = 0;
    };
    std::vector<Best> best(G);
    std::atomic<std::size_t> next{0};

    auto work = [&]() {
        std::vector<std::size_t> idx(n_arms);
        ThresholdPolicy pol;
        pol.thresholds.assign(n_arms, 0.0);
        pol.thresholds.insert(pol.thresholds.end(), tail.begin(), tail.end());
        for (;;) {
            const std::size_t first = next.fetch_add(1);
            if (first >= G) return;
            Best& b = best[first];
            // Enumerate nondecreasing tails idx[1..] >= idx[0] in lexicographic order.
            idx.assign(n_arms, first);
            for (;;) {
                for (std::size_t j = 0; j < n_arms; ++j) pol.thresholds[j] = grid[idx[j]];
                const double v = payoff(pol);
                ++b.count;
                if (v > b.value) {
                    b.value = v;
                    b.idx = idx;
                }
                std::size_t j = n_arms;
                while (j > 1 && idx[j - 1] + 1 >= G) --j;
                if (j <= 1) break;
                ++idx[j - 1];
                for (std::size_t k = j; k < n_arms; ++k) idx[k] = idx[j - 1];
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();

    BruteForceResult out;
    for (const Best& b : best) {
        out.evaluations += b.count;
        if (b.value > out.payoff) {  // strict: earlier (smaller) first index wins ties
            out.payoff = b.value;
            out.policy.thresholds.clear();
            for (std::size_t i : b.idx) out.policy.thresholds.push_back(grid[i]);
        }
    }
    return out;
}

/// Brute-force certification oracle for the baseline model.
inline BruteForceResult brute_force_thresholds(const ModelParams& p, std::size_t n_arms,
                                               std::span<const double> grid,
                                               std::span<const double> tail = {},
                                               unsigned workers = 0) {
    validate(p, Regime::discrete);
    return brute_force_search([&p](const ThresholdPolicy& pol) { return policy_payoff(p, pol); },
                              n_arms, grid, tail, workers);
}

}  // namespace brainstorm

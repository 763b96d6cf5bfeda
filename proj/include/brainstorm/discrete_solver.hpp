// SPDX-License-Identifier: MIT
/**
 * @file discrete_solver.hpp
 * @brief Optimal effort thresholds of the discrete-arm model.
 *
 * Known difficulty: a single Gittins threshold K*, the unique root of a
 * closed-form single-crossing expression.  Unknown difficulty: a sequence
 * K*_1 < K*_2 < ... where K*_n is the unique root of
 *
 *     (1 - delta0) S_E(K)^n phi_E(K) + delta0 S_H(K)^n phi_H(K) = 0,
 *
 * which is solved independently for each n.  The same machinery handles
 * finite rate mixtures.  When the hard state never produces breakthroughs
 * the sequence may end: beyond some count no further approach is worth its
 * cost, and the remaining thresholds are +infinity.
 */

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "brainstorm/arm_law.hpp"
#include "brainstorm/core_model.hpp"
#include "brainstorm/errors.hpp"
#include "brainstorm/numerics.hpp"
#include "brainstorm/policy_eval.hpp"

namespace brainstorm {

/**
 * Solved threshold sequence.
 *
 * thresholds[n-1] = K*_n for every n that has a finite root.  When
 * max_approaches is set (value N), K*_n = +infinity for all n >= N: the
 * agent generates at most N approaches.  brainstorm_times[n-1] = n K*_n is
 * the calendar time at which approach n+1 is brainstormed.
 */
struct ThresholdSequence {
    std::vector<double> thresholds;
    std::vector<double> brainstorm_times;
    std::vector<double> residuals;  ///< FOC residual at each root
    std::optional<std::size_t> max_approaches;
    double bracket_low = 0.0;   ///< known-easy threshold K*_E
    double bracket_high = kInf; ///< known-hard threshold K*_H (inf if none)

    [[nodiscard]] bool truncated() const { return max_approaches.has_value(); }

    /// Policy that follows this sequence; stationary beyond the solved range
    /// unless the sequence is truncated.
    [[nodiscard]] ThresholdPolicy policy() const {
        ThresholdPolicy pol;
        pol.thresholds = thresholds;
        if (max_approaches) pol.horizon = *max_approaches;
        return pol;
    }
};

// ---------------------------------------------------------------------------
// Known difficulty
// ---------------------------------------------------------------------------

/// Single-crossing expression whose root is the known-difficulty threshold.
inline double benchmark_condition(const ModelParams& p, double K) {
    const double l = p.lambdaE, r = p.r, c = p.c, nu0 = p.nu0;
    return 1.0 + c * (r + l) / (l * (1.0 - nu0)) - l / (r + l) * std::exp(-r * K) -
           (r / (r + l) - c * r / (nu0 * l)) * std::exp(l * K);
}

inline double benchmark_condition_derivative(const ModelParams& p, double K) {
    const double l = p.lambdaE, r = p.r, c = p.c, nu0 = p.nu0;
    return l * r / (r + l) * std::exp(-r * K) - (l * r / (r + l) - c * r / nu0) * std::exp(l * K);
}

namespace detail {

inline void require_known(const ModelParams& p, const char* what) {
    if (!p.known_difficulty())
        throw DomainError(std::string(what) + ": requires lambdaE == lambdaH");
    if (!(p.lambdaE > 0.0)) throw DomainError(std::string(what) + ": requires lambda > 0");
}

}  // namespace detail

/// Gittins threshold K* of the known-difficulty model.
inline double solve_benchmark_threshold(const ModelParams& p) {
    detail::require_known(p, "solve_benchmark_threshold");
    validate(p, Regime::discrete);
    auto f = [&](double K) { return benchmark_condition(p, K); };
    auto df = [&](double K) { return benchmark_condition_derivative(p, K); };
    double hi = 1.0 / p.lambdaE;
    for (int k = 0; k < 200 && f(hi) > 0.0; ++k) hi *= 2.0;
    return numerics::monotone_root(f, df, 0.0, hi, 3, "benchmark threshold");
}

/// Value of repeatedly working fresh approaches for tauD each (per unit of r).
inline double gittins_objective(const ModelParams& p, double tauD) {
    detail::require_known(p, "gittins_objective");
    if (!(tauD > 0.0)) throw DomainError("gittins_objective: tauD must be > 0");
    const double l = p.lambdaE, r = p.r;
    const double num =
        -p.c * r + p.nu0 * (r * l / (r + l)) * numerics::one_minus_exp((r + l) * tauD);
    const double den = 1.0 - std::exp(-r * tauD) * survival_at(p.nu0, l, tauD);
    return num / den;
}

// ---------------------------------------------------------------------------
// Unknown difficulty
// ---------------------------------------------------------------------------

namespace detail {

/// Sign-equivalent ratio form of the learning condition, its derivative and
/// the raw residual.
template <ArmLaw Arm>
struct LearningCondition {
    const Arm& easy;
    const Arm& hard;
    double r, c, delta0;
    double n;

    [[nodiscard]] double log_ratio(double K) const {
        return n * (easy.log_survival(K) - hard.log_survival(K));
    }
    [[nodiscard]] double operator()(double K) const {
        double v = 0.0;
        if (delta0 > 0.0) v += delta0 * hard.phi(r, c, K);
        if (delta0 < 1.0) v += (1.0 - delta0) * std::exp(log_ratio(K)) * easy.phi(r, c, K);
        return v;
    }
    [[nodiscard]] double derivative(double K) const {
        double v = 0.0;
        if (delta0 > 0.0) v += delta0 * hard.phi_derivative(r, c, K);
        if (delta0 < 1.0) {
            const double R = std::exp(log_ratio(K));
            const double dlog = n * (hard.hazard(K) - easy.hazard(K));
            v += (1.0 - delta0) * R *
                 (easy.phi_derivative(r, c, K) + dlog * easy.phi(r, c, K));
        }
        return v;
    }
    [[nodiscard]] double residual(double K) const {
        return (1.0 - delta0) * std::exp(n * easy.log_survival(K)) * easy.phi(r, c, K) +
               delta0 * std::exp(n * hard.log_survival(K)) * hard.phi(r, c, K);
    }
    /// Limit of the ratio form as K -> infinity.
    [[nodiscard]] double limit() const {
        const double phiE = r * c - r * easy.discounted_success(r, kInf);
        const double phiH = r * c - r * hard.discounted_success(r, kInf);
        const double sE = easy.limit_survival(), sH = hard.limit_survival();
        double ratio = 1.0;
        if (sH > 0.0)
            ratio = std::pow(sE / sH, n);
        else if (sE > 0.0)
            ratio = kInf;
        return delta0 * phiH + (1.0 - delta0) * ratio * phiE;
    }
};

template <ArmLaw Arm>
ThresholdSequence solve_threshold_sequence(const Arm& easy, const Arm& hard, double r, double c,
                                           double delta0, std::size_t n_max) {
    if (n_max < 1) throw DomainError("threshold solver: n_max must be >= 1");
    ThresholdSequence seq;
    seq.bracket_low = known_state_threshold(easy, r, c);
    seq.bracket_high = known_state_threshold(hard, r, c);
    if (!std::isfinite(seq.bracket_low))
        throw SolverError("threshold solver: easy-state threshold is infinite");
    const double lo = seq.bracket_low * (1.0 - 1e-6);
    for (std::size_t n = 1; n <= n_max; ++n) {
        LearningCondition<Arm> L{easy, hard, r, c, delta0, static_cast<double>(n)};
        double hi = kInf;
        if (std::isfinite(seq.bracket_high)) {
            hi = seq.bracket_high * (1.0 + 1e-6);
        } else {
            // Geometric ladder; a point counts as negative only beyond roundoff.
            double inf_val = kInf;
            for (int k = 0; k <= 40; ++k) {
                const double K = std::max(lo, 1.0) * std::ldexp(1.0, k);
                const double v = L(K);
                inf_val = std::min(inf_val, v);
                if (v < -1e-14) {
                    hi = K;
                    break;
                }
            }
            if (!std::isfinite(hi)) {
                if (inf_val > -1e-14 && L.limit() >= -1e-14) {
                    seq.max_approaches = n;
                    break;
                }
                std::ostringstream os;
                os << "threshold solver: no sign change for n = " << n;
                throw SolverError(os.str());
            }
        }
        const double K = numerics::monotone_root(
            [&](double x) { return L(x); }, [&](double x) { return L.derivative(x); }, lo, hi, 3,
            "learning threshold");
        seq.thresholds.push_back(K);
        seq.brainstorm_times.push_back(static_cast<double>(n) * K);
        seq.residuals.push_back(L.residual(K));
    }
    return seq;
}

}  // namespace detail

/// Residual of the learning condition at effort K for n approaches.
inline double learning_condition(const ModelParams& p, std::size_t n, double K) {
    const ValidityArm e = arm_for(p, Difficulty::easy), h = arm_for(p, Difficulty::hard);
    return detail::LearningCondition<ValidityArm>{e, h, p.r, p.c, p.delta0,
                                                  static_cast<double>(n)}
        .residual(K);
}

/// Optimal thresholds K*_1..K*_{n_max} under difficulty learning.
inline ThresholdSequence solve_learning_thresholds(const ModelParams& p, std::size_t n_max) {
    validate(p, Regime::discrete);
    const ValidityArm e = arm_for(p, Difficulty::easy), h = arm_for(p, Difficulty::hard);
    return detail::solve_threshold_sequence(e, h, p.r, p.c, p.delta0, n_max);
}

/// Expected value of working one approach forever, averaged over states.
inline double general_cost_bound(const RateDistribution& gE, const RateDistribution& gH,
                                 double r, double delta0) {
    return (1.0 - delta0) * gE.discounted_success(r, kInf) +
           delta0 * gH.discounted_success(r, kInf);
}

/// Thresholds of the rate-mixture model (checks FOSD, patience ordering and cost bound).
inline ThresholdSequence solve_general_thresholds(const RateDistribution& gE,
                                                  const RateDistribution& gH, double r, double c,
                                                  double delta0, std::size_t n_max) {
    if (gE.empty() || gH.empty()) throw DomainError("solve_general_thresholds: empty distribution");
    if (!(r > 0.0) || !(c > 0.0) || !(delta0 >= 0.0 && delta0 <= 1.0))
        throw DomainError("solve_general_thresholds: need r > 0, c > 0, delta0 in [0,1]");
    if (!fosd(gE, gH))
        throw PreconditionError(
            "solve_general_thresholds: easy distribution must first-order dominate the hard one");
    const double bound = general_cost_bound(gE, gH, r, delta0);
    if (!(c < bound)) {
        std::ostringstream os;
        os << "solve_general_thresholds: cost bound violated (c must be < " << bound << ")";
        throw FeasibilityError(os.str());
    }
    const MixtureArm e{gE}, h{gH};
    const double KE = known_state_threshold(e, r, c);
    const double KH = known_state_threshold(h, r, c);
    const bool identical = gE.atoms().size() == gH.atoms().size() &&
                           std::equal(gE.atoms().begin(), gE.atoms().end(), gH.atoms().begin(),
                                      [](const RateAtom& a, const RateAtom& b) {
                                          return a.rate == b.rate && a.mass == b.mass;
                                      });
    if (!identical && !(KH > KE))
        throw PreconditionError(
            "solve_general_thresholds: difficulty-requires-patience fails (hard-state "
            "threshold must exceed easy-state threshold)");
    return detail::solve_threshold_sequence(e, h, r, c, delta0, n_max);
}

/// Beliefs and effort split along the policy induced by @p seq at time t.
struct PathPoint {
    BeliefSnapshot beliefs;
    EffortProfile profile;
};

/// Beliefs on the optimal path at calendar time t.
inline PathPoint optimal_belief_path(const ModelParams& p, const ThresholdSequence& seq,
                                     double t) {
    detail::require(t >= 0.0, "optimal_belief_path: t must be >= 0");
    if (!seq.truncated()) {
        if (seq.thresholds.empty()) throw RangeError("optimal_belief_path: empty sequence");
        const double limit = seq.brainstorm_times.back();
        if (t > limit) {
            std::ostringstream os;
            os << "optimal_belief_path: t = " << t << " beyond solved horizon " << limit;
            throw RangeError(os.str());
        }
    }
    PathPoint out;
    out.profile = effort_profile(seq.policy(), t);
    out.beliefs = beliefs(p, out.profile.efforts);
    return out;
}

}  // namespace brainstorm

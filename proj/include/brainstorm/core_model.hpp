// SPDX-License-Identifier: MIT
/**
 * @file core_model.hpp
 * @brief Closed-form primitives of the problem-solving model.
 *
 * An agent brainstorms approaches (arms) at cost c each.  An approach is
 * valid with prior probability nu0; effort on a valid approach yields a
 * breakthrough at Poisson rate lambda_theta, where the difficulty state
 * theta in {Easy, Hard} is itself unknown (Hard with probability delta0).
 *
 * This header provides survival probabilities, posterior beliefs, the
 * marginal-value functions that drive the threshold solvers (baseline and
 * finite rate-mixture variants), and the continuum breakthrough CDF F(x, t)
 * together with all its first and second partial derivatives.
 *
 * Every function is pure.  Exponentials are evaluated through expm1/log1p
 * and ratio forms so beliefs stay accurate for effort near zero and for very
 * large effort or arm counts.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "brainstorm/errors.hpp"
#include "brainstorm/numerics.hpp"

namespace brainstorm {

enum class Difficulty { easy, hard };

inline const char* to_string(Difficulty d) { return d == Difficulty::easy ? "easy" : "hard"; }

/// Which feasibility bound a parameter set must satisfy.
enum class Regime {
    basic,      ///< domain checks only
    discrete,   ///< discrete-arm model: expected single-approach value exceeds c
    continuum,  ///< continuum limit: c < nu0
};

/**
 * Primitive tuple (r, nu0, delta0, lambdaE, lambdaH, c).
 *
 * Use make_params() to obtain a validated instance; the aggregate is left
 * public so solvers can build rescaled copies cheaply.
 */
struct ModelParams {
    double r = 1.0;        ///< discount rate (> 0)
    double nu0 = 0.5;      ///< prior probability an approach is valid, in (0,1)
    double delta0 = 0.5;   ///< prior probability the problem is hard, in [0,1]
    double lambdaE = 1.0;  ///< breakthrough rate when easy (>= lambdaH)
    double lambdaH = 1.0;  ///< breakthrough rate when hard (>= 0)
    double c = 0.1;        ///< brainstorm cost (> 0)

    [[nodiscard]] double lambda(Difficulty d) const {
        return d == Difficulty::easy ? lambdaE : lambdaH;
    }
    [[nodiscard]] double prior(Difficulty d) const {
        return d == Difficulty::easy ? 1.0 - delta0 : delta0;
    }
    [[nodiscard]] bool known_difficulty() const { return lambdaE == lambdaH; }
};

inline constexpr std::array<Difficulty, 2> kStates{Difficulty::hard, Difficulty::easy};

/// Upper bound on c under which brainstorming a single approach is worthwhile.
inline double discrete_cost_bound(const ModelParams& p) {
    auto term = [&](double lam) { return lam > 0.0 ? lam / (p.r + lam) : 0.0; };
    return p.nu0 * (1.0 - p.delta0) * term(p.lambdaE) + p.nu0 * p.delta0 * term(p.lambdaH);
}

/// Throws DomainError / FeasibilityError when @p p is unusable in @p regime.
inline void validate(const ModelParams& p, Regime regime = Regime::discrete) {
    std::ostringstream os;
    os.precision(17);
    if (!(p.r > 0.0) || !std::isfinite(p.r)) os << "r must be > 0; ";
    if (!(p.nu0 > 0.0 && p.nu0 < 1.0)) os << "nu0 must lie in (0,1); ";
    if (!(p.delta0 >= 0.0 && p.delta0 <= 1.0)) os << "delta0 must lie in [0,1]; ";
    if (!(p.lambdaH >= 0.0) || !std::isfinite(p.lambdaH)) os << "lambdaH must be >= 0; ";
    if (!(p.lambdaE >= p.lambdaH) || !std::isfinite(p.lambdaE))
        os << "lambdaE must be >= lambdaH; ";
    if (!(p.c > 0.0) || !std::isfinite(p.c)) os << "c must be > 0; ";
    if (!os.str().empty()) throw DomainError("invalid model parameters: " + os.str());

    if (regime == Regime::discrete) {
        const double bound = discrete_cost_bound(p);
        if (!(p.c < bound)) {
            os << "infeasible: c = " << p.c << " must be < " << bound
               << " (expected value of a single approach)";
            throw FeasibilityError(os.str());
        }
    } else if (regime == Regime::continuum) {
        if (!(p.c < p.nu0)) {
            os << "infeasible: continuum model needs c < nu0 (c = " << p.c
               << ", nu0 = " << p.nu0 << ")";
            throw FeasibilityError(os.str());
        }
    }
}

/// Validated constructor.
inline ModelParams make_params(double r, double nu0, double delta0, double lambdaE,
                               double lambdaH, double c, Regime regime = Regime::discrete) {
    ModelParams p{r, nu0, delta0, lambdaE, lambdaH, c};
    validate(p, regime);
    return p;
}

/// Known-difficulty parameter set with common rate @p lambda.
inline ModelParams make_known(double r, double nu0, double lambda, double c,
                              Regime regime = Regime::discrete) {
    return make_params(r, nu0, 0.0, lambda, lambda, c, regime);
}

// ---------------------------------------------------------------------------
// Discrete-arm primitives
// ---------------------------------------------------------------------------

/// S(K) = 1 - nu0 + nu0 e^{-lambda K}
inline double survival_at(double nu0, double lambda, double K) {
    return 1.0 - nu0 * numerics::one_minus_exp(lambda * K);
}

/// log S(K), accurate near K = 0.
inline double log_survival_at(double nu0, double lambda, double K) {
    return std::log1p(-nu0 * numerics::one_minus_exp(lambda * K));
}

/// Probability that effort K on one approach yields no breakthrough in state theta.
inline double survival(const ModelParams& p, Difficulty theta, double K) {
    detail::require(K >= 0.0, "survival: effort K must be >= 0");
    return survival_at(p.nu0, p.lambda(theta), K);
}

/// Posterior validity nu(K) after effort K without success at rate lambda.
inline double interim_belief(const ModelParams& p, double lambda, double K) {
    detail::require(K >= 0.0 && lambda >= 0.0, "interim_belief: need K >= 0 and lambda >= 0");
    // nu0 e^{-lK} / (nu0 e^{-lK} + 1 - nu0) = 1 / (1 + (1-nu0)/nu0 e^{lK})
    const double lk = lambda * K;
    if (lk > 700.0) return 0.0;
    return 1.0 / (1.0 + (1.0 - p.nu0) / p.nu0 * std::exp(lk));
}

/// Posterior validity conditional on the difficulty state.
inline double interim_belief(const ModelParams& p, Difficulty theta, double K) {
    return interim_belief(p, p.lambda(theta), K);
}

/// P[theta = H] after N approaches each received effort K without success.
inline double difficulty_belief(const ModelParams& p, double K, double N) {
    detail::require(K >= 0.0 && N >= 0.0, "difficulty_belief: need K >= 0 and N >= 0");
    if (p.delta0 <= 0.0) return 0.0;
    if (p.delta0 >= 1.0) return 1.0;
    const double logratio = N * (log_survival_at(p.nu0, p.lambdaE, K) -
                                 log_survival_at(p.nu0, p.lambdaH, K));
    return p.delta0 / (p.delta0 + (1.0 - p.delta0) * std::exp(logratio));
}

/// Posterior beliefs given an arbitrary effort history.
struct BeliefSnapshot {
    std::vector<double> arm_beliefs;  ///< P[approach i valid | history]
    double difficulty_belief = 0.0;   ///< P[theta = H | history]
};

/// Exact Bayes posterior for the effort vector @p efforts (brainstorm order).
inline BeliefSnapshot beliefs(const ModelParams& p, std::span<const double> efforts) {
    double logw[2];
    for (int s = 0; s < 2; ++s) {
        const Difficulty th = kStates[static_cast<std::size_t>(s)];
        const double pr = p.prior(th);
        if (pr <= 0.0) {
            logw[s] = -std::numeric_limits<double>::infinity();
            continue;
        }
        double acc = std::log(pr);
        for (double K : efforts) {
            detail::require(K >= 0.0, "beliefs: efforts must be >= 0");
            acc += log_survival_at(p.nu0, p.lambda(th), K);
        }
        logw[s] = acc;
    }
    const double norm = numerics::log_add(logw[0], logw[1]);
    const double wH = std::exp(logw[0] - norm);
    const double wE = std::exp(logw[1] - norm);
    BeliefSnapshot out;
    out.difficulty_belief = wH;
    out.arm_beliefs.reserve(efforts.size());
    for (double K : efforts)
        out.arm_beliefs.push_back(wH * interim_belief(p, p.lambdaH, K) +
                                  wE * interim_belief(p, p.lambdaE, K));
    return out;
}

/// P[approach 1 valid] when the two approaches received efforts K1 and K2.
inline double two_arm_validity_belief(const ModelParams& p, double K1, double K2) {
    const std::array<double, 2> e{K1, K2};
    return beliefs(p, e).arm_beliefs[0];
}

/// Marginal value of pushing an approach past effort K in state theta.
///
/// phi = h - (r + h)[-c + nu0 l/(l+r)(1 - e^{-(r+l)K})] - e^{-rK} S(K) h,
/// with h = l nu(K) the conditional hazard.
inline double phi(const ModelParams& p, Difficulty theta, double K) {
    detail::require(K >= 0.0, "phi: effort K must be >= 0");
    const double l = p.lambda(theta);
    const double r = p.r;
    const double h = l * interim_belief(p, l, K);
    const double bracket = -p.c + p.nu0 * l / (l + r) * numerics::one_minus_exp((r + l) * K);
    // e^{-rK} S(K) h = nu0 l e^{-(r+l)K}
    return h - (r + h) * bracket - p.nu0 * l * std::exp(-(r + l) * K);
}

/// d phi / dK = h'(K) (1 - bracket - e^{-rK} S(K)), with h' = -l h (1 - nu).
inline double phi_derivative(const ModelParams& p, Difficulty theta, double K) {
    const double l = p.lambda(theta);
    const double r = p.r;
    const double nu = interim_belief(p, l, K);
    const double dh = -l * l * nu * (1.0 - nu);
    const double bracket = -p.c + p.nu0 * l / (l + r) * numerics::one_minus_exp((r + l) * K);
    return dh * (1.0 - bracket - std::exp(-r * K) * survival_at(p.nu0, l, K));
}

// ---------------------------------------------------------------------------
// Finite rate mixtures
// ---------------------------------------------------------------------------

/// One support point of a rate distribution.
struct RateAtom {
    double rate = 0.0;  ///< breakthrough rate (>= 0)
    double mass = 0.0;  ///< probability (> 0)
};

/**
 * Finite-support distribution of per-approach breakthrough rates.
 *
 * Atoms are sorted ascending by rate and must be distinct with masses
 * summing to one (within 1e-12).
 */
class RateDistribution {
public:
    RateDistribution() = default;

    explicit RateDistribution(std::vector<RateAtom> atoms) : atoms_(std::move(atoms)) {
        if (atoms_.empty()) throw DomainError("RateDistribution: no atoms");
        std::sort(atoms_.begin(), atoms_.end(),
                  [](const RateAtom& a, const RateAtom& b) { return a.rate < b.rate; });
        double total = 0.0;
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            const auto& a = atoms_[i];
            if (!(a.rate >= 0.0) || !std::isfinite(a.rate))
                throw DomainError("RateDistribution: rates must be finite and >= 0");
            if (!(a.mass > 0.0)) throw DomainError("RateDistribution: masses must be > 0");
            if (i > 0 && atoms_[i - 1].rate == a.rate)
                throw DomainError("RateDistribution: duplicate rate");
            total += a.mass;
        }
        if (std::fabs(total - 1.0) > 1e-12)
            throw DomainError("RateDistribution: masses must sum to 1");
    }

    /// {0 w.p. 1 - nu0, lambda w.p. nu0}: the baseline validity model.
    static RateDistribution two_point(double nu0, double lambda) {
        if (lambda == 0.0) return RateDistribution({{0.0, 1.0}});
        return RateDistribution({{0.0, 1.0 - nu0}, {lambda, nu0}});
    }

    [[nodiscard]] const std::vector<RateAtom>& atoms() const { return atoms_; }
    [[nodiscard]] bool empty() const { return atoms_.empty(); }
    [[nodiscard]] double min_rate() const { return atoms_.front().rate; }

    /// P[rate <= x]
    [[nodiscard]] double cdf(double x) const {
        double acc = 0.0;
        for (const auto& a : atoms_)
            if (a.rate <= x) acc += a.mass;
        return acc;
    }

    /// S(K) = sum mass e^{-rate K}
    [[nodiscard]] double survival(double K) const {
        double acc = 0.0;
        for (const auto& a : atoms_) acc += a.mass * std::exp(-a.rate * K);
        return acc;
    }

    /// log S(K), stable when every rate is positive and K is large.
    [[nodiscard]] double log_survival(double K) const {
        const double a0 = min_rate();
        double acc = 0.0;
        for (const auto& a : atoms_) acc += a.mass * std::exp(-(a.rate - a0) * K);
        return std::log(acc) - a0 * K;
    }

    /// Conditional hazard lambda(K) = E[rate e^{-rate K}] / S(K) and its
    /// derivative lambda'(K) = lambda^2 - E[rate^2 e^{-rate K}] / S(K).
    [[nodiscard]] std::pair<double, double> hazard_and_slope(double K) const {
        const double a0 = min_rate();
        double s = 0.0, m1 = 0.0, m2 = 0.0;
        for (const auto& a : atoms_) {
            const double w = a.mass * std::exp(-(a.rate - a0) * K);
            s += w;
            m1 += w * a.rate;
            m2 += w * a.rate * a.rate;
        }
        const double h = m1 / s;
        return {h, h * h - m2 / s};
    }

    [[nodiscard]] double hazard(double K) const { return hazard_and_slope(K).first; }

    /// int_0^K e^{-rt} lambda(t) S(t) dt in closed form.
    [[nodiscard]] double discounted_success(double r, double K) const {
        double acc = 0.0;
        for (const auto& a : atoms_) {
            if (a.rate == 0.0) continue;
            acc += a.mass * a.rate / (r + a.rate) *
                   (std::isinf(K) ? 1.0 : numerics::one_minus_exp((r + a.rate) * K));
        }
        return acc;
    }

private:
    std::vector<RateAtom> atoms_;
};

/// True when @p hi first-order stochastically dominates @p lo (CDF check on
/// the union of atoms).
inline bool fosd(const RateDistribution& hi, const RateDistribution& lo) {
    std::vector<double> pts;
    for (const auto& a : hi.atoms()) pts.push_back(a.rate);
    for (const auto& a : lo.atoms()) pts.push_back(a.rate);
    for (double x : pts)
        if (hi.cdf(x) > lo.cdf(x) + 1e-12) return false;
    return true;
}

/// Mixture analogue of phi for a finite rate distribution.
inline double phi_general(const RateDistribution& g, double r, double c, double K) {
    if (g.empty()) throw DomainError("phi_general: empty distribution");
    detail::require(K >= 0.0, "phi_general: effort K must be >= 0");
    const double h = g.hazard(K);
    const double bracket = -c + g.discounted_success(r, K);
    double tail = 0.0;  // e^{-rK} S(K) h = sum mass rate e^{-(r+rate)K}
    for (const auto& a : g.atoms()) tail += a.mass * a.rate * std::exp(-(r + a.rate) * K);
    return h - (r + h) * bracket - tail;
}

/// d phi_general / dK = h'(K) (1 - bracket - e^{-rK} S(K)).
inline double phi_general_derivative(const RateDistribution& g, double r, double c, double K) {
    const auto [h, dh] = g.hazard_and_slope(K);
    (void)h;
    const double bracket = -c + g.discounted_success(r, K);
    return dh * (1.0 - bracket - std::exp(-r * K) * g.survival(K));
}

// ---------------------------------------------------------------------------
// Continuum limit
// ---------------------------------------------------------------------------

/// Breakthrough CDF F(x, t) for breadth x and time t; F = 0 on the axes.
inline double continuum_cdf(const ModelParams& p, double x, double t) {
    detail::require(x >= 0.0 && t >= 0.0, "continuum_cdf: need x >= 0 and t >= 0");
    if (x == 0.0 || t == 0.0) return 0.0;
    double F = 0.0;
    for (Difficulty th : kStates) {
        const double w = p.prior(th);
        if (w == 0.0) continue;
        const double g = p.nu0 * x * numerics::one_minus_exp(p.lambda(th) * t / x);
        F += w * numerics::one_minus_exp(g);
    }
    return F;
}

/**
 * F(x, t) with all first and second partials.
 *
 * The hazard-normalised forms f_a = F_a / (1 - F) are posterior expectations
 * of the per-state exponents and are the numerically robust quantities; the
 * raw partials are recovered by multiplying with survival = 1 - F.
 */
struct ContinuumPartials {
    double F = 0.0;
    double survival = 1.0;  ///< 1 - F
    double Fx = 0.0, Ft = 0.0, Fxx = 0.0, Ftt = 0.0, Fxt = 0.0;
    double fx = 0.0, ft = 0.0, fxx = 0.0, ftt = 0.0, fxt = 0.0;
    double posterior_hard = 0.0;  ///< P[theta = H | no breakthrough by (x, t)]
    /// Posterior moments of the per-state exponents g_theta = nu0 x (1 - e^{-lambda t / x}).
    /// fxx = mean_gxx - var_gx - fx^2 and fxt = mean_gxt - cov_gx_gt - fx ft; the
    /// split form lets callers cancel the fx^2 and fx ft parts analytically.
    double mean_gxx = 0.0, mean_gxt = 0.0, var_gx = 0.0, cov_gx_gt = 0.0;
};

inline ContinuumPartials continuum_partials(const ModelParams& p, double x, double t) {
    if (!(x > 0.0 && t > 0.0))
        throw DomainError("continuum_partials: need x > 0 and t > 0");
    struct Terms {
        double logw, g, gt, gx, gtt, gxt, gxx;
    };
    std::array<Terms, 2> T{};
    for (std::size_t s = 0; s < 2; ++s) {
        const Difficulty th = kStates[s];
        const double l = p.lambda(th);
        const double z = l * t / x;
        const double ez = std::exp(-z);
        const double om = numerics::one_minus_exp(z);
        const double pr = p.prior(th);
        Terms& u = T[s];
        u.g = p.nu0 * x * om;
        u.logw = pr > 0.0 ? std::log(pr) - u.g : -std::numeric_limits<double>::infinity();
        u.gt = p.nu0 * l * ez;
        u.gx = p.nu0 * (om - z * ez);
        u.gtt = -p.nu0 * l * l / x * ez;
        u.gxt = p.nu0 * l * z / x * ez;
        u.gxx = -p.nu0 * z * z * ez / x;
    }
    const double norm = numerics::log_add(T[0].logw, T[1].logw);
    ContinuumPartials out;
    for (std::size_t s = 0; s < 2; ++s) {
        const Terms& u = T[s];
        const double w = std::exp(u.logw - norm);
        if (w == 0.0) continue;
        out.ft += w * u.gt;
        out.fx += w * u.gx;
        out.ftt += w * (u.gtt - u.gt * u.gt);
        out.fxt += w * (u.gxt - u.gt * u.gx);
        out.fxx += w * (u.gxx - u.gx * u.gx);
        out.mean_gxx += w * u.gxx;
        out.mean_gxt += w * u.gxt;
        if (s == 0) out.posterior_hard = w;
    }
    {
        const double wH = out.posterior_hard, wE = 1.0 - wH;
        const double dgx = T[0].gx - T[1].gx, dgt = T[0].gt - T[1].gt;
        out.var_gx = wH * wE * dgx * dgx;
        out.cov_gx_gt = wH * wE * dgx * dgt;
    }
    double F = 0.0;
    for (std::size_t s = 0; s < 2; ++s) {
        const double pr = p.prior(kStates[s]);
        if (pr > 0.0) F += pr * numerics::one_minus_exp(T[s].g);
    }
    out.F = F;
    out.survival = std::exp(norm);
    out.Fx = out.survival * out.fx;
    out.Ft = out.survival * out.ft;
    out.Fxx = out.survival * out.fxx;
    out.Ftt = out.survival * out.ftt;
    out.Fxt = out.survival * out.fxt;
    return out;
}

/**
 * P[at least one opened approach is valid | no breakthrough by (x, t)].
 *
 * Valid approaches arrive as a Poisson count with mean nu0 x, so
 * P[none valid and no breakthrough] = e^{-nu0 x} in either state and the
 * posterior is 1 - e^{-nu0 x} / (1 - F).
 */
inline double continuum_valid_belief(const ModelParams& p, double x, double t) {
    detail::require(x >= 0.0 && t >= 0.0, "continuum_valid_belief: need x >= 0 and t >= 0");
    if (x == 0.0) return 0.0;
    if (t == 0.0) return numerics::one_minus_exp(p.nu0 * x);
    const double log_surv = std::log(continuum_partials(p, x, t).survival);
    return numerics::one_minus_exp(p.nu0 * x + log_surv);
}

/// tilde-phi(d) = r nu0 (1 - e^{-ld} - l d e^{-ld}) - r c - c nu0 l e^{-ld},
/// optionally with the success payoff scaled by a share alpha.
inline double depth_value(double r, double nu0, double c, double lambda, double d,
                          double alpha = 1.0) {
    const double ed = std::exp(-lambda * d);
    return r * alpha * nu0 * (numerics::one_minus_exp(lambda * d) - lambda * d * ed) - r * c -
           c * nu0 * lambda * ed;
}

/// d tilde-phi / dd.
inline double depth_value_derivative(double r, double nu0, double c, double lambda, double d,
                                     double alpha = 1.0) {
    const double ed = std::exp(-lambda * d);
    return r * alpha * nu0 * lambda * lambda * d * ed + c * nu0 * lambda * lambda * ed;
}

}  // namespace brainstorm

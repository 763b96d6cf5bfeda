// SPDX-License-Identifier: MIT
/**
 * @file arm_law.hpp
 * @brief Per-approach breakthrough laws conditional on the difficulty state.
 *
 * An arm law describes how a single approach responds to cumulative effort K
 * once the difficulty state is fixed: its survival S(K), conditional hazard
 * h(K) = -S'(K)/S(K), discounted success mass and the marginal-value function
 * phi.  Two laws are provided:
 *
 *  - ValidityArm: valid with probability nu0, rate lambda if valid (closed
 *    forms everywhere, including segment integrals of the payoff);
 *  - MixtureArm: rate drawn from a finite RateDistribution (segment integrals
 *    by adaptive Gauss-Kronrod quadrature).
 *
 * Solvers and evaluators are templated on the ArmLaw concept so both laws
 * share one implementation.
 */

#pragma once

#include <cmath>
#include <concepts>
#include <limits>

#include "brainstorm/core_model.hpp"
#include "brainstorm/numerics.hpp"

namespace brainstorm {

template <class A>
concept ArmLaw = requires(const A& a, double K, double r, double c, int m) {
    { a.survival(K) } -> std::convertible_to<double>;
    { a.log_survival(K) } -> std::convertible_to<double>;
    { a.hazard(K) } -> std::convertible_to<double>;
    { a.discounted_success(r, K) } -> std::convertible_to<double>;
    { a.phi(r, c, K) } -> std::convertible_to<double>;
    { a.phi_derivative(r, c, K) } -> std::convertible_to<double>;
    { a.limit_survival() } -> std::convertible_to<double>;
    { a.segment_success(r, m, K, K) } -> std::convertible_to<double>;
};

/// Approach that is valid with probability nu0 and then succeeds at rate lambda.
struct ValidityArm {
    double nu0 = 0.5;
    double lambda = 1.0;

    [[nodiscard]] double survival(double K) const { return survival_at(nu0, lambda, K); }
    [[nodiscard]] double log_survival(double K) const {
        return log_survival_at(nu0, lambda, K);
    }
    [[nodiscard]] double belief(double K) const {
        const double lk = lambda * K;
        if (lk > 700.0) return 0.0;
        return 1.0 / (1.0 + (1.0 - nu0) / nu0 * std::exp(lk));
    }
    [[nodiscard]] double hazard(double K) const { return lambda * belief(K); }
    [[nodiscard]] double limit_survival() const { return lambda > 0.0 ? 1.0 - nu0 : 1.0; }

    /// int_0^K e^{-rt} (-S'(t)) dt
    [[nodiscard]] double discounted_success(double r, double K) const {
        if (lambda == 0.0) return 0.0;
        const double full = nu0 * lambda / (r + lambda);
        return std::isinf(K) ? full : full * numerics::one_minus_exp((r + lambda) * K);
    }

    [[nodiscard]] double phi(double r, double c, double K) const {
        const double h = hazard(K);
        const double bracket = -c + discounted_success(r, K);
        return h - (r + h) * bracket - nu0 * lambda * std::exp(-(r + lambda) * K);
    }

    [[nodiscard]] double phi_derivative(double r, double c, double K) const {
        const double nu = belief(K);
        const double dh = -lambda * lambda * nu * (1.0 - nu);
        const double bracket = -c + discounted_success(r, K);
        return dh * (1.0 - bracket - std::exp(-r * K) * survival(K));
    }

    /**
     * Discounted breakthrough probability while m arms, all at effort L, are
     * raised together by dK each (calendar time m dK), normalised by the
     * group's survival at the start:
     *
     *   int_0^dK e^{-r m u} (-d/du)[S(L+u)/S(L)]^m du.
     *
     * With S(L+u)/S(L) = a + b e^{-lambda u} the binomial expansion yields a
     * finite sum of exponential integrals.
     */
    [[nodiscard]] double segment_success(double r, int m, double L, double dK) const {
        if (lambda == 0.0 || dK <= 0.0) return 0.0;
        const double SL = survival(L);
        const double b = nu0 * std::exp(-lambda * L) / SL;
        const double a = 1.0 - b;
        if (m > 60) return segment_success_quadrature(r, m, L, dK);
        double total = 0.0;
        double binom = 1.0;  // C(m, k)
        for (int k = 1; k <= m; ++k) {
            binom = binom * static_cast<double>(m - k + 1) / static_cast<double>(k);
            const double rate = r * m + k * lambda;
            const double span =
                std::isinf(dK) ? 1.0 : numerics::one_minus_exp(rate * dK);
            total += binom * std::pow(a, m - k) * std::pow(b, k) * k * lambda * span / rate;
        }
        return total;
    }

private:
    [[nodiscard]] double segment_success_quadrature(double r, int m, double L, double dK) const {
        const double logSL = log_survival(L);
        auto f = [&](double u) {
            const double q = std::exp(m * (log_survival(L + u) - logSL));
            return std::exp(-r * m * u) * m * q * hazard(L + u);
        };
        const double upper = std::min(dK, 45.0 / (r * m));
        return numerics::integrate(f, 0.0, upper, 1e-13);
    }
};

/// Approach whose breakthrough rate is drawn from a finite distribution.
struct MixtureArm {
    RateDistribution dist;

    [[nodiscard]] double survival(double K) const { return dist.survival(K); }
    [[nodiscard]] double log_survival(double K) const { return dist.log_survival(K); }
    [[nodiscard]] double hazard(double K) const { return dist.hazard(K); }
    [[nodiscard]] double limit_survival() const {
        return dist.min_rate() == 0.0 ? dist.atoms().front().mass : 0.0;
    }
    [[nodiscard]] double discounted_success(double r, double K) const {
        return dist.discounted_success(r, K);
    }
    [[nodiscard]] double phi(double r, double c, double K) const {
        return phi_general(dist, r, c, K);
    }
    [[nodiscard]] double phi_derivative(double r, double c, double K) const {
        return phi_general_derivative(dist, r, c, K);
    }

    /// Same quantity as ValidityArm::segment_success, by quadrature.
    [[nodiscard]] double segment_success(double r, int m, double L, double dK) const {
        if (dK <= 0.0) return 0.0;
        const double logSL = log_survival(L);
        auto f = [&](double u) {
            const double q = std::exp(m * (log_survival(L + u) - logSL));
            return std::exp(-r * m * u) * m * q * hazard(L + u);
        };
        const double upper = std::min(dK, 45.0 / (r * m));
        return numerics::integrate(f, 0.0, upper, 1e-13);
    }
};

static_assert(ArmLaw<ValidityArm>);
static_assert(ArmLaw<MixtureArm>);

/// Baseline arm law for state @p theta.
inline ValidityArm arm_for(const ModelParams& p, Difficulty theta) {
    return ValidityArm{p.nu0, p.lambda(theta)};
}

/**
 * Known-state Gittins threshold: the root of the arm's phi, or +infinity
 * when phi stays nonnegative (working the current approach forever beats
 * brainstorming).  phi is strictly decreasing with phi(0) = (r + h(0)) c > 0.
 */
template <ArmLaw Arm>
double known_state_threshold(const Arm& arm, double r, double c) {
    auto f = [&](double K) { return arm.phi(r, c, K); };
    auto df = [&](double K) { return arm.phi_derivative(r, c, K); };
    double lo = 0.0;
    for (int k = -10; k <= 40; ++k) {
        const double K = std::ldexp(1.0, k);
        if (f(K) < 0.0) return numerics::monotone_root(f, df, lo, K, 3, "known-state threshold");
        lo = K;
    }
    return std::numeric_limits<double>::infinity();
}

}  // namespace brainstorm

// SPDX-License-Identifier: MIT
/**
 * @file numerics.hpp
 * @brief Thin wrappers over Boost.Math root finding, quadrature and
 *        minimisation, plus time-grid helpers.
 */

#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

#include "brainstorm/errors.hpp"

namespace brainstorm::numerics {

/// Bisection on [lo, hi] to an absolute interval width of @p width.
///
/// Requires f(lo) and f(hi) to have opposite signs (a zero at either end is
/// returned directly).  Throws SolverError otherwise.
template <class F>
double bisect(F&& f, double lo, double hi, double width = 1e-13,
              const char* what = "root") {
    const double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (!(std::signbit(flo) != std::signbit(fhi)) || std::isnan(flo) ||
        std::isnan(fhi)) {
        std::ostringstream os;
        os.precision(17);
        os << what << ": no sign change on [" << lo << ", " << hi
           << "] (f = " << flo << ", " << fhi << ")";
        throw SolverError(os.str());
    }
    auto tol = [width](double a, double b) { return std::fabs(b - a) <= width; };
    std::uintmax_t iters = 400;
    auto [a, b] = boost::math::tools::bisect(f, lo, hi, tol, iters);
    // Boost keeps the bracket; return the end with the smaller residual.
    return std::fabs(f(a)) <= std::fabs(f(b)) ? a : b;
}

/**
 * Root of a function known to be strictly monotone on [lo, hi]: bisection to
 * a tight width followed by at most @p newton_steps Newton corrections using
 * the analytic derivative @p df.  A Newton step is accepted only when it
 * stays inside the bracket and does not increase the residual.
 */
template <class F, class DF>
double monotone_root(F&& f, DF&& df, double lo, double hi, int newton_steps = 3,
                     const char* what = "root") {
    double x = bisect(f, lo, hi, 1e-12 * std::max(1.0, std::fabs(hi)), what);
    double fx = f(x);
    for (int k = 0; k < newton_steps && fx != 0.0; ++k) {
        const double d = df(x);
        if (!(d != 0.0) || !std::isfinite(d)) break;
        const double y = x - fx / d;
        if (!(y >= lo && y <= hi)) break;
        const double fy = f(y);
        if (!(std::fabs(fy) <= std::fabs(fx))) break;
        x = y;
        fx = fy;
    }
    return x;
}

namespace detail {

template <class F>
double integrate_recursive(F& f, double a, double b, double abs_tol, unsigned depth) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    double err = 0.0;
    const double v = GK::integrate(f, a, b, 0, 0.0, &err);
    // The reported error is on the reference interval [-1, 1]; rescale it.
    if (err * 0.5 * (b - a) <= abs_tol || depth == 0) return v;
    const double mid = 0.5 * (a + b);
    return integrate_recursive(f, a, mid, 0.5 * abs_tol, depth - 1) +
           integrate_recursive(f, mid, b, 0.5 * abs_tol, depth - 1);
}

}  // namespace detail

/**
 * Adaptive 31-point Gauss–Kronrod integral of f over finite [a, b].
 *
 * Bisection stops once the Kronrod error estimate is below tol times the L1
 * norm of f, so integrands whose signed integral cancels to ~0 do not force
 * refinement down to rounding noise.  The single-panel rule reports its error
 * on the reference interval, so it is rescaled by (b - a) / 2 here.
 */
template <class F>
double integrate(F&& f, double a, double b, double tol = 1e-13) {
    if (a == b) return 0.0;
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    double err = 0.0, L1 = 0.0;
    const double v = GK::integrate(f, a, b, 0, 0.0, &err, &L1);
    const double abs_tol = tol * L1;
    if (err * 0.5 * std::fabs(b - a) <= abs_tol) return v;
    return detail::integrate_recursive(f, a, b, abs_tol, 15);
}

/// Maximise a unimodal function on [lo, hi] (Brent's method).
/// Returns {argmax, max}.
template <class F>
std::pair<double, double> maximize(F&& f, double lo, double hi, int bits = 40) {
    auto neg = [&f](double x) { return -f(x); };
    std::uintmax_t iters = 500;
    auto [x, v] = boost::math::tools::brent_find_minima(neg, lo, hi, bits, iters);
    return {x, -v};
}

/// @p n points from @p lo to @p hi inclusive, evenly spaced.
inline std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
    if (n < 2 || !(hi > lo)) throw DomainError("linear_grid: need n >= 2 and hi > lo");
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    g.back() = hi;
    return g;
}

/// @p n points from @p lo to @p hi inclusive, evenly spaced in log scale.
inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    if (n < 2 || !(hi > lo) || !(lo > 0.0))
        throw DomainError("log_grid: need n >= 2 and 0 < lo < hi");
    std::vector<double> g(n);
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

/// log(exp(a) + exp(b)) without overflow.
inline double log_add(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::fabs(a - b)));
}

/// -expm1(-z) = 1 - e^{-z}, accurate for small z.
inline double one_minus_exp(double z) { return -std::expm1(-z); }

}  // namespace brainstorm::numerics

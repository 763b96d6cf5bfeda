// SPDX-License-Identifier: MIT
/**
 * @file support.hpp
 * @brief Shared test helpers: reference parameter sets, random feasible
 *        draws, failure collection and small independent numerical oracles.
 */

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "brainstorm/core_model.hpp"

namespace brainstorm::testing {

// ---------------------------------------------------------------------------
// Reference parameter sets
// ---------------------------------------------------------------------------

/// Learning example with two difficulty levels (r=1, c=0.1).
inline ModelParams belief_path_params() { return make_params(1.0, 0.75, 0.5, 2.0, 1.0, 0.1); }

/// Known-difficulty benchmark (lambda=1, c=0.2, nu0=0.75, r=1).
inline ModelParams benchmark_params() { return make_known(1.0, 0.75, 1.0, 0.2); }

/// Known-difficulty contract example (lambda=1, c=0.5, nu0=0.85, r=1).
inline ModelParams contract_params() { return make_known(1.0, 0.85, 1.0, 0.5, Regime::continuum); }

/// Learning contract example (lambdaE=3, lambdaH=0.05, delta0=0.05, nu0=0.9, c=0.3, r=1).
inline ModelParams learning_contract_params() {
    return make_params(1.0, 0.9, 0.05, 3.0, 0.05, 0.3, Regime::continuum);
}

/// Hard state never succeeds (lambdaH = 0).
inline ModelParams impossible_hard_params(double c = 0.1) {
    return make_params(1.0, 0.75, 0.5, 2.0, 0.0, c);
}

/// Three-atom rate distributions with easy dominating hard.
inline RateDistribution three_atom_easy() {
    return RateDistribution({{0.0, 0.25}, {1.5, 0.35}, {3.0, 0.4}});
}
inline RateDistribution three_atom_hard() {
    return RateDistribution({{0.0, 0.25}, {0.5, 0.45}, {1.5, 0.3}});
}

// ---------------------------------------------------------------------------
// Random feasible draws
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kPropertySeed = 20240611ULL;
inline constexpr int kPropertyDraws = 100;

/// Learning-model draw with lambdaE > lambdaH > 0, feasible in both regimes.
inline ModelParams draw_learning(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    ModelParams p;
    p.r = 0.3 + 1.7 * U(rng);
    p.nu0 = 0.3 + 0.6 * U(rng);
    p.delta0 = 0.1 + 0.8 * U(rng);
    p.lambdaH = 0.3 + 1.7 * U(rng);
    p.lambdaE = p.lambdaH * (1.2 + 2.8 * U(rng));
    p.c = (0.1 + 0.7 * U(rng)) * discrete_cost_bound(p);
    validate(p, Regime::discrete);
    validate(p, Regime::continuum);
    return p;
}

/// Known-difficulty draw (lambdaE == lambdaH), feasible in both regimes.
inline ModelParams draw_known(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    ModelParams p;
    p.r = 0.3 + 1.7 * U(rng);
    p.nu0 = 0.3 + 0.6 * U(rng);
    p.delta0 = 0.0;
    p.lambdaE = p.lambdaH = 0.3 + 2.7 * U(rng);
    p.c = (0.1 + 0.7 * U(rng)) * discrete_cost_bound(p);
    validate(p, Regime::discrete);
    validate(p, Regime::continuum);
    return p;
}

inline std::string describe(const ModelParams& p) {
    std::ostringstream os;
    os.precision(17);
    os << "{r=" << p.r << ", nu0=" << p.nu0 << ", delta0=" << p.delta0 << ", lambdaE=" << p.lambdaE
       << ", lambdaH=" << p.lambdaH << ", c=" << p.c << "}";
    return os.str();
}

// ---------------------------------------------------------------------------
// Failure collection
// ---------------------------------------------------------------------------

/// Collects property failures; keeps the first few messages per check name.
class Failures {
public:
    void check(bool ok, const std::string& name, const std::function<std::string()>& detail) {
        if (ok) return;
        ++count_;
        std::size_t& n = per_name_[name];
        if (++n <= 2) messages_.push_back(name + ": " + detail());
    }
    [[nodiscard]] bool empty() const { return count_ == 0; }
    [[nodiscard]] std::size_t count() const { return count_; }
    [[nodiscard]] std::string summary() const {
        std::string s;
        for (const auto& m : messages_) s += m + "\n";
        return s;
    }

private:
    std::size_t count_ = 0;
    std::vector<std::string> messages_;
    std::map<std::string, std::size_t> per_name_;
};

inline std::string num(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

// ---------------------------------------------------------------------------
// Independent oracles (deliberately simple; no library numerics)
// ---------------------------------------------------------------------------

/// Plain bisection to machine resolution.
inline double plain_bisect(const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo);
    for (int k = 0; k < 300 && hi - lo > 0.0; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double fm = f(mid);
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Composite Simpson rule with step halving until successive values agree.
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol = 1e-12) {
    auto rule = [&](int n) {
        const double h = (b - a) / n;
        double s = f(a) + f(b);
        for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
        return s * h / 3.0;
    };
    int n = 64;
    double prev = rule(n);
    for (int k = 0; k < 16; ++k) {
        n *= 2;
        const double cur = rule(n);
        if (std::fabs(cur - prev) <= tol * std::max(1.0, std::fabs(cur))) return cur;
        prev = cur;
    }
    return prev;
}

/// Fourth-order central difference of f at x with step h.
inline double central_diff(const std::function<double(double)>& f, double x, double h) {
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

/// Three-point derivative on a non-uniform grid at interior index i.
inline double grid_derivative(const std::vector<double>& t, const std::vector<double>& y, std::size_t i) {
    const double h0 = t[i] - t[i - 1], h1 = t[i + 1] - t[i];
    return (-h1 / (h0 * (h0 + h1))) * y[i - 1] + ((h1 - h0) / (h0 * h1)) * y[i] +
           (h0 / (h1 * (h0 + h1))) * y[i + 1];
}

}  // namespace brainstorm::testing

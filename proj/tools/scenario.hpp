// SPDX-License-Identifier: MIT
/**
 * @file scenario.hpp
 * @brief Scenario configuration for the command-line runner.
 *
 * A scenario is one JSON document:
 *
 * @code{.json}
 * {
 *   "experiment": "dynamic-contract",
 *   "model":  {"r": 1, "nu0": 0.85, "delta0": 0, "lambdaE": 1, "lambdaH": 1, "c": 0.5},
 *   "grid":   {"t_min": 0.01, "t_max": 20, "points": 400, "spacing": "linear"},
 *   "solver": {"root_tol": 1e-9, "integral_tol": 1e-4, "tail_tol": 1e-13},
 *   "output": {"directory": "out/fig7", "format": "csv"}
 * }
 * @endcode
 *
 * Optional blocks: "sweep" {parameter, values}, "thresholds" {n_max},
 * "general_rates" {easy, hard: [[rate, mass], ...]}, "contract" {gamma},
 * "convergence" {n_values}, "two_arm" {K1, K2_max, points}.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "brainstorm/core_model.hpp"
#include "brainstorm/numerics.hpp"

namespace brainstorm::cli {

using Json = nlohmann::ordered_json;

/// Configuration problem detected before any computation.
class ConfigError : public ValidationError {
public:
    ConfigError(std::string id, const std::string& what)
        : ValidationError(what), id_(std::move(id)) {}
    [[nodiscard]] const std::string& id() const { return id_; }

private:
    std::string id_;
};

struct ExperimentInfo {
    const char* name;
    const char* operation;    ///< library operation the experiment exercises
    const char* blocks;       ///< configuration blocks it reads
    const char* reproduces;   ///< what the output series shows
};

inline constexpr std::array<ExperimentInfo, 9> kExperiments{{
    {"benchmark", "solve_benchmark_threshold", "model (lambdaE == lambdaH), optional sweep",
     "known-difficulty threshold K* and its dependence on r, c or lambda"},
    {"learning-thresholds", "solve_learning_thresholds / solve_general_thresholds",
     "model, optional thresholds, optional general_rates",
     "threshold sequence with per-approach and difficulty beliefs at brainstorm times"},
    {"belief-path", "optimal_belief_path / two_arm_validity_belief",
     "model, grid, optional thresholds, optional two_arm",
     "beliefs and effort split along the optimal path; two-approach posterior"},
    {"continuum", "solve_trajectory", "model, grid",
     "optimal breadth and depth of the continuum problem"},
    {"convergence", "convergence_experiment", "model, grid, optional convergence",
     "distance between scaled discrete arm counts and the continuum breadth"},
    {"static-contract", "optimal_static_share", "model, grid",
     "profit-maximising constant share and the induced breadth"},
    {"dynamic-contract", "solve_dynamic_contract", "model, grid, optional sweep",
     "optimal time-varying share, induced breadth, incentive and distortion"},
    {"no-commitment", "no_commitment_equilibrium", "model (lambdaE == lambdaH), grid",
     "stationary spot-contract share compared with the committed contract"},
    {"extensive-margin", "extensive_margin_learning_contract", "model, grid, contract",
     "share path when moral hazard is on the effort level only"},
}};

inline const ExperimentInfo* find_experiment(std::string_view name) {
    for (const auto& e : kExperiments)
        if (name == e.name) return &e;
    return nullptr;
}

struct GridSpec {
    double t_min = 1e-3;
    double t_max = 100.0;
    std::size_t points = 400;
    std::string spacing = "log";

    [[nodiscard]] std::vector<double> build() const {
        return spacing == "log" ? numerics::log_grid(t_min, t_max, points)
                                : numerics::linear_grid(t_min, t_max, points);
    }
};

struct SolverSpec {
    double root_tol = 1e-9;      ///< accepted residual of every solved root
    double integral_tol = 1e-4;  ///< accepted error of the share-law identity
    double tail_tol = 1e-13;     ///< discount weight at which infinite tails are cut
};

struct Sweep {
    std::string parameter;
    std::vector<double> values;
};

struct TwoArm {
    double K1 = 1.0;
    double K2_max = 3.0;
    std::size_t points = 301;
};

struct ScenarioConfig {
    std::string experiment;
    ModelParams model;
    GridSpec grid;
    SolverSpec solver;
    std::string output_directory = "out";
    std::string format = "csv";
    std::optional<Sweep> sweep;
    std::size_t n_max = 10;
    std::optional<std::pair<RateDistribution, RateDistribution>> general_rates;
    std::optional<double> gamma;
    std::vector<double> n_values{10.0, 100.0, 1000.0};
    std::optional<TwoArm> two_arm;
    Json source;  ///< configuration as read, echoed into the manifest
};

namespace detail {

inline double number(const Json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number())
        throw ConfigError("invalid_config", std::string("field '") + key + "' must be a number");
    return j.at(key).get<double>();
}

inline double required_number(const Json& j, const char* block, const char* key) {
    if (!j.contains(key))
        throw ConfigError("invalid_config",
                          std::string("missing field '") + block + "." + key + "'");
    return number(j, key, 0.0);
}

inline RateDistribution rates(const Json& j, const char* which) {
    if (!j.contains(which) || !j.at(which).is_array())
        throw ConfigError("invalid_config",
                          std::string("general_rates.") + which + " must be [[rate, mass], ...]");
    std::vector<RateAtom> atoms;
    for (const auto& a : j.at(which)) {
        if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
            throw ConfigError("invalid_config", "rate atoms must be [rate, mass] pairs");
        atoms.push_back({a[0].get<double>(), a[1].get<double>()});
    }
    return RateDistribution(std::move(atoms));
}

inline bool is_model_field(std::string_view s) {
    return s == "r" || s == "nu0" || s == "delta0" || s == "lambdaE" || s == "lambdaH" ||
           s == "c" || s == "lambda";
}

}  // namespace detail

/// Sets a model field by name; "lambda" sets both rates.
inline void set_model_field(ModelParams& p, std::string_view name, double v) {
    if (name == "r") p.r = v;
    else if (name == "nu0") p.nu0 = v;
    else if (name == "delta0") p.delta0 = v;
    else if (name == "lambdaE") p.lambdaE = v;
    else if (name == "lambdaH") p.lambdaH = v;
    else if (name == "c") p.c = v;
    else if (name == "lambda") p.lambdaE = p.lambdaH = v;
    else throw ConfigError("invalid_config", "unknown model field '" + std::string(name) + "'");
}

/// Parses and validates a scenario document (no files are touched).
inline ScenarioConfig parse_scenario(const Json& j) {
    if (!j.is_object()) throw ConfigError("invalid_config", "scenario must be a JSON object");
    ScenarioConfig cfg;
    cfg.source = j;

    if (!j.contains("experiment") || !j.at("experiment").is_string())
        throw ConfigError("invalid_config", "missing string field 'experiment'");
    cfg.experiment = j.at("experiment").get<std::string>();
    if (!find_experiment(cfg.experiment))
        throw ConfigError("unknown_experiment", "unknown experiment '" + cfg.experiment +
                                                    "' (see the 'list' command)");

    if (!j.contains("model") || !j.at("model").is_object())
        throw ConfigError("invalid_config", "missing object 'model'");
    const Json& m = j.at("model");
    for (const auto& [k, v] : m.items())
        if (!detail::is_model_field(k))
            throw ConfigError("invalid_config", "unknown model field '" + k + "'");
    if (m.contains("lambda")) {
        cfg.model.lambdaE = cfg.model.lambdaH = detail::number(m, "lambda", 1.0);
        cfg.model.delta0 = detail::number(m, "delta0", 0.0);
    } else {
        cfg.model.lambdaE = detail::required_number(m, "model", "lambdaE");
        cfg.model.lambdaH = detail::required_number(m, "model", "lambdaH");
        cfg.model.delta0 = detail::required_number(m, "model", "delta0");
    }
    cfg.model.r = detail::required_number(m, "model", "r");
    cfg.model.nu0 = detail::required_number(m, "model", "nu0");
    cfg.model.c = detail::required_number(m, "model", "c");
    validate(cfg.model, Regime::basic);

    if (j.contains("grid")) {
        const Json& g = j.at("grid");
        if (!g.is_object()) throw ConfigError("invalid_config", "'grid' must be an object");
        cfg.grid.t_min = detail::number(g, "t_min", cfg.grid.t_min);
        cfg.grid.t_max = detail::number(g, "t_max", cfg.grid.t_max);
        const double pts = detail::number(g, "points", static_cast<double>(cfg.grid.points));
        if (!(pts >= 2.0) || pts != std::floor(pts) || pts > 1e7)
            throw ConfigError("invalid_config", "grid.points must be an integer >= 2");
        cfg.grid.points = static_cast<std::size_t>(pts);
        if (g.contains("spacing")) {
            if (!g.at("spacing").is_string())
                throw ConfigError("invalid_config", "grid.spacing must be 'linear' or 'log'");
            cfg.grid.spacing = g.at("spacing").get<std::string>();
        }
        if (cfg.grid.spacing != "linear" && cfg.grid.spacing != "log")
            throw ConfigError("invalid_config", "grid.spacing must be 'linear' or 'log'");
        if (!(cfg.grid.t_min > 0.0) || !(cfg.grid.t_max > cfg.grid.t_min) ||
            !std::isfinite(cfg.grid.t_max))
            throw ConfigError("invalid_config", "grid needs 0 < t_min < t_max < inf");
    }

    if (j.contains("solver")) {
        const Json& s = j.at("solver");
        cfg.solver.root_tol = detail::number(s, "root_tol", cfg.solver.root_tol);
        cfg.solver.integral_tol = detail::number(s, "integral_tol", cfg.solver.integral_tol);
        cfg.solver.tail_tol = detail::number(s, "tail_tol", cfg.solver.tail_tol);
        if (!(cfg.solver.root_tol > 0.0) || !(cfg.solver.integral_tol > 0.0) ||
            !(cfg.solver.tail_tol > 0.0 && cfg.solver.tail_tol < 1.0))
            throw ConfigError("invalid_config", "solver tolerances must be positive (tail_tol < 1)");
    }

    if (j.contains("output")) {
        const Json& o = j.at("output");
        if (o.contains("directory")) cfg.output_directory = o.at("directory").get<std::string>();
        if (o.contains("format")) cfg.format = o.at("format").get<std::string>();
    }
    if (cfg.format != "csv" && cfg.format != "json")
        throw ConfigError("invalid_config", "output.format must be 'csv' or 'json'");

    if (j.contains("sweep")) {
        const Json& s = j.at("sweep");
        Sweep sw;
        if (!s.contains("parameter") || !s.at("parameter").is_string())
            throw ConfigError("invalid_config", "sweep.parameter must name a model field");
        sw.parameter = s.at("parameter").get<std::string>();
        if (!detail::is_model_field(sw.parameter))
            throw ConfigError("invalid_config", "sweep.parameter must name a model field");
        if (s.contains("values")) {
            for (const auto& v : s.at("values")) {
                if (!v.is_number()) throw ConfigError("invalid_config", "sweep values must be numbers");
                sw.values.push_back(v.get<double>());
            }
        } else {
            const double lo = detail::required_number(s, "sweep", "min");
            const double hi = detail::required_number(s, "sweep", "max");
            const double n = detail::required_number(s, "sweep", "points");
            if (!(n >= 2.0) || !(hi > lo))
                throw ConfigError("invalid_config", "sweep needs min < max and points >= 2");
            sw.values = numerics::linear_grid(lo, hi, static_cast<std::size_t>(n));
        }
        if (sw.values.empty()) throw ConfigError("invalid_config", "sweep has no values");
        cfg.sweep = std::move(sw);
    }

    if (j.contains("thresholds")) {
        const double n = detail::number(j.at("thresholds"), "n_max", 10.0);
        if (!(n >= 1.0) || n != std::floor(n) || n > 1e6)
            throw ConfigError("invalid_config", "thresholds.n_max must be a positive integer");
        cfg.n_max = static_cast<std::size_t>(n);
    }
    if (j.contains("general_rates")) {
        const Json& g = j.at("general_rates");
        cfg.general_rates.emplace(detail::rates(g, "easy"), detail::rates(g, "hard"));
    }
    if (j.contains("contract")) cfg.gamma = detail::required_number(j.at("contract"), "contract", "gamma");
    if (j.contains("convergence")) {
        cfg.n_values.clear();
        for (const auto& v : j.at("convergence").at("n_values")) {
            if (!v.is_number() || !(v.get<double>() >= 1.0))
                throw ConfigError("invalid_config", "convergence.n_values must be numbers >= 1");
            cfg.n_values.push_back(v.get<double>());
        }
        if (cfg.n_values.empty()) throw ConfigError("invalid_config", "convergence.n_values is empty");
    }
    if (j.contains("two_arm")) {
        const Json& t = j.at("two_arm");
        TwoArm ta;
        ta.K1 = detail::number(t, "K1", ta.K1);
        ta.K2_max = detail::number(t, "K2_max", ta.K2_max);
        const double pts = detail::number(t, "points", static_cast<double>(ta.points));
        if (!(ta.K1 >= 0.0) || !(ta.K2_max > 0.0) || !(pts >= 2.0))
            throw ConfigError("invalid_config", "two_arm needs K1 >= 0, K2_max > 0, points >= 2");
        ta.points = static_cast<std::size_t>(pts);
        cfg.two_arm = ta;
    }
    if (cfg.experiment == "extensive-margin" && !cfg.gamma)
        throw ConfigError("invalid_config", "extensive-margin needs a 'contract' block with gamma");
    return cfg;
}

/// Reads and parses a scenario file.
inline ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("invalid_config", "cannot read scenario file '" + path + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("invalid_config", std::string("malformed scenario JSON: ") + e.what());
    }
    return parse_scenario(j);
}

}  // namespace brainstorm::cli

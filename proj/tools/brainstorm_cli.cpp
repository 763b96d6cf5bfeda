// SPDX-License-Identifier: MIT
/**
 * @file brainstorm_cli.cpp
 * @brief Scenario runner for the brainstorm library.
 *
 *   brainstorm_cli list [--json]
 *   brainstorm_cli run <scenario.json> [--output-dir DIR] [--format csv|json]
 *                                     [--seed N] [--strict]
 *
 * The output directory is taken from --output-dir, else the environment
 * variable BRAINSTORM_OUTPUT_DIR, else the scenario's output.directory.
 *
 * Exit status: 0 success, 2 invalid configuration or parameters,
 * 3 solver failure, 4 invariant violation, 5 output directory not writable.
 */

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "experiments.hpp"
#include "report.hpp"
#include "scenario.hpp"

namespace {

using namespace brainstorm;
using namespace brainstorm::cli;

enum ExitCode : int {
    kOk = 0,
    kValidation = 2,
    kSolver = 3,
    kInvariant = 4,
    kOutput = 5,
};

int list_experiments(bool as_json) {
    if (as_json) {
        Json arr = Json::array();
        for (const auto& e : kExperiments)
            arr.push_back({{"name", e.name},
                           {"operation", e.operation},
                           {"config_blocks", e.blocks},
                           {"reproduces", e.reproduces}});
        std::cout << arr.dump(2) << "\n";
        return kOk;
    }
    for (const auto& e : kExperiments) {
        std::cout << e.name << "\n"
                  << "    operation:  " << e.operation << "\n"
                  << "    config:     " << e.blocks << "\n"
                  << "    reproduces: " << e.reproduces << "\n";
    }
    return kOk;
}

/// Removes data files recorded by a previous manifest in @p dir.
void remove_previous_outputs(const std::filesystem::path& dir) {
    const auto manifest = dir / kManifestName;
    std::ifstream in(manifest);
    if (!in) return;
    try {
        const Json old = Json::parse(in);
        if (old.contains("files"))
            for (const auto& f : old.at("files")) {
                const std::filesystem::path name = f.get<std::string>();
                if (name.has_parent_path()) continue;  // only plain file names we wrote
                std::error_code ec;
                std::filesystem::remove(dir / name, ec);
            }
    } catch (const std::exception&) {
        // An unreadable manifest is simply overwritten.
    }
}

struct RunOptions {
    std::string config_path;
    std::string output_dir;
    std::string format;
    long long seed = 0;
    bool strict = false;
};

int run_scenario(const RunOptions& opt) {
    ScenarioConfig cfg;
    try {
        cfg = load_scenario(opt.config_path);
        if (!opt.format.empty()) cfg.format = opt.format;
    } catch (const ConfigError& e) {
        std::cerr << "error[" << e.id() << "]: " << e.what() << "\n";
        return kValidation;
    } catch (const ValidationError& e) {
        std::cerr << "error[invalid_params]: " << e.what() << "\n";
        return kValidation;
    }

    std::filesystem::path dir = cfg.output_directory;
    if (const char* env = std::getenv("BRAINSTORM_OUTPUT_DIR"); env && *env) dir = env;
    if (!opt.output_dir.empty()) dir = opt.output_dir;
    try {
        ensure_directory(dir);
    } catch (const OutputError& e) {
        std::cerr << "error[output_dir]: " << e.what() << "\n";
        return kOutput;
    }
    remove_previous_outputs(dir);

    RunManifest manifest;
    manifest.config = cfg.source;
    manifest.experiment = cfg.experiment;
    manifest.strict = opt.strict;
    int code = kOk;
    const auto start = std::chrono::steady_clock::now();
    try {
        const ExperimentResult res = run_experiment(cfg);
        manifest.violations = res.violations;
        if (!res.violations.empty()) {
            manifest.status = "invariant_violation";
            code = kInvariant;
            for (const auto& v : res.violations)
                std::cerr << "invariant[" << v.check << "]: " << v.detail << "\n";
        }
        if (!(opt.strict && code == kInvariant)) manifest.files = write_tables(dir, res, cfg.format);
    } catch (const ValidationError& e) {
        manifest.status = "validation_error";
        manifest.error = std::string("invalid_params: ") + e.what();
        code = kValidation;
    } catch (const OutputError& e) {
        manifest.status = "output_error";
        manifest.error = e.what();
        code = kOutput;
    } catch (const std::exception& e) {
        manifest.status = "solver_error";
        manifest.error = e.what();
        code = kSolver;
    }
    manifest.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!manifest.error.empty()) std::cerr << "error[" << manifest.status << "]: " << manifest.error << "\n";
    try {
        write_manifest(dir, manifest);
    } catch (const OutputError& e) {
        std::cerr << "error[output_dir]: " << e.what() << "\n";
        return kOutput;
    }
    if (code == kOk)
        std::cout << cfg.experiment << ": wrote " << manifest.files.size() << " file(s) to "
                  << dir.string() << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal experimentation and contract solver"};
    app.require_subcommand(1);

    bool list_json = false;
    auto* list = app.add_subcommand("list", "List the available experiments");
    list->add_flag("--json", list_json, "Emit the catalog as JSON");

    RunOptions opt;
    auto* run = app.add_subcommand("run", "Run the experiment described by a scenario file");
    run->add_option("config", opt.config_path, "Scenario JSON file")->required();
    run->add_option("--output-dir", opt.output_dir, "Output directory (overrides config and env)");
    run->add_option("--format", opt.format, "Data file format")
        ->check(CLI::IsMember({"csv", "json"}));
    run->add_option("--seed", opt.seed, "Accepted for interface stability; all runs are deterministic");
    run->add_flag("--strict", opt.strict, "Do not write data files when an invariant fails");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kValidation;
    }
    if (*list) return list_experiments(list_json);
    return run_scenario(opt);
}

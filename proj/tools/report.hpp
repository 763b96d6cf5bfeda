// SPDX-License-Identifier: MIT
/**
 * @file report.hpp
 * @brief Deterministic data-file writers and the run manifest.
 *
 * CSV files have a header row, '.' decimals, 17 significant digits and LF
 * line endings so that identical runs produce byte-identical files.
 */

#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "experiments.hpp"

namespace brainstorm::cli {

inline constexpr const char* kLibraryVersion = "1.0.0";

/// Thrown when the output directory cannot be created or written.
class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Locale-independent 17-significant-digit rendering ("inf", "-inf", "nan").
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";  // folds -0 as well
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string to_csv(const Table& t) {
    std::string out;
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
        if (i) out += ',';
        out += t.columns[i];
    }
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += format_number(row[i]);
        }
        out += '\n';
    }
    return out;
}

/// JSON rendering: {"columns": [...], "rows": [[...], ...]}; non-finite values become strings.
inline std::string to_json(const Table& t) {
    Json j;
    j["columns"] = t.columns;
    Json rows = Json::array();
    for (const auto& row : t.rows) {
        Json r = Json::array();
        for (double v : row) {
            if (std::isfinite(v))
                r.push_back(v);
            else
                r.push_back(format_number(v));
        }
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    return j.dump(1) + "\n";
}

inline void ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw OutputError("cannot create output directory '" + dir.string() + "'");
    const auto probe = dir / ".write-probe";
    {
        std::ofstream f(probe, std::ios::binary);
        if (!f) throw OutputError("output directory '" + dir.string() + "' is not writable");
    }
    std::filesystem::remove(probe, ec);
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw OutputError("cannot write '" + path.string() + "'");
    f << text;
    if (!f) throw OutputError("failed writing '" + path.string() + "'");
}

/// Writes every table; returns the written file names (relative to @p dir).
inline std::vector<std::string> write_tables(const std::filesystem::path& dir,
                                             const ExperimentResult& res,
                                             const std::string& format) {
    std::vector<std::string> files;
    for (const auto& [stem, table] : res.tables) {
        const std::string name = stem + (format == "json" ? ".json" : ".csv");
        write_file(dir / name, format == "json" ? to_json(table) : to_csv(table));
        files.push_back(name);
    }
    return files;
}

struct RunManifest {
    Json config;
    std::string experiment;
    std::string status = "ok";  ///< ok | invariant_violation | solver_error | validation_error | output_error
    std::string error;
    double duration_seconds = 0.0;
    std::vector<std::string> files;
    std::vector<Violation> violations;
    bool strict = false;

    [[nodiscard]] Json to_json() const {
        Json j;
        j["library_version"] = kLibraryVersion;
        j["experiment"] = experiment;
        j["status"] = status;
        if (!error.empty()) j["error"] = error;
        j["strict"] = strict;
        j["duration_seconds"] = duration_seconds;
        j["files"] = files;
        Json v = Json::array();
        for (const auto& x : violations) v.push_back({{"check", x.check}, {"detail", x.detail}});
        j["invariant_violations"] = std::move(v);
        j["config"] = config;
        return j;
    }
};

inline constexpr const char* kManifestName = "manifest.json";

inline void write_manifest(const std::filesystem::path& dir, const RunManifest& m) {
    write_file(dir / kManifestName, m.to_json().dump(2) + "\n");
}

}  // namespace brainstorm::cli

#pragma once

// File formats. Every file carries a schema name and version; readers
// reject anything else with SchemaError.
//
// Boundary CSV:
//   # lastzero-boundaries v1 mu=<mu> T=<T> source=<src> manifest=<hash>
//   t,b_minus,b_plus,h_minus,h_plus,residual_minus,residual_plus
//   ...
// Boundary JSON: {"schema": "lastzero.boundaries", "version": 1, ...}

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "lastzero/bellman.hpp"
#include "lastzero/boundary.hpp"
#include "lastzero/montecarlo.hpp"
#include "lastzero/value.hpp"

namespace lastzero {

inline constexpr int kBoundarySchemaVersion = 1;
inline constexpr int kSurfaceSchemaVersion = 1;
inline constexpr const char* kToolVersion = "1.0.0";

/// %.17g; "nan" for NaN.
std::string format_number(double v);

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

nlohmann::json to_json(const ProblemSpec& spec);
nlohmann::json to_json(const SolverConfig& cfg);
nlohmann::json to_json(const LatticeSpec& lat);
nlohmann::json to_json(const SimConfig& cfg);
nlohmann::json to_json(const PolicyReport& r);
nlohmann::json to_json(const OracleDistance& d);
nlohmann::json to_json(const SmoothFitReport& r);

void write_boundaries_csv(const BoundaryPair& bp, const std::filesystem::path& path, const std::string& manifest = "");
void write_boundaries_json(const BoundaryPair& bp, const std::filesystem::path& path, const std::string& manifest = "");
BoundaryPair read_boundaries_csv(const std::filesystem::path& path);
BoundaryPair read_boundaries_json(const std::filesystem::path& path);
/// Dispatch on extension (.json, otherwise CSV).
BoundaryPair read_boundaries(const std::filesystem::path& path);

/// Long format: one row per (t, x) cell.
void write_surface_csv(const ValueSurface& vs, const std::filesystem::path& path, const std::string& manifest = "");
void write_surface_json(const ValueSurface& vs, const std::filesystem::path& path, const std::string& manifest = "");
ValueSurface read_surface_csv(const std::filesystem::path& path);

/// One JSON object per line.
std::string policy_report_line(const PolicyReport& r, const std::string& manifest = "");

/// path_id,g,tau,abs_error for one policy of an evaluation.
void write_per_path_csv(const PolicyEvaluation& ev, std::size_t policy, const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Provenance of one command run. The hash covers command, spec, config,
/// inputs and tool version, so reruns with the same inputs share it
/// wherever their outputs go.
struct RunManifest {
    std::string command;
    nlohmann::json spec;
    nlohmann::json config;
    std::vector<std::string> inputs;  ///< input file paths with their content hashes
    std::vector<std::string> outputs;
    std::string tool_version = kToolVersion;
    std::string started_at;
    double wall_time_s = 0.0;

    std::string hash() const;
    nlohmann::json to_json() const;
};

}  // namespace lastzero

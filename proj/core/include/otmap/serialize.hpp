#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>

#include "otmap/fda.hpp"
#include "otmap/transport_model.hpp"

namespace otmap {

inline constexpr int kModelFormatVersion = 1;

// Smoothness maps: {"family": ..., "params": {...}} — the schema shared by
// CLI configs.
nlohmann::json map_to_json(const SmoothnessMap& map);
SmoothnessMap map_from_json(const nlohmann::json& j);

nlohmann::json potential_to_json(const FourierPotential& phi);
FourierPotential potential_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const TransportModel& model);
TransportModel model_from_json(const nlohmann::json& j);
void save_model(const TransportModel& model, const std::string& path);
TransportModel load_model(const std::string& path);

nlohmann::json study_config_to_json(const StudyConfig& cfg);
StudyConfig study_config_from_json(const nlohmann::json& j);
nlohmann::json report_to_json(const ExperimentReport& report);
// Wall-clock diagnostics, serialized separately so report.json stays
// bit-reproducible under replay.
nlohmann::json report_timing_json(const ExperimentReport& report);
std::string report_errors_csv(const ExperimentReport& report);
nlohmann::json fixture_to_json(const LowerBoundFixture& fx);

// Headerless CSV of doubles; writing uses round-trip precision.
Mat read_csv_matrix(const std::string& path);
void write_csv_matrix(const std::string& path, const Mat& m);

// Function data: first row is the grid, remaining rows are function values.
FunctionSample read_function_csv(const std::string& path);
void write_function_csv(const std::string& path, const FunctionSample& fs);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// FNV-1a 64-bit content hash, hex-encoded; used for input checksums in run
// manifests.
std::string file_checksum(const std::string& path);

}  // namespace otmap

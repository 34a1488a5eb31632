#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>

#include "covsv/conftest/conformal_test.hpp"
#include "covsv/law/population_spectrum.hpp"
#include "covsv/verify/config.hpp"
#include "covsv/verify/report.hpp"

namespace covsv::io {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// Parses a JSON document; syntax errors become ConfigError with line and column.
Json parse_json(const std::string& text, const std::string& origin = "<input>");
Json read_json_file(const std::filesystem::path& path);

// Schema readers. Missing or mistyped fields raise ConfigError naming the
// dotted field path (e.g. "spec.N").
law::PopulationSpectrum parse_spectrum(const Json& j, const std::string& where = "spec");
verify::ExperimentConfig parse_experiment_config(const Json& j);
conftest::ConformalTestConfig parse_conftest_config(const Json& j);

// Checks "schema_version" when present; ConfigError on a different version.
void check_schema_version(const Json& j);

Json to_json(const law::PopulationSpectrum& spec);
Json to_json(const verify::ExperimentConfig& config);
Json to_json(const verify::ExperimentReport& report);  // no per-replicate rows
Json to_json(const conftest::ConformalTestConfig& config);
Json to_json(const conftest::TestDecision& decision);

}  // namespace covsv::io

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "chebex/exposure.hpp"
#include "chebex/pricer.hpp"
#include "json.hpp"

namespace chebex::cli {

enum class OutputFormat { csv, json, both };

struct OutputConfig {
    std::filesystem::path dir = ".";
    OutputFormat format = OutputFormat::both;
    std::string name = "run";
};

struct RunConfig {
    std::string preset;
    ProductSpec product;
    ModelSpec model;
    NumericsConfig numerics;
    SimulationConfig simulation;
    ExposureConfig exposure;
    OutputConfig output;

    /// Cross-field checks; throws ConfigError naming the offending field.
    void validate() const;
};

/// Command-line overrides, applied last.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<std::filesystem::path> out;
    std::optional<OutputFormat> format;
};

std::vector<std::string> preset_names();
/// Throws ConfigError for unknown names.
RunConfig preset(const std::string& name);

/// Overlays the keys present in a JSON document onto cfg. Unknown keys and
/// badly typed values raise ConfigError naming the field.
void apply_json(RunConfig& cfg, const nlohmann::json& doc);

/// defaults, then the preset (from the flag or the file's "preset" key),
/// then the file, then the flags.
RunConfig resolve(const std::optional<std::filesystem::path>& file, const std::optional<std::string>& preset_name,
                  const Overrides& flags);

OutputFormat parse_format(const std::string& s);

/// JSON echo of a configuration, used in reports.
nlohmann::json to_json(const RunConfig& cfg);

}  // namespace chebex::cli

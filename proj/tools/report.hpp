#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "chebex/exposure.hpp"
#include "config.hpp"

namespace chebex::cli {

/// 10 significant digits, independent of the global locale.
std::string format_number(double v);

std::string profile_csv(const ExposureProfile& p);

struct NamedProfile {
    std::string name;
    ExposureProfile profile;
};

/// One row per date; columns t, then <name>_EE, <name>_PFE per product.
std::string combined_csv(const std::vector<NamedProfile>& profiles);

/// name, V0, EE_T, PFE_T.
std::string summary_csv(const std::vector<NamedProfile>& profiles);
std::string summary_table(const std::vector<NamedProfile>& profiles);

nlohmann::json profile_json(const ExposureProfile& p);
nlohmann::json timings_json(const PhaseTimings& t);

/// Writes text to dir/file, creating dir; throws std::runtime_error on failure.
void write_text(const std::filesystem::path& dir, const std::string& file, const std::string& text);

}  // namespace chebex::cli

#include "report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace chebex::cli {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 10);
    return std::string(buf, res.ptr);
}

std::string profile_csv(const ExposureProfile& p) {
    std::string out = "t,EE,PFE\n";
    for (std::size_t u = 0; u < p.grid.size(); ++u)
        out += format_number(p.grid[u]) + "," + format_number(p.ee[u]) + "," + format_number(p.pfe[u]) + "\n";
    return out;
}

std::string combined_csv(const std::vector<NamedProfile>& profiles) {
    if (profiles.empty()) return {};
    std::string out = "t";
    for (const auto& np : profiles) out += "," + np.name + "_EE," + np.name + "_PFE";
    out += "\n";
    const auto& grid = profiles.front().profile.grid;
    for (std::size_t u = 0; u < grid.size(); ++u) {
        out += format_number(grid[u]);
        for (const auto& np : profiles)
            out += "," + format_number(np.profile.ee[u]) + "," + format_number(np.profile.pfe[u]);
        out += "\n";
    }
    return out;
}

std::string summary_csv(const std::vector<NamedProfile>& profiles) {
    std::string out = "name,V0,EE_T,PFE_T\n";
    for (const auto& np : profiles)
        out += np.name + "," + format_number(np.profile.price_t0) + "," + format_number(np.profile.ee.back()) + "," +
               format_number(np.profile.pfe.back()) + "\n";
    return out;
}

std::string summary_table(const std::vector<NamedProfile>& profiles) {
    std::size_t width = 4;
    for (const auto& np : profiles) width = std::max(width, np.name.size());
    std::ostringstream os;
    os.imbue(std::locale::classic());
    auto cell = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%10.4f", v);
        return std::string(buf);
    };
    os << std::string(width, ' ') << "  " << "        V0" << "  " << "   EE at T" << "  " << "  PFE at T\n";
    for (const auto& np : profiles)
        os << np.name << std::string(width - np.name.size(), ' ') << "  " << cell(np.profile.price_t0) << "  "
           << cell(np.profile.ee.back()) << "  " << cell(np.profile.pfe.back()) << "\n";
    return os.str();
}

nlohmann::json profile_json(const ExposureProfile& p) {
    return {{"product", std::string(to_string(p.product.kind))},
            {"price_t0", p.price_t0},
            {"alpha", p.alpha},
            {"paths", p.paths},
            {"seed", p.seed},
            {"t", p.grid},
            {"EE", p.ee},
            {"PFE", p.pfe}};
}

nlohmann::json timings_json(const PhaseTimings& t) {
    return {{"Simulation", t.simulation},
            {"Pre-computation", t.precompute},
            {"Time-stepping", t.stepping},
            {"Total", t.total}};
}

void write_text(const std::filesystem::path& dir, const std::string& file, const std::string& text) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    const auto path = dir / file;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << text;
    if (!os) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace chebex::cli

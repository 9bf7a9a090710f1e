#include <cmath>
#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "chebex/error.hpp"
#include "config.hpp"
#include "report.hpp"

using namespace chebex;
using namespace chebex::cli;

namespace {

enum Exit { kOk = 0, kIoError = 1, kConfigError = 2, kNumericalError = 3 };

struct CommonFlags {
    std::vector<std::string> configs;
    std::vector<std::string> presets;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<std::string> out;
    std::optional<std::string> format;

    Overrides overrides() const {
        Overrides o;
        o.seed = seed;
        o.paths = paths;
        if (out) o.out = std::filesystem::path(*out);
        if (format) o.format = parse_format(*format);
        return o;
    }
};

void add_common(CLI::App* cmd, CommonFlags& f, bool many) {
    if (many) {
        cmd->add_option("--config", f.configs, "JSON run configuration (repeatable)");
        cmd->add_option("--preset", f.presets, "Built-in preset name (repeatable)");
    } else {
        cmd->add_option("--config", f.configs, "JSON run configuration")->expected(0, 1);
        cmd->add_option("--preset", f.presets, "Built-in preset name")->expected(0, 1);
    }
    cmd->add_option("--seed", f.seed, "Random seed for paths and Monte Carlo moments");
    cmd->add_option("--paths", f.paths, "Number of simulated paths");
    cmd->add_option("--out", f.out, "Output directory");
    cmd->add_option("--format", f.format, "csv, json or both")->check(CLI::IsMember({"csv", "json", "both"}));
}

RunConfig single_config(const CommonFlags& f) {
    std::optional<std::filesystem::path> file;
    std::optional<std::string> name;
    if (!f.configs.empty()) file = f.configs.front();
    if (!f.presets.empty()) name = f.presets.front();
    if (!file && !name) throw ConfigError("config: pass --config <file> or --preset <name>");
    return resolve(file, name, f.overrides());
}

bool wants_csv(const RunConfig& c) { return c.output.format != OutputFormat::json; }
bool wants_json(const RunConfig& c) { return c.output.format != OutputFormat::csv; }

int cmd_price(const CommonFlags& f) {
    const auto cfg = single_config(f);
    const auto sol = solve(cfg.product, cfg.model, cfg.numerics);
    const double spot = cfg.simulation.spot;
    const double x0 = std::log(spot);
    const double value = price(sol, 0, x0);
    const bool interior = x0 > sol.domain.lo() && x0 < sol.domain.hi();
    const double d = interior ? delta_spot(sol, 0, spot) : std::nan("");
    const double g = interior ? gamma_spot(sol, 0, spot) : std::nan("");
    std::printf("price %s\ndelta %s\ngamma %s\n", format_number(value).c_str(), format_number(d).c_str(),
                format_number(g).c_str());
    if (wants_json(cfg)) {
        nlohmann::json j;
        j["config"] = to_json(cfg);
        j["price"] = value;
        j["delta"] = interior ? nlohmann::json(d) : nlohmann::json(nullptr);
        j["gamma"] = interior ? nlohmann::json(g) : nlohmann::json(nullptr);
        write_text(cfg.output.dir, cfg.output.name + "_price.json", j.dump(2) + "\n");
    }
    return kOk;
}

int cmd_exposure(const CommonFlags& f) {
    const auto cfg = single_config(f);
    const auto run = run_exposure(std::span<const ProductSpec>(&cfg.product, 1), cfg.model, cfg.numerics,
                                  cfg.simulation, cfg.exposure);
    const auto& prof = run.profiles.front();
    if (wants_csv(cfg)) write_text(cfg.output.dir, cfg.output.name + ".csv", profile_csv(prof));
    if (wants_json(cfg)) {
        nlohmann::json j;
        j["config"] = to_json(cfg);
        j["profile"] = profile_json(prof);
        j["timings"] = timings_json(run.timings);
        write_text(cfg.output.dir, cfg.output.name + ".json", j.dump(2) + "\n");
    }
    std::printf("price %s  EE(T) %s  PFE(T) %s  rows %zu\n", format_number(prof.price_t0).c_str(),
                format_number(prof.ee.back()).c_str(), format_number(prof.pfe.back()).c_str(), prof.grid.size());
    std::printf("Simulation %.3fs  Pre-computation %.3fs  Time-stepping %.3fs  Total %.3fs\n", run.timings.simulation,
                run.timings.precompute, run.timings.stepping, run.timings.total);
    return kOk;
}

int cmd_compare(const CommonFlags& f) {
    std::vector<RunConfig> cfgs;
    const auto flags = f.overrides();
    for (const auto& c : f.configs) cfgs.push_back(resolve(std::filesystem::path(c), std::nullopt, flags));
    for (const auto& p : f.presets) cfgs.push_back(resolve(std::nullopt, p, flags));
    if (cfgs.empty()) throw ConfigError("compare: pass at least one --config or --preset");

    const auto& first = cfgs.front();
    auto exposure = first.exposure;
    std::vector<ProductSpec> products;
    std::vector<NamedProfile> named;
    for (const auto& c : cfgs) {
        if (!(c.model == first.model) || c.simulation.spot != first.simulation.spot)
            throw ConfigError("compare: model blocks differ between configurations");
        if (c.simulation.seed != first.simulation.seed || c.simulation.paths != first.simulation.paths ||
            c.simulation.measure != first.simulation.measure)
            throw ConfigError("compare: simulation seed/paths differ between configurations");
        if (c.numerics.degree != first.numerics.degree || c.numerics.domain != first.numerics.domain ||
            c.numerics.backend != first.numerics.backend || c.numerics.m_pre != first.numerics.m_pre ||
            c.numerics.seed != first.numerics.seed)
            throw ConfigError("compare: numerics blocks differ between configurations");
        if (c.exposure.alpha != first.exposure.alpha) throw ConfigError("compare: exposure.alpha differs");
        if (c.exposure.grid == ExposureGrid::daily) exposure.grid = ExposureGrid::daily;
        products.push_back(c.product);
    }
    const auto run = run_exposure(products, first.model, first.numerics, first.simulation, exposure);
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
        std::string name = cfgs[i].output.name;
        for (const auto& np : named)
            if (np.name == name) name += "_" + std::to_string(i);
        named.push_back({name, run.profiles[i]});
    }
    const std::string stem = cfgs.size() == 1 ? first.output.name : "compare";
    if (wants_csv(first)) {
        write_text(first.output.dir, stem + ".csv", combined_csv(named));
        write_text(first.output.dir, stem + "_summary.csv", summary_csv(named));
    }
    if (wants_json(first)) {
        nlohmann::json j;
        j["model"] = to_json(first)["model"];
        j["timings"] = timings_json(run.timings);
        for (const auto& np : named) j["profiles"][np.name] = profile_json(np.profile);
        write_text(first.output.dir, stem + ".json", j.dump(2) + "\n");
    }
    std::cout << summary_table(named);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamic Chebyshev pricing and credit exposure"};
    app.require_subcommand(1);
    CommonFlags price_flags, exposure_flags, compare_flags;
    auto* price_cmd = app.add_subcommand("price", "Price, delta and gamma at t0");
    add_common(price_cmd, price_flags, false);
    auto* exposure_cmd = app.add_subcommand("exposure", "EE/PFE profile");
    add_common(exposure_cmd, exposure_flags, false);
    auto* compare_cmd = app.add_subcommand("compare", "Profiles of several products on shared paths");
    add_common(compare_cmd, compare_flags, true);
    bool list = false;
    app.add_flag("--list-presets", list, "Print preset names and exit");
    app.require_subcommand(0, 1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (list) {
            for (const auto& n : preset_names()) std::cout << n << "\n";
            return kOk;
        }
        if (*price_cmd) return cmd_price(price_flags);
        if (*exposure_cmd) return cmd_exposure(exposure_flags);
        if (*compare_cmd) return cmd_compare(compare_flags);
        std::cerr << app.help();
        return kConfigError;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumericalError;
    } catch (const DomainError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumericalError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIoError;
    }
}

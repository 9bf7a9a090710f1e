#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "chebex/error.hpp"

namespace chebex::cli {

namespace {

using nlohmann::json;

constexpr std::uint64_t kNumericsSeedMix = 0x9E3779B97F4A7C15ULL;

void check_keys(const json& block, const std::string& path, const std::set<std::string>& allowed) {
    if (!block.is_object()) throw ConfigError(path + ": expected an object");
    for (const auto& [key, value] : block.items())
        if (!allowed.count(key)) throw ConfigError(path + "." + key + ": unknown field");
}

template <class T>
T read(const json& block, const std::string& key, const std::string& path) {
    const auto& v = block.at(key);
    try {
        if constexpr (std::is_same_v<T, double>) {
            if (!v.is_number()) throw ConfigError("");
        } else if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw ConfigError("");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw ConfigError("");
        } else {
            if (!v.is_number_unsigned()) throw ConfigError("");
        }
        return v.get<T>();
    } catch (const std::exception&) {
        const char* what = std::is_same_v<T, double>        ? "a number"
                           : std::is_same_v<T, bool>        ? "a boolean"
                           : std::is_same_v<T, std::string> ? "a string"
                                                            : "a non-negative integer";
        throw ConfigError(path + "." + key + ": expected " + what);
    }
}

template <class T>
void maybe(const json& block, const std::string& key, const std::string& path, T& target) {
    if (block.contains(key)) target = read<T>(block, key, path);
}

void apply_product(RunConfig& cfg, const json& b, bool require_core) {
    check_keys(b, "product", {"kind", "K", "B", "T", "n_dates"});
    if (require_core) {
        for (const char* key : {"kind", "K"})
            if (!b.contains(key)) throw ConfigError(std::string("product.") + key + ": required field missing");
    }
    if (b.contains("kind")) cfg.product.kind = parse_product_kind(read<std::string>(b, "kind", "product"));
    maybe(b, "K", "product", cfg.product.strike);
    maybe(b, "B", "product", cfg.product.barrier);
    maybe(b, "T", "product", cfg.product.maturity);
    maybe(b, "n_dates", "product", cfg.product.n_dates);
    if (require_core && cfg.product.is_barrier() && !b.contains("B"))
        throw ConfigError("product.B: required for barrier_up_out_call");
}

void apply_model(RunConfig& cfg, const json& b) {
    check_keys(b, "model", {"type", "sigma", "mu", "r", "S0", "lambda", "jump_mean", "jump_std", "cev_exponent"});
    if (b.contains("type")) cfg.model.type = parse_model_type(read<std::string>(b, "type", "model"));
    maybe(b, "sigma", "model", cfg.model.sigma);
    maybe(b, "mu", "model", cfg.model.mu);
    maybe(b, "r", "model", cfg.model.r);
    maybe(b, "S0", "model", cfg.simulation.spot);
    maybe(b, "lambda", "model", cfg.model.jump_intensity);
    maybe(b, "jump_mean", "model", cfg.model.jump_mean);
    maybe(b, "jump_std", "model", cfg.model.jump_std);
    maybe(b, "cev_exponent", "model", cfg.model.cev_exponent);
}

void apply_numerics(RunConfig& cfg, const json& b) {
    check_keys(b, "numerics", {"N", "domain", "backend", "m_pre", "seed", "smoothing", "threads", "cache_dir",
                               "cev_substeps", "fourier"});
    auto& n = cfg.numerics;
    if (b.contains("N")) n.degree = read<std::size_t>(b, "N", "numerics");
    if (b.contains("domain")) {
        const auto& d = b.at("domain");
        if (d.is_null()) {
            n.domain.reset();
        } else {
            if (!d.is_array() || d.size() != 2 || !d[0].is_number() || !d[1].is_number())
                throw ConfigError("numerics.domain: expected [lo, hi] in log-price");
            const double lo = d[0].get<double>();
            const double hi = d[1].get<double>();
            if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
                throw ConfigError("numerics.domain: need finite lo < hi");
            n.domain = ChebDomain(lo, hi);
        }
    }
    if (b.contains("backend")) {
        const auto s = read<std::string>(b, "backend", "numerics");
        try {
            n.backend = parse_moment_backend(s);
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("numerics.backend: ") + e.what());
        }
    }
    maybe(b, "m_pre", "numerics", n.m_pre);
    maybe(b, "seed", "numerics", n.seed);
    maybe(b, "smoothing", "numerics", n.smoothing);
    if (b.contains("threads")) n.threads = static_cast<unsigned>(read<std::size_t>(b, "threads", "numerics"));
    if (b.contains("cache_dir")) n.cache_dir = read<std::string>(b, "cache_dir", "numerics");
    maybe(b, "cev_substeps", "numerics", n.cev_substeps);
    if (b.contains("fourier")) {
        const auto& f = b.at("fourier");
        check_keys(f, "numerics.fourier", {"truncation_width", "tail_tolerance", "max_terms", "panel_order"});
        maybe(f, "truncation_width", "numerics.fourier", n.fourier.truncation_width);
        maybe(f, "tail_tolerance", "numerics.fourier", n.fourier.tail_tolerance);
        maybe(f, "max_terms", "numerics.fourier", n.fourier.max_terms);
        maybe(f, "panel_order", "numerics.fourier", n.fourier.panel_order);
    }
}

void apply_simulation(RunConfig& cfg, const json& b) {
    check_keys(b, "simulation", {"paths", "seed", "measure"});
    maybe(b, "paths", "simulation", cfg.simulation.paths);
    maybe(b, "seed", "simulation", cfg.simulation.seed);
    if (b.contains("measure")) {
        const auto m = read<std::string>(b, "measure", "simulation");
        if (m == "P")
            cfg.simulation.measure = Measure::P;
        else if (m == "Q")
            cfg.simulation.measure = Measure::Q;
        else
            throw ConfigError("simulation.measure: expected 'P' or 'Q'");
    }
}

void apply_exposure(RunConfig& cfg, const json& b) {
    check_keys(b, "exposure", {"alpha", "grid", "days_per_year"});
    maybe(b, "alpha", "exposure", cfg.exposure.alpha);
    if (b.contains("grid")) cfg.exposure.grid = parse_exposure_grid(read<std::string>(b, "grid", "exposure"));
    maybe(b, "days_per_year", "exposure", cfg.exposure.days_per_year);
}

void apply_output(RunConfig& cfg, const json& b) {
    check_keys(b, "output", {"dir", "format", "name"});
    if (b.contains("dir")) cfg.output.dir = read<std::string>(b, "dir", "output");
    if (b.contains("format")) cfg.output.format = parse_format(read<std::string>(b, "format", "output"));
    maybe(b, "name", "output", cfg.output.name);
}

RunConfig base(const std::string& name, ProductSpec product, ModelSpec model) {
    RunConfig cfg;
    cfg.preset = name;
    cfg.product = product;
    cfg.model = model;
    cfg.output.name = name;
    return cfg;
}

struct PresetEntry {
    std::string name;
    RunConfig (*make)();
};

const std::vector<PresetEntry>& registry() {
    static const std::vector<PresetEntry> entries = [] {
        std::vector<PresetEntry> e;
        e.push_back({"bs_european_paper", [] { return base("bs_european_paper", european_put(), reference_black_scholes()); }});
        e.push_back({"bs_bermudan_paper", [] { return base("bs_bermudan_paper", bermudan_put(), reference_black_scholes()); }});
        e.push_back({"bs_barrier_paper",
                     [] { return base("bs_barrier_paper", barrier_up_out_call(100.0, 150.0), reference_black_scholes()); }});
        e.push_back({"bs_european_call_paper",
                     [] { return base("bs_european_call_paper", european_call(), reference_black_scholes()); }});
        e.push_back({"merton_european_paper", [] { return base("merton_european_paper", european_put(), reference_merton()); }});
        e.push_back({"merton_bermudan_paper", [] { return base("merton_bermudan_paper", bermudan_put(), reference_merton()); }});
        e.push_back({"merton_barrier_paper",
                     [] { return base("merton_barrier_paper", barrier_up_out_call(100.0, 150.0), reference_merton()); }});
        e.push_back({"merton_european_call_paper",
                     [] { return base("merton_european_call_paper", european_call(), reference_merton()); }});
        e.push_back({"cev_european_paper", [] { return base("cev_european_paper", european_put(), reference_cev()); }});
        e.push_back({"cev_bermudan_paper", [] { return base("cev_bermudan_paper", bermudan_put(), reference_cev()); }});
        e.push_back({"cev_barrier_paper",
                     [] { return base("cev_barrier_paper", barrier_up_out_call(100.0, 125.0), reference_cev()); }});
        e.push_back({"cev_european_call_paper",
                     [] { return base("cev_european_call_paper", european_call(), reference_cev()); }});
        e.push_back({"bs_european_daily", [] {
                         auto c = base("bs_european_daily", european_put(), reference_black_scholes());
                         c.exposure.grid = ExposureGrid::daily;
                         return c;
                     }});
        e.push_back({"bs_bermudan_nT4", [] {
                         auto c = base("bs_bermudan_nT4", bermudan_put(100.0, 1.0, 4), reference_black_scholes());
                         c.exposure.grid = ExposureGrid::daily;
                         return c;
                     }});
        e.push_back({"bs_bermudan_nT12", [] {
                         auto c = base("bs_bermudan_nT12", bermudan_put(100.0, 1.0, 12), reference_black_scholes());
                         c.exposure.grid = ExposureGrid::daily;
                         return c;
                     }});
        e.push_back({"bs_bermudan_nT36", [] {
                         auto c = base("bs_bermudan_nT36", bermudan_put(100.0, 1.0, 36), reference_black_scholes());
                         c.exposure.grid = ExposureGrid::daily;
                         return c;
                     }});
        e.push_back({"bs_bermudan_nT84", [] {
                         auto c = base("bs_bermudan_nT84", bermudan_put(100.0, 1.0, 84), reference_black_scholes());
                         c.exposure.grid = ExposureGrid::daily;
                         return c;
                     }});
        e.push_back({"bs_bermudan_nT252", [] {
                         auto c = base("bs_bermudan_nT252", bermudan_put(100.0, 1.0, 252), reference_black_scholes());
                         c.exposure.grid = ExposureGrid::daily;
                         return c;
                     }});
        return e;
    }();
    return entries;
}

std::string format_name(OutputFormat f) {
    switch (f) {
        case OutputFormat::csv: return "csv";
        case OutputFormat::json: return "json";
        case OutputFormat::both: return "both";
    }
    return "both";
}

}  // namespace

void RunConfig::validate() const {
    product.validate();
    model.validate();
    if (!(simulation.spot > 0.0)) throw ConfigError("model.S0: spot must be > 0");
    if (simulation.paths == 0) throw ConfigError("simulation.paths: must be >= 1");
    if (!(exposure.alpha > 0.0 && exposure.alpha <= 1.0)) throw ConfigError("exposure.alpha: must lie in (0, 1]");
    if (numerics.degree && *numerics.degree < 1) throw ConfigError("numerics.N: must be >= 1");
    if (numerics.m_pre < 1000) throw ConfigError("numerics.m_pre: must be >= 1000");
    if (numerics.cev_substeps == 0) throw ConfigError("numerics.cev_substeps: must be >= 1");
    const auto backend = numerics.backend.value_or(default_backend(model));
    check_backend(model, backend);
    if (exposure.grid == ExposureGrid::daily && backend == MomentBackend::monte_carlo)
        throw ConfigError("exposure.grid: daily grids need the analytic or fourier backend");
}

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& e : registry()) out.push_back(e.name);
    return out;
}

RunConfig preset(const std::string& name) {
    for (const auto& e : registry())
        if (e.name == name) return e.make();
    throw ConfigError("preset: unknown preset '" + name + "'");
}

OutputFormat parse_format(const std::string& s) {
    if (s == "csv") return OutputFormat::csv;
    if (s == "json") return OutputFormat::json;
    if (s == "both") return OutputFormat::both;
    throw ConfigError("output.format: expected csv, json or both, got '" + s + "'");
}

void apply_json(RunConfig& cfg, const json& doc) {
    check_keys(doc, "config", {"preset", "product", "model", "numerics", "simulation", "exposure", "output"});
    if (doc.contains("product")) apply_product(cfg, doc.at("product"), cfg.preset.empty());
    if (doc.contains("model")) apply_model(cfg, doc.at("model"));
    if (doc.contains("numerics")) apply_numerics(cfg, doc.at("numerics"));
    if (doc.contains("simulation")) apply_simulation(cfg, doc.at("simulation"));
    if (doc.contains("exposure")) apply_exposure(cfg, doc.at("exposure"));
    if (doc.contains("output")) apply_output(cfg, doc.at("output"));
}

RunConfig resolve(const std::optional<std::filesystem::path>& file, const std::optional<std::string>& preset_name,
                  const Overrides& flags) {
    json doc = json::object();
    if (file) {
        std::ifstream is(*file);
        if (!is) throw ConfigError("config: cannot read " + file->string());
        try {
            doc = json::parse(is);
        } catch (const json::parse_error& e) {
            throw ConfigError("config: " + file->string() + " is not valid JSON (" + e.what() + ")");
        }
        if (!doc.is_object()) throw ConfigError("config: top level must be an object");
    }
    RunConfig cfg;
    std::optional<std::string> name = preset_name;
    if (!name && doc.contains("preset")) name = read<std::string>(doc, "preset", "config");
    if (name) cfg = preset(*name);
    if (!doc.contains("product") && !name) {
        if (file) throw ConfigError("product: required block missing (or name a preset)");
    }
    apply_json(cfg, doc);
    if (flags.seed) {
        cfg.simulation.seed = *flags.seed;
        cfg.numerics.seed = *flags.seed ^ kNumericsSeedMix;
    }
    if (flags.paths) cfg.simulation.paths = *flags.paths;
    if (flags.out) cfg.output.dir = *flags.out;
    if (flags.format) cfg.output.format = *flags.format;
    cfg.validate();
    return cfg;
}

json to_json(const RunConfig& cfg) {
    json j;
    if (!cfg.preset.empty()) j["preset"] = cfg.preset;
    j["product"] = {{"kind", std::string(to_string(cfg.product.kind))},
                    {"K", cfg.product.strike},
                    {"T", cfg.product.maturity},
                    {"n_dates", cfg.product.n_dates}};
    if (cfg.product.is_barrier()) j["product"]["B"] = cfg.product.barrier;
    j["model"] = {{"type", std::string(to_string(cfg.model.type))},
                  {"sigma", cfg.model.sigma},
                  {"mu", cfg.model.mu},
                  {"r", cfg.model.r},
                  {"S0", cfg.simulation.spot}};
    if (cfg.model.type == ModelType::merton) {
        j["model"]["lambda"] = cfg.model.jump_intensity;
        j["model"]["jump_mean"] = cfg.model.jump_mean;
        j["model"]["jump_std"] = cfg.model.jump_std;
    }
    if (cfg.model.type == ModelType::cev) j["model"]["cev_exponent"] = cfg.model.cev_exponent;
    const auto grid = resolve_grid(cfg.product, cfg.model, cfg.numerics);
    j["numerics"] = {{"N", grid.degree},
                     {"domain", {grid.domain.lo(), grid.domain.hi()}},
                     {"backend", std::string(to_string(grid.backend))},
                     {"m_pre", cfg.numerics.m_pre},
                     {"seed", cfg.numerics.seed},
                     {"smoothing", cfg.numerics.smoothing},
                     {"cev_substeps", cfg.numerics.cev_substeps}};
    j["simulation"] = {{"paths", cfg.simulation.paths},
                       {"seed", cfg.simulation.seed},
                       {"measure", cfg.simulation.measure == Measure::P ? "P" : "Q"}};
    j["exposure"] = {{"alpha", cfg.exposure.alpha},
                     {"grid", std::string(to_string(cfg.exposure.grid))},
                     {"days_per_year", cfg.exposure.days_per_year}};
    j["output"] = {{"dir", cfg.output.dir.string()}, {"format", format_name(cfg.output.format)}, {"name", cfg.output.name}};
    return j;
}

}  // namespace chebex::cli

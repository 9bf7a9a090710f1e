#include "chebex/models.hpp"

#include <bit>
#include <cfloat>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <string>

#include "chebex/error.hpp"
#include "chebex/parallel.hpp"
#include "chebex/rng.hpp"

namespace chebex {

std::string_view to_string(ModelType t) {
    switch (t) {
        case ModelType::black_scholes: return "black_scholes";
        case ModelType::merton: return "merton";
        case ModelType::cev: return "cev";
    }
    return "unknown";
}

ModelType parse_model_type(std::string_view s) {
    if (s == "black_scholes" || s == "bs") return ModelType::black_scholes;
    if (s == "merton") return ModelType::merton;
    if (s == "cev") return ModelType::cev;
    throw ConfigError("unknown model type '" + std::string(s) + "'");
}

void ModelSpec::validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(sigma) || sigma <= 0.0) throw ConfigError("model.sigma must be > 0");
    if (!finite(mu)) throw ConfigError("model.mu must be finite");
    if (!finite(r)) throw ConfigError("model.r must be finite");
    if (type == ModelType::merton) {
        if (!finite(jump_intensity) || jump_intensity < 0.0)
            throw ConfigError("model.jump_intensity must be >= 0");
        if (!finite(jump_std) || jump_std < 0.0) throw ConfigError("model.jump_std must be >= 0");
        if (!finite(jump_mean)) throw ConfigError("model.jump_mean must be finite");
    }
    if (type == ModelType::cev && (!finite(cev_exponent) || cev_exponent <= 0.0))
        throw ConfigError("model.cev_exponent must be > 0");
}

double ModelSpec::jump_compensator() const noexcept {
    if (type != ModelType::merton) return 0.0;
    return std::expm1(jump_mean + 0.5 * jump_std * jump_std);
}

std::uint64_t ModelSpec::fingerprint() const noexcept {
    // FNV-1a over the tag and the bit patterns of every parameter.
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xffu;
            h *= 0x100000001b3ull;
        }
    };
    mix(static_cast<std::uint64_t>(type));
    for (double v : {sigma, mu, r, jump_intensity, jump_mean, jump_std, cev_exponent})
        mix(std::bit_cast<std::uint64_t>(v));
    return h;
}

ModelSpec black_scholes(double sigma, double mu, double r) {
    ModelSpec m;
    m.type = ModelType::black_scholes;
    m.sigma = sigma;
    m.mu = mu;
    m.r = r;
    m.validate();
    return m;
}

ModelSpec merton(double sigma, double mu, double r, double lambda, double jump_mean, double jump_std) {
    ModelSpec m;
    m.type = ModelType::merton;
    m.sigma = sigma;
    m.mu = mu;
    m.r = r;
    m.jump_intensity = lambda;
    m.jump_mean = jump_mean;
    m.jump_std = jump_std;
    m.validate();
    return m;
}

ModelSpec cev(double sigma, double mu, double r, double exponent) {
    ModelSpec m;
    m.type = ModelType::cev;
    m.sigma = sigma;
    m.mu = mu;
    m.r = r;
    m.cev_exponent = exponent;
    m.validate();
    return m;
}

ModelSpec reference_black_scholes() { return black_scholes(0.25, 0.1, 0.03); }
ModelSpec reference_merton() { return merton(0.25, 0.1, 0.03, 0.4, -0.5, 0.4); }
ModelSpec reference_cev() { return cev(0.3, 0.1, 0.03, 1.5); }

std::complex<double> merton_cf(std::complex<double> z, double t, const ModelSpec& spec) {
    if (spec.type != ModelType::merton) throw ConfigError("merton_cf: model is not Merton");
    using namespace std::complex_literals;
    const double s2 = spec.sigma * spec.sigma;
    const double b = spec.r - 0.5 * s2 - spec.jump_intensity * spec.jump_compensator();
    const double beta2 = spec.jump_std * spec.jump_std;
    const auto jump = std::exp(1i * z * spec.jump_mean - 0.5 * beta2 * z * z) - 1.0;
    return std::exp(t * (1i * b * z - 0.5 * s2 * z * z + spec.jump_intensity * jump));
}

NormalStep conditional_normal_params(const ModelSpec& spec, double /*x*/, double dt) {
    if (spec.type != ModelType::black_scholes)
        throw ConfigError("conditional_normal_params: model has no conditionally normal increments");
    if (!(dt >= 0.0)) throw ConfigError("conditional_normal_params: dt must be >= 0");
    const double s2 = spec.sigma * spec.sigma;
    return {(spec.r - 0.5 * s2) * dt, s2 * dt};
}

std::size_t variates_per_step(const ModelSpec& spec, std::size_t cev_substeps) {
    switch (spec.type) {
        case ModelType::black_scholes: return 1;
        case ModelType::merton: return 3;
        case ModelType::cev: return cev_substeps;
    }
    return 1;
}

void draw_step_variates(const ModelSpec& spec, RandomStream& stream, std::span<double> out) {
    if (spec.type == ModelType::merton) {
        out[0] = stream.normal();
        out[1] = stream.uniform();
        out[2] = stream.normal();
        return;
    }
    for (auto& v : out) v = stream.normal();
}

namespace {

/// Inverse-CDF Poisson draw.
unsigned poisson_inverse(double mean, double u) {
    double p = std::exp(-mean);
    double cdf = p;
    unsigned n = 0;
    while (u > cdf && n < 10000) {
        ++n;
        p *= mean / n;
        cdf += p;
        if (p == 0.0) break;
    }
    return n;
}

}  // namespace

double advance(const ModelSpec& spec, Measure measure, double x, double dt, std::span<const double> variates,
               std::size_t cev_substeps) {
    const double drift = spec.drift(measure);
    const double s2 = spec.sigma * spec.sigma;
    switch (spec.type) {
        case ModelType::black_scholes:
            return x + (drift - 0.5 * s2) * dt + spec.sigma * std::sqrt(dt) * variates[0];
        case ModelType::merton: {
            const double lambda = spec.jump_intensity;
            const unsigned jumps = lambda > 0.0 ? poisson_inverse(lambda * dt, variates[1]) : 0u;
            double y = x + (drift - 0.5 * s2 - lambda * spec.jump_compensator()) * dt +
                       spec.sigma * std::sqrt(dt) * variates[0];
            if (jumps > 0)
                y += jumps * spec.jump_mean + std::sqrt(static_cast<double>(jumps)) * spec.jump_std * variates[2];
            return y;
        }
        case ModelType::cev: {
            const double h = dt / static_cast<double>(cev_substeps);
            const double sqrt_h = std::sqrt(h);
            const double half_beta = 0.5 * spec.cev_exponent;
            double s = std::exp(x);
            for (std::size_t k = 0; k < cev_substeps; ++k) {
                const double sp = std::max(s, 0.0);
                s += drift * sp * h + spec.sigma * std::pow(sp, half_beta) * sqrt_h * variates[k];
            }
            return std::log(std::max(s, DBL_MIN));
        }
    }
    return x;
}

std::vector<double> uniform_grid(double maturity, std::size_t steps) {
    if (steps == 0) throw ConfigError("uniform_grid: need at least one step");
    if (!(maturity > 0.0)) throw ConfigError("uniform_grid: maturity must be > 0");
    std::vector<double> g(steps + 1);
    for (std::size_t u = 0; u <= steps; ++u) g[u] = maturity * static_cast<double>(u) / static_cast<double>(steps);
    return g;
}

PathSet simulate_paths(const ModelSpec& spec, Measure measure, double x0, std::span<const double> grid,
                       std::size_t paths, std::uint64_t seed, unsigned threads, std::size_t cev_substeps) {
    spec.validate();
    if (paths == 0) throw ConfigError("simulate_paths: path count must be >= 1");
    if (grid.empty()) throw ConfigError("simulate_paths: empty time grid");
    if (grid[0] != 0.0) throw ConfigError("simulate_paths: grid must start at 0");
    for (std::size_t u = 1; u < grid.size(); ++u)
        if (!(grid[u] > grid[u - 1])) throw ConfigError("simulate_paths: grid must be strictly increasing");
    if (!std::isfinite(x0)) throw ConfigError("simulate_paths: x0 must be finite");
    if (cev_substeps == 0) throw ConfigError("simulate_paths: cev_substeps must be >= 1");

    PathSet out;
    out.paths = paths;
    out.grid.assign(grid.begin(), grid.end());
    out.seed = seed;
    out.values.resize(paths * grid.size());
    const std::size_t nv = variates_per_step(spec, cev_substeps);
    parallel_for(paths, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> variates(nv);
        for (std::size_t i = begin; i < end; ++i) {
            RandomStream stream(seed, i);
            double* row = out.values.data() + i * grid.size();
            row[0] = x0;
            for (std::size_t u = 1; u < grid.size(); ++u) {
                draw_step_variates(spec, stream, variates);
                row[u] = advance(spec, measure, row[u - 1], grid[u] - grid[u - 1], variates, cev_substeps);
            }
        }
    });
    return out;
}

namespace {
constexpr char kPathMagic[8] = {'C', 'H', 'X', 'P', 'A', 'T', 'H', '1'};
}

void save_paths_binary(const PathSet& paths, const std::filesystem::path& file) {
    std::ofstream os(file, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + file.string() + " for writing");
    const std::uint64_t header[3] = {paths.paths, paths.grid.size(), paths.seed};
    os.write(kPathMagic, sizeof kPathMagic);
    os.write(reinterpret_cast<const char*>(header), sizeof header);
    os.write(reinterpret_cast<const char*>(paths.grid.data()),
             static_cast<std::streamsize>(paths.grid.size() * sizeof(double)));
    os.write(reinterpret_cast<const char*>(paths.values.data()),
             static_cast<std::streamsize>(paths.values.size() * sizeof(double)));
    if (!os) throw std::runtime_error("write failed for " + file.string());
}

PathSet load_paths_binary(const std::filesystem::path& file) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + file.string());
    char magic[8];
    std::uint64_t header[3];
    is.read(magic, sizeof magic);
    is.read(reinterpret_cast<char*>(header), sizeof header);
    if (!is || std::memcmp(magic, kPathMagic, sizeof magic) != 0)
        throw std::runtime_error(file.string() + " is not a path file");
    PathSet p;
    p.paths = header[0];
    p.grid.resize(header[1]);
    p.seed = header[2];
    p.values.resize(p.paths * p.grid.size());
    is.read(reinterpret_cast<char*>(p.grid.data()), static_cast<std::streamsize>(p.grid.size() * sizeof(double)));
    is.read(reinterpret_cast<char*>(p.values.data()),
            static_cast<std::streamsize>(p.values.size() * sizeof(double)));
    if (!is) throw std::runtime_error("truncated path file " + file.string());
    return p;
}

void save_paths_csv(const PathSet& paths, const std::filesystem::path& file) {
    std::ofstream os(file);
    if (!os) throw std::runtime_error("cannot open " + file.string() + " for writing");
    os.imbue(std::locale::classic());
    os << std::setprecision(17);
    for (std::size_t u = 0; u < paths.grid.size(); ++u) os << (u ? "," : "") << paths.grid[u];
    os << '\n';
    for (std::size_t i = 0; i < paths.paths; ++i) {
        for (std::size_t u = 0; u < paths.grid.size(); ++u) os << (u ? "," : "") << paths(i, u);
        os << '\n';
    }
}

}  // namespace chebex

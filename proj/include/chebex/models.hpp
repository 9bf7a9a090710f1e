#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace chebex {

enum class ModelType { black_scholes, merton, cev };
enum class Measure { P, Q };

std::string_view to_string(ModelType);
ModelType parse_model_type(std::string_view);

/// Parameters of the three single-factor equity models.
///
/// sigma is the diffusion volatility (for CEV the coefficient in
/// sigma * S^(beta/2)); mu is the real-world drift, r the risk-free rate.
struct ModelSpec {
    ModelType type = ModelType::black_scholes;
    double sigma = 0.25;
    double mu = 0.1;
    double r = 0.03;
    double jump_intensity = 0.0;  // Merton lambda
    double jump_mean = 0.0;       // Merton alpha (mean log jump)
    double jump_std = 0.0;        // Merton beta
    double cev_exponent = 2.0;    // CEV beta

    /// Throws ConfigError when a field violates its invariant.
    void validate() const;

    /// Drift of the (Q or P) measure: r or mu.
    double drift(Measure m) const noexcept { return m == Measure::Q ? r : mu; }

    /// E[e^J] - 1 for the log-normal jump size.
    double jump_compensator() const noexcept;

    /// Stable 64-bit fingerprint of every field, used to key caches.
    std::uint64_t fingerprint() const noexcept;

    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

ModelSpec black_scholes(double sigma, double mu, double r);
ModelSpec merton(double sigma, double mu, double r, double lambda, double jump_mean, double jump_std);
ModelSpec cev(double sigma, double mu, double r, double exponent);

/// Parameter sets of the reference experiments (r = 0.03 throughout).
ModelSpec reference_black_scholes();
ModelSpec reference_merton();
ModelSpec reference_cev();

/// Characteristic function E^Q[exp(i z X_t)] of the Merton log-return over t.
std::complex<double> merton_cf(std::complex<double> z, double t, const ModelSpec& spec);

struct NormalStep {
    double mean_shift;
    double variance;
};

/// Exact Q-measure log-return mean and variance over dt for models with
/// conditionally normal increments (Black-Scholes only).
NormalStep conditional_normal_params(const ModelSpec& spec, double x, double dt);

inline constexpr std::size_t kDefaultCevSubsteps = 8;

/// Number of random variates consumed by one call of advance().
std::size_t variates_per_step(const ModelSpec& spec, std::size_t cev_substeps = kDefaultCevSubsteps);

class RandomStream;

/// Fills out (size variates_per_step) with the draws for one step.
/// Layout: BS {z}; Merton {z, u, z_jump} with u uniform; CEV {z_1..z_m}.
void draw_step_variates(const ModelSpec& spec, RandomStream& stream, std::span<double> out);

/// Advances log-price x over dt under the given measure using pre-drawn
/// variates. BS and Merton are sampled exactly; CEV uses full-truncation
/// Euler in the price with cev_substeps substeps.
double advance(const ModelSpec& spec, Measure measure, double x, double dt,
               std::span<const double> variates, std::size_t cev_substeps = kDefaultCevSubsteps);

/// Simulated log-price paths: values[i * (n + 1) + u] = X^i_{t_u}.
struct PathSet {
    std::size_t paths = 0;
    std::vector<double> grid;
    std::vector<double> values;
    std::uint64_t seed = 0;

    std::size_t dates() const noexcept { return grid.size(); }
    double operator()(std::size_t path, std::size_t date) const noexcept {
        return values[path * grid.size() + date];
    }
    std::span<const double> path(std::size_t i) const noexcept {
        return {values.data() + i * grid.size(), grid.size()};
    }

    friend bool operator==(const PathSet&, const PathSet&) = default;
};

/// Simulates M paths from x0 on the grid (grid[0] must be 0). Path i uses the
/// substream (seed, i), so results do not depend on the thread count.
PathSet simulate_paths(const ModelSpec& spec, Measure measure, double x0, std::span<const double> grid,
                       std::size_t paths, std::uint64_t seed, unsigned threads = 0,
                       std::size_t cev_substeps = kDefaultCevSubsteps);

/// Equally spaced grid 0, T/n, ..., T.
std::vector<double> uniform_grid(double maturity, std::size_t steps);

/// Flat little-endian binary dump; load reproduces the PathSet exactly.
void save_paths_binary(const PathSet& paths, const std::filesystem::path& file);
PathSet load_paths_binary(const std::filesystem::path& file);

/// CSV with a header row of grid dates and one row per path (17 significant digits).
void save_paths_csv(const PathSet& paths, const std::filesystem::path& file);

}  // namespace chebex

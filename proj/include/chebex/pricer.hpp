#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "chebex/cheb.hpp"
#include "chebex/models.hpp"
#include "chebex/moments.hpp"
#include "chebex/product.hpp"

namespace chebex {

struct NumericsConfig {
    std::optional<std::size_t> degree;
    std::optional<ChebDomain> domain;
    /// Defaults: analytic for Black-Scholes, fourier for Merton, monte_carlo for CEV.
    std::optional<MomentBackend> backend;
    std::size_t m_pre = 100000;
    std::uint64_t seed = 1;
    FourierConfig fourier;
    std::size_t cev_substeps = kDefaultCevSubsteps;
    bool smoothing = true;
    unsigned threads = 0;
    /// Directory for cached moment matrices; empty disables caching.
    std::filesystem::path cache_dir;
};

MomentBackend default_backend(const ModelSpec& model) noexcept;

/// Throws ConfigError for unsupported model/backend pairs.
void check_backend(const ModelSpec& model, MomentBackend backend);

/// Q-measure characteristic function of the log-return over dt (BS, Merton).
CharFn log_return_cf(const ModelSpec& model, double dt);

/// Resolved grid shared by every product priced together.
struct PricingGrid {
    ChebDomain domain;
    std::size_t degree;
    double dt;
    MomentBackend backend;
};

PricingGrid resolve_grid(const ProductSpec& product, const ModelSpec& model, const NumericsConfig& cfg);

struct Precomputation {
    MomentMatrix gamma;
    /// terminal[p][k] = E^Q[g_p(X_dt) | x_k], undiscounted.
    std::vector<std::vector<double>> terminal;
};

/// Gamma over dt plus the one-period payoff expectations used by smoothing.
/// BS uses closed-form partial expectations, the fourier backend integrates
/// against the recovered density and Monte Carlo averages its own draws.
Precomputation precompute(std::span<const ProductSpec> products, const ModelSpec& model, const PricingGrid& grid,
                          const NumericsConfig& cfg);

/// E^Q[g(X_dt) | x] for every node, by the backend's own expectation rule.
std::vector<std::vector<double>> payoff_expectations(std::span<const ProductSpec> products,
                                                     const ModelSpec& model, const PricingGrid& grid, double dt,
                                                     const NumericsConfig& cfg);

struct DCSolution {
    ProductSpec product;
    ChebDomain domain;
    double r = 0.0;
    double dt = 0.0;
    double discount = 1.0;
    std::vector<double> dates;
    /// Value function at t_0 .. t_n.
    std::vector<ChebPoly> value_polys;
    /// Discounted expectation of the next value function at t_0 .. t_{n-1}.
    std::vector<ChebPoly> continuation_polys;
    bool smoothing = true;
};

/// Nodal values at t_{n-1} from the one-period payoff expectation.
std::vector<double> smoothing_terminal_step(const ProductSpec& product, const ModelSpec& model,
                                            const ChebDomain& domain, std::size_t degree,
                                            std::span<const double> terminal_expectation);

/// Backward induction for several products sharing one Gamma.
std::vector<DCSolution> backward_induction(std::span<const ProductSpec> products, const ModelSpec& model,
                                           const Precomputation& pre, bool smoothing);

DCSolution backward_induction(const ProductSpec& product, const ModelSpec& model, const Precomputation& pre,
                              bool smoothing);

struct PhaseTimes {
    double precompute = 0.0;  // seconds
    double stepping = 0.0;
};

/// Precompute and backward induction in one call. Products whose resolved
/// grids coincide share a single precomputation.
std::vector<DCSolution> solve(std::span<const ProductSpec> products, const ModelSpec& model,
                              const NumericsConfig& cfg, PhaseTimes* times = nullptr);
DCSolution solve(const ProductSpec& product, const ModelSpec& model, const NumericsConfig& cfg = {});

/// Value at date index u and log-price x, applying the extension rules.
double price(const DCSolution& sol, std::size_t date, double x);

/// Derivatives in log-price; x must lie strictly inside the domain.
double delta(const DCSolution& sol, std::size_t date, double x);
double gamma_greek(const DCSolution& sol, std::size_t date, double x);

/// Spot Greeks by the log chain rule.
double delta_spot(const DCSolution& sol, std::size_t date, double spot);
double gamma_spot(const DCSolution& sol, std::size_t date, double spot);

void save_solution_json(const DCSolution& sol, const std::filesystem::path& file);

}  // namespace chebex

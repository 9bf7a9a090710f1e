#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "chebex/models.hpp"
#include "chebex/pricer.hpp"
#include "chebex/product.hpp"

namespace chebex {

/// Value function of one product at one simulation date.
struct ValuationSlice {
    double t = 0.0;
    ChebPoly value{ChebDomain(0.0, 1.0), {0.0}};
    /// Present on Bermudan exercise dates before maturity.
    std::optional<ChebPoly> continuation;
    /// Exercise or barrier-monitoring date of the product.
    bool monitoring = false;
    bool maturity = false;
};

/// Slices on an arbitrary grid inside [0, T]. Dates that are not dates of
/// the solution are valued one fractional step before the next date using a
/// moment matrix over the remaining time (analytic and fourier backends).
std::vector<ValuationSlice> valuation_slices(const DCSolution& sol, const ModelSpec& model,
                                             const NumericsConfig& cfg, std::span<const double> grid);

struct ExposureMatrix {
    std::size_t paths = 0;
    std::size_t dates = 0;
    std::vector<double> e;         // e[i * dates + u] >= 0
    std::vector<std::uint8_t> alive;  // not yet exercised / knocked out

    double operator()(std::size_t i, std::size_t u) const noexcept { return e[i * dates + u]; }
    bool is_alive(std::size_t i, std::size_t u) const noexcept { return alive[i * dates + u] != 0; }
};

/// Exposures of several products along shared paths. Basis evaluations are
/// shared by products with identical domain and degree.
std::vector<ExposureMatrix> path_exposures(std::span<const DCSolution> sols,
                                           std::span<const std::vector<ValuationSlice>> slices,
                                           const PathSet& paths, unsigned threads = 0);

/// Exposures on the solution's own dates.
ExposureMatrix path_exposures(const DCSolution& sol, const PathSet& paths, unsigned threads = 0);

/// Mean exposure per date (compensated summation).
std::vector<double> expected_exposure(const ExposureMatrix& em);

/// The ceil(alpha M)-th smallest exposure per date.
std::vector<double> pfe(const ExposureMatrix& em, double alpha);

enum class ExposureGrid { exercise, daily };

std::string_view to_string(ExposureGrid);
ExposureGrid parse_exposure_grid(std::string_view);

struct SimulationConfig {
    std::size_t paths = 50000;
    std::uint64_t seed = 42;
    Measure measure = Measure::P;
    double spot = 100.0;
};

struct ExposureConfig {
    double alpha = 0.975;
    ExposureGrid grid = ExposureGrid::exercise;
    std::size_t days_per_year = 252;
};

struct PhaseTimings {
    double simulation = 0.0;
    double precompute = 0.0;
    double stepping = 0.0;
    double total = 0.0;
};

struct ExposureProfile {
    ProductSpec product;
    std::vector<double> grid;
    std::vector<double> ee;
    std::vector<double> pfe;
    double alpha = 0.975;
    double price_t0 = 0.0;
    std::size_t paths = 0;
    std::uint64_t seed = 0;
};

struct ExposureRun {
    std::vector<ExposureProfile> profiles;
    std::vector<DCSolution> solutions;
    PhaseTimings timings;
};

/// Simulation grid: union of every product's dates, plus trading days when
/// the daily grid is requested.
std::vector<double> exposure_grid(std::span<const ProductSpec> products, const ExposureConfig& cfg);

/// Simulate, precompute, step backwards and aggregate for products sharing
/// maturity, model and paths.
ExposureRun run_exposure(std::span<const ProductSpec> products, const ModelSpec& model, const NumericsConfig& num,
                         const SimulationConfig& sim, const ExposureConfig& exp);

ExposureProfile run_exposure(const ProductSpec& product, const ModelSpec& model, const NumericsConfig& num = {},
                             const SimulationConfig& sim = {}, const ExposureConfig& exp = {});

}  // namespace chebex

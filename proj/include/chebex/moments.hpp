#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "chebex/cheb.hpp"
#include "chebex/models.hpp"

namespace chebex {

enum class MomentBackend { analytic, fourier, monte_carlo };

std::string_view to_string(MomentBackend);
MomentBackend parse_moment_backend(std::string_view);

/// Gamma[k][j] = E^Q[p_j(X_dt) | X_0 = x_k]: conditional expectations of the
/// domain-restricted basis polynomials, one row per Chebyshev node.
class MomentMatrix {
public:
    MomentMatrix(ChebDomain domain, std::size_t degree, double dt, MomentBackend backend,
                 std::vector<double> gamma);

    std::size_t degree() const noexcept { return degree_; }
    std::size_t size() const noexcept { return degree_ + 1; }
    const ChebDomain& domain() const noexcept { return domain_; }
    double dt() const noexcept { return dt_; }
    MomentBackend backend() const noexcept { return backend_; }

    double operator()(std::size_t k, std::size_t j) const noexcept { return gamma_[k * size() + j]; }
    std::span<const double> row(std::size_t k) const noexcept { return {gamma_.data() + k * size(), size()}; }
    std::span<const double> data() const noexcept { return gamma_; }

    /// Nodal values sum_j coeffs[j] * Gamma[k][j] for every node k.
    std::vector<double> apply(std::span<const double> coeffs) const;

    friend bool operator==(const MomentMatrix&, const MomentMatrix&) = default;

private:
    ChebDomain domain_;
    std::size_t degree_;
    double dt_;
    MomentBackend backend_;
    std::vector<double> gamma_;
};

// ---------------------------------------------------------------------------
// Analytic backend

/// mu_j = E[T_j(Y) 1{-1 <= Y <= 1}] and mu'_j = E[T_j'(Y) 1{-1 <= Y <= 1}]
/// for Y ~ N(mu, sigma^2).
struct TruncatedNormalMoments {
    double mu = 0.0;
    double sigma = 1.0;
    std::vector<double> moments;
    std::vector<double> deriv_moments;
};

/// Truncated Chebyshev moments of a normal variable, j = 0..degree.
///
/// The moments obey the recurrence
///   mu_{n+1} = 2(mu mu_n - sigma^2 (f(1) - (-1)^n f(-1) - mu'_n)) - mu_{n-1},
///   mu'_{n+1} = 2(n+1) sum'_{j <= n, j = n mod 2} mu_j,
/// seeded by mu_0 = F(1) - F(-1) and mu_1 = mu mu_0 - sigma^2 (f(1) - f(-1)).
/// Marching it forward amplifies rounding without bound once sigma is not
/// small, so the recurrence is solved as a banded boundary-value problem
/// (Olver's method) that pins mu_0, mu_1 and lets the moments vanish far
/// beyond the requested degree. For sigma so small that the required
/// extension would be huge, forward marching is used; it is stable there.
TruncatedNormalMoments truncated_cheb_moments(double mu, double sigma, std::size_t degree);

/// Forward-marching evaluation of the same recurrence. Exposed for
/// diagnostics and tests only: it loses all accuracy for moderate sigma.
std::vector<double> truncated_cheb_moments_forward(double mu, double sigma, std::size_t degree);

/// One Gamma row for a normal increment with the given drift and variance
/// per unit time.
std::vector<double> gamma_row_normal(const ChebDomain& domain, std::size_t degree, double node_x,
                                     double drift, double var, double dt);

MomentMatrix gamma_normal(const ChebDomain& domain, std::size_t degree, double drift, double var, double dt,
                          unsigned threads = 0);

// ---------------------------------------------------------------------------
// Fourier backend

/// Characteristic function u -> E[exp(i u dX)] of a log-return increment.
using CharFn = std::function<std::complex<double>(std::complex<double>)>;

struct Cumulants {
    double c1 = 0.0;
    double c2 = 0.0;
    double c4 = 0.0;
};

/// First, second and fourth cumulants by finite differences of log phi(-i s).
Cumulants cumulants_from_cf(const CharFn& phi);

struct FourierConfig {
    /// Initial half-width of the truncation window in units of
    /// sqrt(c2 + sqrt(c4)); widened while the density at the edges is not
    /// negligible.
    double truncation_width = 10.0;
    /// Cosine terms are added until |phi| stays below this tolerance.
    double tail_tolerance = 1e-15;
    std::size_t max_terms = std::size_t{1} << 16;
    /// Gauss-Legendre points per quadrature panel.
    std::size_t panel_order = 16;
    unsigned threads = 0;
};

/// Transition density of a stationary log-return increment, recovered from
/// its characteristic function by a cosine expansion on the truncation
/// window around c1 and tabulated on a fine grid.
class IncrementDensity {
public:
    IncrementDensity(const CharFn& phi, const FourierConfig& cfg = {});
    IncrementDensity(const CharFn& phi, Cumulants cumulants, const FourierConfig& cfg = {});

    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    std::size_t terms() const noexcept { return terms_; }
    /// Length scale of the finest resolved density feature.
    double resolution() const noexcept { return (hi_ - lo_) / static_cast<double>(terms_); }
    const FourierConfig& config() const noexcept { return cfg_; }

    /// Density at y; zero outside the window.
    double operator()(double y) const noexcept;

    /// Integral of h(y) q(y) over [a, b] intersected with the window. Panel
    /// boundaries are inserted at every break point (payoff kinks).
    double integrate(const std::function<double(double)>& h, double a, double b,
                     std::span<const double> breaks = {}) const;

private:
    void build(const CharFn& phi, Cumulants cumulants);
    /// Fills the table on [lo, hi]; returns edge density relative to the peak.
    double tabulate(const CharFn& phi, double lo, double hi);

    FourierConfig cfg_;
    double lo_ = 0.0;
    double hi_ = 0.0;
    std::size_t terms_ = 0;
    double step_ = 0.0;
    std::vector<double> table_;
};

/// Gamma from a characteristic function of the increment over dt.
MomentMatrix gamma_fourier(const ChebDomain& domain, std::size_t degree, const CharFn& phi, double dt,
                           const FourierConfig& cfg = {});
MomentMatrix gamma_fourier(const ChebDomain& domain, std::size_t degree, const IncrementDensity& density,
                           double dt);

// ---------------------------------------------------------------------------
// Monte Carlo backend

using PayoffFn = std::function<double(double)>;

struct McPrecompute {
    MomentMatrix gamma;
    /// expectations[p][k] = sample mean of payoffs[p](X_dt) started at node k.
    std::vector<std::vector<double>> expectations;
};

/// Gamma by simulating X_dt under Q from every node with common random
/// numbers: draw i uses the substream (seed, i) for every node.
McPrecompute gamma_mc_with_expectations(const ChebDomain& domain, std::size_t degree, const ModelSpec& model,
                                        double dt, std::size_t m_pre, std::uint64_t seed,
                                        std::span<const PayoffFn> payoffs, unsigned threads = 0,
                                        std::size_t cev_substeps = kDefaultCevSubsteps);

MomentMatrix gamma_mc(const ChebDomain& domain, std::size_t degree, const ModelSpec& model, double dt,
                      std::size_t m_pre, std::uint64_t seed, unsigned threads = 0,
                      std::size_t cev_substeps = kDefaultCevSubsteps);

// ---------------------------------------------------------------------------
// Cache

struct MomentCacheKey {
    std::uint64_t model_hash = 0;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t degree = 0;
    double dt = 0.0;
    MomentBackend backend = MomentBackend::analytic;
    std::size_t m_pre = 0;
    std::uint64_t seed = 0;

    friend bool operator==(const MomentCacheKey&, const MomentCacheKey&) = default;
};

/// File stem derived from every key field.
std::string cache_file_stem(const MomentCacheKey& key);

void save_moment_matrix(const std::filesystem::path& file, const MomentCacheKey& key, const MomentMatrix& m);
/// Empty when the file is missing or was written for a different key.
std::optional<MomentMatrix> load_moment_matrix(const std::filesystem::path& file, const MomentCacheKey& key);

void save_moment_matrix_json(const std::filesystem::path& file, const MomentCacheKey& key, const MomentMatrix& m);
std::optional<MomentMatrix> load_moment_matrix_json(const std::filesystem::path& file,
                                                    const MomentCacheKey& key);

}  // namespace chebex

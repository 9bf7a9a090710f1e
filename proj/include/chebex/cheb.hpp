#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace chebex {

/// Slack allowed on |z| <= 1 to absorb roundoff in the affine map.
inline constexpr double kUnitSlack = 1e-12;

/// Interpolation interval [lo, hi] in log-price.
class ChebDomain {
public:
    ChebDomain(double lo, double hi);

    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    double width() const noexcept { return hi_ - lo_; }

    /// Inverse of from_unit: maps [lo, hi] onto [-1, 1].
    double to_unit(double x) const noexcept { return 1.0 - 2.0 * (hi_ - x) / (hi_ - lo_); }
    /// hi + (lo - hi)(1 - z)/2: maps [-1, 1] onto [lo, hi].
    double from_unit(double z) const noexcept { return hi_ + 0.5 * (lo_ - hi_) * (1.0 - z); }

    bool contains(double x) const noexcept { return x >= lo_ && x <= hi_; }

    friend bool operator==(const ChebDomain&, const ChebDomain&) = default;

private:
    double lo_;
    double hi_;
};

/// Chebyshev points z_k = cos(pi k / N), k = 0..N, descending from 1 to -1.
std::vector<double> cheb_nodes(std::size_t degree);

/// Chebyshev points mapped onto a domain (same ordering, x_0 = hi).
std::vector<double> cheb_nodes(const ChebDomain& domain, std::size_t degree);

/// Interpolation coefficients from values at cheb_nodes(N), via the direct
/// double-prime cosine sum.
std::vector<double> cheb_coefficients(std::span<const double> values);

/// Clenshaw evaluation of sum_j c_j T_j(z). Throws DomainError when z is
/// outside [-1, 1] by more than kUnitSlack.
double clenshaw(std::span<const double> coeffs, double z);

/// Coefficients of d/dz of a Chebyshev series (length drops by one).
std::vector<double> derivative_coeffs(std::span<const double> coeffs);

/// Writes T_0(z) .. T_{n-1}(z) into out by the three-term recurrence.
void chebyshev_basis(double z, std::span<double> out) noexcept;

/// A Chebyshev series on a domain: sum_j c_j T_j(to_unit(x)).
class ChebPoly {
public:
    ChebPoly(ChebDomain domain, std::vector<double> coeffs);

    /// Interpolant through values given at cheb_nodes(domain, values.size() - 1).
    static ChebPoly interpolate(const ChebDomain& domain, std::span<const double> nodal_values);

    template <class F>
    static ChebPoly fit(const ChebDomain& domain, std::size_t degree, F&& f) {
        const auto nodes = cheb_nodes(domain, degree);
        std::vector<double> values(nodes.size());
        for (std::size_t k = 0; k < nodes.size(); ++k) values[k] = f(nodes[k]);
        return interpolate(domain, values);
    }

    const ChebDomain& domain() const noexcept { return domain_; }
    std::span<const double> coeffs() const noexcept { return coeffs_; }
    std::size_t degree() const noexcept { return coeffs_.size() - 1; }

    /// Throws DomainError for x outside the domain.
    double operator()(double x) const;

    /// sum_j c_j basis[j] for a basis row produced by chebyshev_basis.
    double dot(std::span<const double> basis) const noexcept;

    /// d/dx, including the chain factor 2 / (hi - lo).
    ChebPoly derivative() const;

    friend bool operator==(const ChebPoly&, const ChebPoly&) = default;

private:
    ChebDomain domain_;
    std::vector<double> coeffs_;
};

inline double eval_poly(const ChebPoly& p, double x) { return p(x); }

}  // namespace chebex

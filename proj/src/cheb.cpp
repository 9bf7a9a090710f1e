#include "chebex/cheb.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "chebex/error.hpp"

namespace chebex {

ChebDomain::ChebDomain(double lo, double hi) : lo_(lo), hi_(hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi))
        throw ConfigError("ChebDomain: bounds must be finite");
    if (!(lo < hi))
        throw ConfigError("ChebDomain: require lo < hi, got [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "]");
}

std::vector<double> cheb_nodes(std::size_t degree) {
    if (degree == 0) throw ConfigError("cheb_nodes: degree must be at least 1");
    std::vector<double> z(degree + 1);
    const double n = static_cast<double>(degree);
    // sin((N - 2k) pi / 2N) == cos(k pi / N), but exactly antisymmetric and
    // exactly zero at the midpoint.
    for (std::size_t k = 0; k <= degree; ++k)
        z[k] = std::sin(std::numbers::pi * (n - 2.0 * static_cast<double>(k)) / (2.0 * n));
    return z;
}

std::vector<double> cheb_nodes(const ChebDomain& domain, std::size_t degree) {
    auto x = cheb_nodes(degree);
    for (auto& v : x) v = domain.from_unit(v);
    x.front() = domain.hi();
    x.back() = domain.lo();
    return x;
}

std::vector<double> cheb_coefficients(std::span<const double> values) {
    if (values.size() < 2) throw ConfigError("cheb_coefficients: need at least two nodal values");
    const std::size_t n = values.size() - 1;
    // T_j(z_k) = cos(pi j k / N); tabulate cos(pi m / N) for m in [0, 2N).
    std::vector<double> table(2 * n);
    for (std::size_t m = 0; m < 2 * n; ++m)
        table[m] = std::cos(std::numbers::pi * static_cast<double>(m) / static_cast<double>(n));

    std::vector<double> c(n + 1, 0.0);
    for (std::size_t j = 0; j <= n; ++j) {
        double sum = 0.5 * values[0] * table[0];
        for (std::size_t k = 1; k < n; ++k) sum += values[k] * table[(j * k) % (2 * n)];
        sum += 0.5 * values[n] * table[(j * n) % (2 * n)];
        const double scale = (j == 0 || j == n) ? 1.0 : 2.0;
        c[j] = scale * sum / static_cast<double>(n);
    }
    return c;
}

double clenshaw(std::span<const double> coeffs, double z) {
    if (coeffs.empty()) throw ConfigError("clenshaw: empty coefficient sequence");
    if (!(std::abs(z) <= 1.0 + kUnitSlack))
        throw DomainError("clenshaw: z = " + std::to_string(z) + " outside [-1, 1]");
    z = std::clamp(z, -1.0, 1.0);
    double b1 = 0.0;
    double b2 = 0.0;
    for (std::size_t k = coeffs.size() - 1; k >= 1; --k) {
        const double b0 = coeffs[k] + 2.0 * z * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    return coeffs[0] + z * b1 - b2;
}

std::vector<double> derivative_coeffs(std::span<const double> coeffs) {
    if (coeffs.size() < 2) throw ConfigError("derivative_coeffs: need degree >= 1");
    const std::size_t n = coeffs.size() - 1;
    std::vector<double> d(n + 2, 0.0);
    for (std::size_t k = n; k >= 1; --k)
        d[k - 1] = d[k + 1] + 2.0 * static_cast<double>(k) * coeffs[k];
    d[0] *= 0.5;
    d.resize(n);
    return d;
}

void chebyshev_basis(double z, std::span<double> out) noexcept {
    if (out.empty()) return;
    out[0] = 1.0;
    if (out.size() == 1) return;
    out[1] = z;
    const double two_z = 2.0 * z;
    for (std::size_t j = 2; j < out.size(); ++j) out[j] = two_z * out[j - 1] - out[j - 2];
}

ChebPoly::ChebPoly(ChebDomain domain, std::vector<double> coeffs)
    : domain_(domain), coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) throw ConfigError("ChebPoly: coefficient sequence is empty");
    for (double c : coeffs_)
        if (!std::isfinite(c)) throw NumericalError("ChebPoly: non-finite coefficient");
}

ChebPoly ChebPoly::interpolate(const ChebDomain& domain, std::span<const double> nodal_values) {
    return ChebPoly(domain, cheb_coefficients(nodal_values));
}

double ChebPoly::operator()(double x) const {
    const double z = domain_.to_unit(x);
    if (!(std::abs(z) <= 1.0 + kUnitSlack))
        throw DomainError("ChebPoly: x = " + std::to_string(x) + " outside [" +
                          std::to_string(domain_.lo()) + ", " + std::to_string(domain_.hi()) + "]");
    return clenshaw(coeffs_, z);
}

double ChebPoly::dot(std::span<const double> basis) const noexcept {
    double s = 0.0;
    const std::size_t n = std::min(basis.size(), coeffs_.size());
    for (std::size_t j = 0; j < n; ++j) s += coeffs_[j] * basis[j];
    return s;
}

ChebPoly ChebPoly::derivative() const {
    if (coeffs_.size() < 2) return ChebPoly(domain_, {0.0});
    auto d = derivative_coeffs(coeffs_);
    const double chain = 2.0 / domain_.width();
    for (auto& v : d) v *= chain;
    return ChebPoly(domain_, std::move(d));
}

}  // namespace chebex

#pragma once

#include <cstddef>
#include <string_view>

#include "chebex/cheb.hpp"
#include "chebex/models.hpp"

namespace chebex {

enum class ProductKind { european_call, european_put, bermudan_put, barrier_up_out_call };

std::string_view to_string(ProductKind);
ProductKind parse_product_kind(std::string_view);

struct ProductSpec {
    ProductKind kind = ProductKind::european_put;
    double strike = 100.0;
    double barrier = 0.0;  // up-and-out calls only
    double maturity = 1.0;
    std::size_t n_dates = 52;

    void validate() const;
    double dt() const noexcept { return maturity / static_cast<double>(n_dates); }
    bool is_bermudan() const noexcept { return kind == ProductKind::bermudan_put; }
    bool is_barrier() const noexcept { return kind == ProductKind::barrier_up_out_call; }
    bool is_put() const noexcept { return kind == ProductKind::european_put || kind == ProductKind::bermudan_put; }
    double log_barrier() const;

    friend bool operator==(const ProductSpec&, const ProductSpec&) = default;
};

ProductSpec european_put(double strike = 100.0, double maturity = 1.0, std::size_t n_dates = 52);
ProductSpec european_call(double strike = 100.0, double maturity = 1.0, std::size_t n_dates = 52);
ProductSpec bermudan_put(double strike = 100.0, double maturity = 1.0, std::size_t n_dates = 52);
ProductSpec barrier_up_out_call(double strike, double barrier, double maturity = 1.0, std::size_t n_dates = 52);

/// Payoff at log-price x; the barrier call pays nothing above the barrier.
double payoff(const ProductSpec& product, double x) noexcept;

/// [log 0.2, log 350] for vanillas, [log 10, log B] for barrier calls.
ChebDomain default_domain(const ProductSpec& product, const ModelSpec& model);

/// 150 for vanillas, 40 for barrier calls.
std::size_t default_degree(const ProductSpec& product) noexcept;

/// Value assigned at time t to a log-price outside the interpolation domain.
/// Throws DomainError when x lies inside it.
double extension_value(const ProductSpec& product, double r, const ChebDomain& domain, double x, double t);

}  // namespace chebex

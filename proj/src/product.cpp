#include "chebex/product.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chebex/error.hpp"

namespace chebex {

std::string_view to_string(ProductKind k) {
    switch (k) {
        case ProductKind::european_call: return "european_call";
        case ProductKind::european_put: return "european_put";
        case ProductKind::bermudan_put: return "bermudan_put";
        case ProductKind::barrier_up_out_call: return "barrier_up_out_call";
    }
    return "unknown";
}

ProductKind parse_product_kind(std::string_view s) {
    for (auto k : {ProductKind::european_call, ProductKind::european_put, ProductKind::bermudan_put,
                   ProductKind::barrier_up_out_call})
        if (s == to_string(k)) return k;
    throw ConfigError("product.kind: unknown product '" + std::string(s) + "'");
}

void ProductSpec::validate() const {
    if (!(strike > 0.0) || !std::isfinite(strike)) throw ConfigError("product.K: strike must be > 0");
    if (!(maturity > 0.0) || !std::isfinite(maturity)) throw ConfigError("product.T: maturity must be > 0");
    if (n_dates < 1) throw ConfigError("product.n_dates: must be >= 1");
    if (is_barrier() && !(barrier > strike && std::isfinite(barrier)))
        throw ConfigError("product.B: barrier must exceed the strike");
}

double ProductSpec::log_barrier() const {
    if (!is_barrier()) throw ConfigError("log_barrier: product has no barrier");
    return std::log(barrier);
}

ProductSpec european_put(double strike, double maturity, std::size_t n_dates) {
    return {ProductKind::european_put, strike, 0.0, maturity, n_dates};
}

ProductSpec european_call(double strike, double maturity, std::size_t n_dates) {
    return {ProductKind::european_call, strike, 0.0, maturity, n_dates};
}

ProductSpec bermudan_put(double strike, double maturity, std::size_t n_dates) {
    return {ProductKind::bermudan_put, strike, 0.0, maturity, n_dates};
}

ProductSpec barrier_up_out_call(double strike, double barrier, double maturity, std::size_t n_dates) {
    return {ProductKind::barrier_up_out_call, strike, barrier, maturity, n_dates};
}

double payoff(const ProductSpec& p, double x) noexcept {
    const double s = std::exp(x);
    switch (p.kind) {
        case ProductKind::european_put:
        case ProductKind::bermudan_put: return std::max(p.strike - s, 0.0);
        case ProductKind::european_call: return std::max(s - p.strike, 0.0);
        case ProductKind::barrier_up_out_call: return x > std::log(p.barrier) ? 0.0 : std::max(s - p.strike, 0.0);
    }
    return 0.0;
}

ChebDomain default_domain(const ProductSpec& p, const ModelSpec&) {
    if (p.is_barrier()) return {std::log(10.0), std::log(p.barrier)};
    return {std::log(0.2), std::log(350.0)};
}

std::size_t default_degree(const ProductSpec& p) noexcept { return p.is_barrier() ? 40 : 150; }

double extension_value(const ProductSpec& p, double r, const ChebDomain& domain, double x, double t) {
    if (domain.contains(x))
        throw DomainError("extension_value: x = " + std::to_string(x) + " lies inside the domain");
    const double tau = std::max(p.maturity - t, 0.0);
    const bool above = x > domain.hi();
    switch (p.kind) {
        case ProductKind::bermudan_put: return above ? 0.0 : payoff(p, x);
        case ProductKind::european_put: return above ? 0.0 : p.strike * std::exp(-r * tau) - std::exp(x);
        case ProductKind::european_call: return above ? std::exp(x) - p.strike * std::exp(-r * tau) : 0.0;
        case ProductKind::barrier_up_out_call: return 0.0;
    }
    return 0.0;
}

}  // namespace chebex

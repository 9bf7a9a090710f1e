#include "chebex/pricer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "chebex/error.hpp"
#include "chebex/rng.hpp"
#include "json.hpp"

namespace chebex {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

/// E[(c1 e^X + c0) 1{l < X <= u}] for X ~ N(m, v).
double normal_partial_expectation(double m, double v, double c1, double c0, double l, double u) {
    const double s = std::sqrt(v);
    auto prob = [&](double shift) {
        const double a = std::isinf(l) ? -std::numeric_limits<double>::infinity() : (l - m - shift) / s;
        const double b = std::isinf(u) ? std::numeric_limits<double>::infinity() : (u - m - shift) / s;
        // Difference of CDFs taken on the side with the smaller tail.
        if (a > 0.0) return normal_cdf(-a) - normal_cdf(-b);
        return normal_cdf(b) - normal_cdf(a);
    };
    return c1 * std::exp(m + 0.5 * v) * prob(v) + c0 * prob(0.0);
}

double bs_payoff_expectation(const ProductSpec& p, const ModelSpec& model, double x, double dt) {
    const auto step = conditional_normal_params(model, x, dt);
    const double m = x + step.mean_shift;
    const double v = step.variance;
    const double k = std::log(p.strike);
    constexpr double inf = std::numeric_limits<double>::infinity();
    switch (p.kind) {
        case ProductKind::european_put:
        case ProductKind::bermudan_put: return normal_partial_expectation(m, v, -1.0, p.strike, -inf, k);
        case ProductKind::european_call: return normal_partial_expectation(m, v, 1.0, -p.strike, k, inf);
        case ProductKind::barrier_up_out_call:
            return normal_partial_expectation(m, v, 1.0, -p.strike, k, p.log_barrier());
    }
    return 0.0;
}

void check_finite(const std::vector<double>& v, const ProductSpec& p, std::size_t date, const ChebDomain& d) {
    const auto nodes = cheb_nodes(d, v.size() - 1);
    for (std::size_t k = 0; k < v.size(); ++k)
        if (!std::isfinite(v[k]))
            throw NumericalError("backward induction (" + std::string(to_string(p.kind)) +
                                 "): non-finite value at date " + std::to_string(date) + ", node " +
                                 std::to_string(k) + " (x = " + std::to_string(nodes[k]) + ")");
}

}  // namespace

MomentBackend default_backend(const ModelSpec& model) noexcept {
    switch (model.type) {
        case ModelType::black_scholes: return MomentBackend::analytic;
        case ModelType::merton: return MomentBackend::fourier;
        case ModelType::cev: return MomentBackend::monte_carlo;
    }
    return MomentBackend::monte_carlo;
}

void check_backend(const ModelSpec& model, MomentBackend backend) {
    if (backend == MomentBackend::analytic && model.type != ModelType::black_scholes)
        throw ConfigError("numerics.backend: analytic moments require the black_scholes model");
    if (backend == MomentBackend::fourier && model.type == ModelType::cev)
        throw ConfigError("numerics.backend: fourier moments are not available for the cev model");
}

CharFn log_return_cf(const ModelSpec& model, double dt) {
    if (model.type == ModelType::merton) return [model, dt](std::complex<double> z) { return merton_cf(z, dt, model); };
    if (model.type == ModelType::black_scholes) {
        const double b = model.r - 0.5 * model.sigma * model.sigma;
        const double v = model.sigma * model.sigma;
        return [b, v, dt](std::complex<double> z) {
            const std::complex<double> i(0.0, 1.0);
            return std::exp(dt * (i * b * z - 0.5 * v * z * z));
        };
    }
    throw ConfigError("log_return_cf: no characteristic function for the cev model");
}

PricingGrid resolve_grid(const ProductSpec& product, const ModelSpec& model, const NumericsConfig& cfg) {
    product.validate();
    model.validate();
    const auto backend = cfg.backend.value_or(default_backend(model));
    check_backend(model, backend);
    const std::size_t degree = cfg.degree.value_or(default_degree(product));
    if (degree < 1) throw ConfigError("numerics.N: degree must be >= 1");
    return {cfg.domain.value_or(default_domain(product, model)), degree, product.dt(), backend};
}

std::vector<std::vector<double>> payoff_expectations(std::span<const ProductSpec> products,
                                                     const ModelSpec& model, const PricingGrid& grid, double dt,
                                                     const NumericsConfig& cfg) {
    const auto nodes = cheb_nodes(grid.domain, grid.degree);
    std::vector<std::vector<double>> out(products.size(), std::vector<double>(nodes.size()));
    switch (grid.backend) {
        case MomentBackend::analytic:
            for (std::size_t p = 0; p < products.size(); ++p)
                for (std::size_t k = 0; k < nodes.size(); ++k)
                    out[p][k] = bs_payoff_expectation(products[p], model, nodes[k], dt);
            break;
        case MomentBackend::fourier: {
            const IncrementDensity density(log_return_cf(model, dt), cfg.fourier);
            for (std::size_t p = 0; p < products.size(); ++p) {
                const auto& prod = products[p];
                for (std::size_t k = 0; k < nodes.size(); ++k) {
                    std::vector<double> breaks{std::log(prod.strike) - nodes[k]};
                    if (prod.is_barrier()) breaks.push_back(prod.log_barrier() - nodes[k]);
                    const double x = nodes[k];
                    out[p][k] = density.integrate([&](double y) { return payoff(prod, x + y); }, density.lo(),
                                                  density.hi(), breaks);
                }
            }
            break;
        }
        case MomentBackend::monte_carlo: {
            std::vector<PayoffFn> fns;
            for (const auto& prod : products) fns.emplace_back([prod](double x) { return payoff(prod, x); });
            out = gamma_mc_with_expectations(grid.domain, grid.degree, model, dt, cfg.m_pre, cfg.seed, fns,
                                             cfg.threads, cfg.cev_substeps)
                      .expectations;
            break;
        }
    }
    return out;
}

Precomputation precompute(std::span<const ProductSpec> products, const ModelSpec& model, const PricingGrid& grid,
                          const NumericsConfig& cfg) {
    model.validate();
    check_backend(model, grid.backend);
    for (const auto& p : products)
        if (std::abs(p.dt() - grid.dt) > 1e-14 * grid.dt)
            throw ConfigError("precompute: product time step differs from the grid time step");

    if (grid.backend == MomentBackend::monte_carlo) {
        std::vector<PayoffFn> fns;
        for (const auto& prod : products) fns.emplace_back([prod](double x) { return payoff(prod, x); });
        auto mc = gamma_mc_with_expectations(grid.domain, grid.degree, model, grid.dt, cfg.m_pre, cfg.seed, fns,
                                             cfg.threads, cfg.cev_substeps);
        return {std::move(mc.gamma), std::move(mc.expectations)};
    }

    std::optional<MomentMatrix> gamma;
    std::filesystem::path cache_file;
    const MomentCacheKey key{model.fingerprint(), grid.domain.lo(), grid.domain.hi(), grid.degree, grid.dt,
                             grid.backend,        0,                0};
    if (!cfg.cache_dir.empty()) {
        cache_file = cfg.cache_dir / (cache_file_stem(key) + ".bin");
        gamma = load_moment_matrix(cache_file, key);
    }
    if (!gamma) {
        if (grid.backend == MomentBackend::analytic) {
            const auto step = conditional_normal_params(model, 0.0, 1.0);
            gamma = gamma_normal(grid.domain, grid.degree, step.mean_shift, step.variance, grid.dt, cfg.threads);
        } else {
            auto fcfg = cfg.fourier;
            fcfg.threads = cfg.threads;
            gamma = gamma_fourier(grid.domain, grid.degree, log_return_cf(model, grid.dt), grid.dt, fcfg);
        }
        if (!cache_file.empty()) {
            std::filesystem::create_directories(cfg.cache_dir);
            save_moment_matrix(cache_file, key, *gamma);
        }
    }
    std::vector<std::vector<double>> terminal;
    if (cfg.smoothing) terminal = payoff_expectations(products, model, grid, grid.dt, cfg);
    return {std::move(*gamma), std::move(terminal)};
}

std::vector<double> smoothing_terminal_step(const ProductSpec& product, const ModelSpec& model,
                                            const ChebDomain& domain, std::size_t degree,
                                            std::span<const double> terminal_expectation) {
    if (terminal_expectation.size() != degree + 1)
        throw ConfigError("smoothing_terminal_step: expectation count does not match the degree");
    const auto nodes = cheb_nodes(domain, degree);
    const double disc = std::exp(-model.r * product.dt());
    const bool exercisable = product.is_bermudan() && product.n_dates >= 2;
    std::vector<double> v(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        double cont = disc * terminal_expectation[k];
        if (product.is_barrier() && nodes[k] > product.log_barrier()) cont = 0.0;
        v[k] = exercisable ? std::max(payoff(product, nodes[k]), cont) : cont;
    }
    return v;
}

std::vector<DCSolution> backward_induction(std::span<const ProductSpec> products, const ModelSpec& model,
                                           const Precomputation& pre, bool smoothing) {
    const auto& gamma = pre.gamma;
    const auto& domain = gamma.domain();
    const std::size_t degree = gamma.degree();
    const auto nodes = cheb_nodes(domain, degree);
    if (smoothing && pre.terminal.size() != products.size())
        throw ConfigError("backward_induction: smoothing needs one terminal expectation per product");

    std::vector<DCSolution> out;
    out.reserve(products.size());
    for (std::size_t p = 0; p < products.size(); ++p) {
        const auto& prod = products[p];
        prod.validate();
        if (std::abs(prod.dt() - gamma.dt()) > 1e-14 * gamma.dt())
            throw ConfigError("backward_induction: Gamma was built for dt = " + std::to_string(gamma.dt()) +
                              ", product needs " + std::to_string(prod.dt()));
        const std::size_t n = prod.n_dates;
        DCSolution sol{prod, domain, model.r, prod.dt(), std::exp(-model.r * prod.dt()), uniform_grid(prod.maturity, n),
                       {}, {}, smoothing};
        std::vector<ChebPoly> values(n + 1, ChebPoly(domain, {0.0}));
        std::vector<ChebPoly> conts(n, ChebPoly(domain, {0.0}));

        std::vector<double> nodal(nodes.size());
        for (std::size_t k = 0; k < nodes.size(); ++k) nodal[k] = payoff(prod, nodes[k]);
        values[n] = ChebPoly::interpolate(domain, nodal);

        const double lb = prod.is_barrier() ? prod.log_barrier() : std::numeric_limits<double>::infinity();
        std::size_t u = n;
        if (smoothing) {
            std::vector<double> cont(nodes.size());
            for (std::size_t k = 0; k < nodes.size(); ++k) cont[k] = sol.discount * pre.terminal[p][k];
            check_finite(cont, prod, n - 1, domain);
            conts[n - 1] = ChebPoly::interpolate(domain, cont);
            values[n - 1] = ChebPoly::interpolate(
                domain, smoothing_terminal_step(prod, model, domain, degree, pre.terminal[p]));
            u = n - 1;
        }
        while (u-- > 0) {
            auto cont = gamma.apply(values[u + 1].coeffs());
            for (double& c : cont) c *= sol.discount;
            check_finite(cont, prod, u, domain);
            std::vector<double> val(cont);
            for (std::size_t k = 0; k < nodes.size(); ++k) {
                if (nodes[k] > lb) val[k] = 0.0;
                if (prod.is_bermudan() && u >= 1) val[k] = std::max(payoff(prod, nodes[k]), val[k]);
            }
            conts[u] = ChebPoly::interpolate(domain, cont);
            values[u] = ChebPoly::interpolate(domain, val);
        }
        sol.value_polys = std::move(values);
        sol.continuation_polys = std::move(conts);
        out.push_back(std::move(sol));
    }
    return out;
}

DCSolution backward_induction(const ProductSpec& product, const ModelSpec& model, const Precomputation& pre,
                              bool smoothing) {
    return std::move(backward_induction(std::span<const ProductSpec>(&product, 1), model, pre, smoothing).front());
}

std::vector<DCSolution> solve(std::span<const ProductSpec> products, const ModelSpec& model,
                              const NumericsConfig& cfg, PhaseTimes* times) {
    if (products.empty()) throw ConfigError("solve: no products");
    std::vector<PricingGrid> grids;
    for (const auto& p : products) grids.push_back(resolve_grid(p, model, cfg));

    std::vector<std::optional<DCSolution>> results(products.size());
    std::vector<bool> done(products.size(), false);
    for (std::size_t i = 0; i < products.size(); ++i) {
        if (done[i]) continue;
        std::vector<std::size_t> group;
        std::vector<ProductSpec> members;
        for (std::size_t j = i; j < products.size(); ++j) {
            const auto& a = grids[i];
            const auto& b = grids[j];
            if (!done[j] && a.domain == b.domain && a.degree == b.degree && a.dt == b.dt && a.backend == b.backend) {
                group.push_back(j);
                members.push_back(products[j]);
                done[j] = true;
            }
        }
        auto start = std::chrono::steady_clock::now();
        const auto pre = precompute(members, model, grids[i], cfg);
        if (times) times->precompute += seconds_since(start);
        start = std::chrono::steady_clock::now();
        auto sols = backward_induction(members, model, pre, cfg.smoothing);
        if (times) times->stepping += seconds_since(start);
        for (std::size_t g = 0; g < group.size(); ++g) results[group[g]] = std::move(sols[g]);
    }
    std::vector<DCSolution> out;
    for (auto& r : results) out.push_back(std::move(*r));
    return out;
}

DCSolution solve(const ProductSpec& product, const ModelSpec& model, const NumericsConfig& cfg) {
    return std::move(solve(std::span<const ProductSpec>(&product, 1), model, cfg).front());
}

double price(const DCSolution& sol, std::size_t date, double x) {
    const auto& prod = sol.product;
    if (date >= sol.value_polys.size())
        throw DomainError("price: date index " + std::to_string(date) + " beyond maturity");
    if (date + 1 == sol.value_polys.size()) return payoff(prod, x);
    if (prod.is_barrier() && x > prod.log_barrier()) return 0.0;
    if (!sol.domain.contains(x)) return extension_value(prod, sol.r, sol.domain, x, sol.dates[date]);
    return sol.value_polys[date](x);
}

namespace {

void require_interior(const DCSolution& sol, std::size_t date, double x) {
    if (date >= sol.value_polys.size()) throw DomainError("Greek: date index beyond maturity");
    if (!(x > sol.domain.lo() && x < sol.domain.hi()))
        throw DomainError("Greek: x = " + std::to_string(x) + " is not strictly inside the domain");
}

}  // namespace

double delta(const DCSolution& sol, std::size_t date, double x) {
    require_interior(sol, date, x);
    return sol.value_polys[date].derivative()(x);
}

double gamma_greek(const DCSolution& sol, std::size_t date, double x) {
    require_interior(sol, date, x);
    return sol.value_polys[date].derivative().derivative()(x);
}

double delta_spot(const DCSolution& sol, std::size_t date, double spot) {
    return delta(sol, date, std::log(spot)) / spot;
}

double gamma_spot(const DCSolution& sol, std::size_t date, double spot) {
    const double x = std::log(spot);
    return (gamma_greek(sol, date, x) - delta(sol, date, x)) / (spot * spot);
}

void save_solution_json(const DCSolution& sol, const std::filesystem::path& file) {
    nlohmann::json j;
    j["product"] = std::string(to_string(sol.product.kind));
    j["domain"] = {sol.domain.lo(), sol.domain.hi()};
    j["r"] = sol.r;
    j["dt"] = sol.dt;
    j["discount"] = sol.discount;
    j["dates"] = sol.dates;
    auto polys = [](const std::vector<ChebPoly>& ps) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& p : ps) a.push_back(std::vector<double>(p.coeffs().begin(), p.coeffs().end()));
        return a;
    };
    j["value_coeffs"] = polys(sol.value_polys);
    j["continuation_coeffs"] = polys(sol.continuation_polys);
    std::ofstream os(file);
    if (!os) throw std::runtime_error("cannot open " + file.string());
    os << j.dump(1);
}

}  // namespace chebex

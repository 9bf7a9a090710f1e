#include "chebex/exposure.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "chebex/error.hpp"
#include "chebex/parallel.hpp"

namespace chebex {

namespace {

constexpr double kExerciseTieTolerance = 1e-10;

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool same_time(double a, double b, double scale) { return std::abs(a - b) <= 1e-12 * std::max(1.0, scale); }

}  // namespace

std::string_view to_string(ExposureGrid g) { return g == ExposureGrid::daily ? "daily" : "exercise"; }

ExposureGrid parse_exposure_grid(std::string_view s) {
    if (s == "exercise") return ExposureGrid::exercise;
    if (s == "daily") return ExposureGrid::daily;
    throw ConfigError("exposure.grid: expected 'exercise' or 'daily', got '" + std::string(s) + "'");
}

std::vector<ValuationSlice> valuation_slices(const DCSolution& sol, const ModelSpec& model,
                                             const NumericsConfig& cfg, std::span<const double> grid) {
    const auto& prod = sol.product;
    const double T = prod.maturity;
    const std::size_t n = prod.n_dates;
    if (grid.empty() || grid.front() != 0.0) throw ConfigError("valuation_slices: grid must start at 0");
    if (grid.back() > T * (1.0 + 1e-12)) throw ConfigError("valuation_slices: grid extends beyond maturity");

    const std::size_t degree = sol.value_polys.front().degree();
    std::map<double, MomentMatrix> fractional;
    std::optional<PricingGrid> pgrid;

    std::vector<ValuationSlice> out;
    out.reserve(grid.size());
    std::size_t next = 0;
    for (double t : grid) {
        while (next <= n && sol.dates[next] < t && !same_time(sol.dates[next], t, T)) ++next;
        ValuationSlice s;
        s.t = t;
        if (next <= n && same_time(sol.dates[next], t, T)) {
            s.value = sol.value_polys[next];
            s.monitoring = next >= 1;
            s.maturity = next == n;
            if (prod.is_bermudan() && next >= 1 && next < n) s.continuation = sol.continuation_polys[next];
            out.push_back(std::move(s));
            continue;
        }
        if (!pgrid) {
            pgrid = resolve_grid(prod, model, cfg);
            if (pgrid->backend == MomentBackend::monte_carlo)
                throw ConfigError(
                    "exposure.grid: dates between exercise dates need the analytic or fourier backend");
            pgrid->domain = sol.domain;
            pgrid->degree = degree;
        }
        const double rem = sol.dates[next] - t;
        const double disc = std::exp(-model.r * rem);
        std::vector<double> nodal;
        if (next == n && sol.smoothing) {
            nodal = payoff_expectations(std::span<const ProductSpec>(&prod, 1), model, *pgrid, rem, cfg).front();
        } else {
            auto it = fractional.find(rem);
            if (it == fractional.end()) {
                MomentMatrix g = [&] {
                    if (pgrid->backend == MomentBackend::analytic) {
                        const auto step = conditional_normal_params(model, 0.0, 1.0);
                        return gamma_normal(sol.domain, degree, step.mean_shift, step.variance, rem, cfg.threads);
                    }
                    auto fcfg = cfg.fourier;
                    fcfg.threads = cfg.threads;
                    return gamma_fourier(sol.domain, degree, log_return_cf(model, rem), rem, fcfg);
                }();
                it = fractional.emplace(rem, std::move(g)).first;
            }
            nodal = it->second.apply(sol.value_polys[next].coeffs());
        }
        for (double& v : nodal) v *= disc;
        s.value = ChebPoly::interpolate(sol.domain, nodal);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<ExposureMatrix> path_exposures(std::span<const DCSolution> sols,
                                           std::span<const std::vector<ValuationSlice>> slices,
                                           const PathSet& paths, unsigned threads) {
    if (sols.size() != slices.size()) throw ConfigError("path_exposures: one slice set per solution required");
    if (paths.paths == 0) throw ConfigError("path_exposures: no paths");
    const std::size_t dates = paths.dates();
    for (const auto& sl : slices) {
        if (sl.size() != dates)
            throw ConfigError("path_exposures: path grid has " + std::to_string(dates) + " dates, valuation has " +
                              std::to_string(sl.size()));
        for (std::size_t u = 0; u < dates; ++u)
            if (!same_time(sl[u].t, paths.grid[u], paths.grid.back()))
                throw ConfigError("path_exposures: path grid does not match valuation dates at index " +
                                  std::to_string(u));
    }

    // Products with identical domain and degree share one basis evaluation.
    std::vector<std::size_t> group(sols.size());
    std::vector<std::pair<ChebDomain, std::size_t>> groups;
    for (std::size_t p = 0; p < sols.size(); ++p) {
        const std::pair<ChebDomain, std::size_t> key{sols[p].domain, sols[p].value_polys.front().degree()};
        auto it = std::find(groups.begin(), groups.end(), key);
        group[p] = static_cast<std::size_t>(it - groups.begin());
        if (it == groups.end()) groups.push_back(key);
    }

    std::vector<ExposureMatrix> out(sols.size());
    for (auto& em : out) {
        em.paths = paths.paths;
        em.dates = dates;
        em.e.assign(paths.paths * dates, 0.0);
        em.alive.assign(paths.paths * dates, 0);
    }

    parallel_for(paths.paths, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<std::vector<double>> basis(groups.size());
        for (std::size_t g = 0; g < groups.size(); ++g) basis[g].resize(groups[g].second + 1);
        std::vector<char> inside(groups.size());
        std::vector<char> alive(sols.size());
        for (std::size_t i = begin; i < end; ++i) {
            std::fill(alive.begin(), alive.end(), 1);
            for (std::size_t u = 0; u < dates; ++u) {
                const double x = paths(i, u);
                for (std::size_t g = 0; g < groups.size(); ++g) {
                    inside[g] = groups[g].first.contains(x);
                    if (inside[g]) chebyshev_basis(groups[g].first.to_unit(x), basis[g]);
                }
                for (std::size_t p = 0; p < sols.size(); ++p) {
                    const auto& sol = sols[p];
                    const auto& prod = sol.product;
                    const auto& s = slices[p][u];
                    const std::size_t idx = i * dates + u;
                    auto& em = out[p];
                    if (!alive[p]) continue;
                    if (prod.is_barrier() && s.monitoring && x > prod.log_barrier()) {
                        alive[p] = 0;
                        continue;
                    }
                    em.alive[idx] = 1;
                    if (s.maturity) {
                        em.e[idx] = std::max(payoff(prod, x), 0.0);
                        continue;
                    }
                    const auto g = group[p];
                    if (s.continuation) {
                        const double pay = payoff(prod, x);
                        double cont;
                        if (inside[g])
                            cont = s.continuation->dot(basis[g]);
                        else
                            cont = x < sol.domain.lo() ? -std::numeric_limits<double>::infinity() : 0.0;
                        if (pay > 0.0 && pay >= cont - kExerciseTieTolerance) {
                            em.e[idx] = pay;
                            em.alive[idx] = 0;
                            alive[p] = 0;
                            continue;
                        }
                    }
                    double v;
                    if (prod.is_barrier() && x > prod.log_barrier())
                        v = 0.0;
                    else if (inside[g])
                        v = s.value.dot(basis[g]);
                    else
                        v = extension_value(prod, sol.r, sol.domain, x, s.t);
                    em.e[idx] = std::max(v, 0.0);
                }
            }
        }
    });
    return out;
}

ExposureMatrix path_exposures(const DCSolution& sol, const PathSet& paths, unsigned threads) {
    if (paths.dates() != sol.dates.size())
        throw ConfigError("path_exposures: path grid has " + std::to_string(paths.dates()) +
                          " dates, solution has " + std::to_string(sol.dates.size()));
    std::vector<std::vector<ValuationSlice>> slices(1);
    for (std::size_t u = 0; u < sol.dates.size(); ++u) {
        ValuationSlice s;
        s.t = sol.dates[u];
        s.value = sol.value_polys[u];
        s.monitoring = u >= 1;
        s.maturity = u + 1 == sol.dates.size();
        if (sol.product.is_bermudan() && u >= 1 && !s.maturity) s.continuation = sol.continuation_polys[u];
        slices[0].push_back(std::move(s));
    }
    return std::move(path_exposures(std::span<const DCSolution>(&sol, 1), slices, paths, threads).front());
}

std::vector<double> expected_exposure(const ExposureMatrix& em) {
    if (em.paths == 0) throw ConfigError("expected_exposure: no paths");
    std::vector<double> ee(em.dates);
    for (std::size_t u = 0; u < em.dates; ++u) {
        double sum = 0.0;
        double comp = 0.0;
        for (std::size_t i = 0; i < em.paths; ++i) {
            const double v = em(i, u);
            const double t = sum + v;
            comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
            sum = t;
        }
        ee[u] = (sum + comp) / static_cast<double>(em.paths);
    }
    return ee;
}

std::vector<double> pfe(const ExposureMatrix& em, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("exposure.alpha: must lie in (0, 1]");
    if (em.paths == 0) throw ConfigError("pfe: no paths");
    const double m = static_cast<double>(em.paths);
    auto k = static_cast<std::size_t>(std::ceil(alpha * m));
    // Guard against alpha * M landing just above an integer through rounding.
    if (k > 1 && static_cast<double>(k - 1) / m >= alpha) --k;
    k = std::clamp<std::size_t>(k, 1, em.paths);
    std::vector<double> out(em.dates);
    std::vector<double> col(em.paths);
    for (std::size_t u = 0; u < em.dates; ++u) {
        for (std::size_t i = 0; i < em.paths; ++i) col[i] = em(i, u);
        std::nth_element(col.begin(), col.begin() + static_cast<std::ptrdiff_t>(k - 1), col.end());
        out[u] = col[k - 1];
    }
    return out;
}

std::vector<double> exposure_grid(std::span<const ProductSpec> products, const ExposureConfig& cfg) {
    if (products.empty()) throw ConfigError("exposure_grid: no products");
    const double T = products.front().maturity;
    std::vector<double> grid;
    for (const auto& p : products) {
        if (!same_time(p.maturity, T, T)) throw ConfigError("exposure: products must share one maturity");
        const auto g = uniform_grid(p.maturity, p.n_dates);
        grid.insert(grid.end(), g.begin(), g.end());
    }
    if (cfg.grid == ExposureGrid::daily) {
        if (cfg.days_per_year == 0) throw ConfigError("exposure.days_per_year: must be >= 1");
        const auto days = static_cast<std::size_t>(std::llround(T * static_cast<double>(cfg.days_per_year)));
        const auto g = uniform_grid(T, std::max<std::size_t>(days, 1));
        grid.insert(grid.end(), g.begin(), g.end());
    }
    std::sort(grid.begin(), grid.end());
    std::vector<double> out;
    for (double t : grid)
        if (out.empty() || !same_time(out.back(), t, T)) out.push_back(t);
    out.back() = T;
    return out;
}

ExposureRun run_exposure(std::span<const ProductSpec> products, const ModelSpec& model, const NumericsConfig& num,
                         const SimulationConfig& sim, const ExposureConfig& exp) {
    if (sim.paths == 0) throw ConfigError("simulation.paths: must be >= 1");
    if (!(sim.spot > 0.0)) throw ConfigError("model.S0: spot must be > 0");
    if (!(exp.alpha > 0.0 && exp.alpha <= 1.0)) throw ConfigError("exposure.alpha: must lie in (0, 1]");
    const auto total_start = std::chrono::steady_clock::now();
    const auto grid = exposure_grid(products, exp);
    const double x0 = std::log(sim.spot);

    ExposureRun run;
    auto start = std::chrono::steady_clock::now();
    const auto paths = simulate_paths(model, sim.measure, x0, grid, sim.paths, sim.seed, num.threads, num.cev_substeps);
    run.timings.simulation = seconds_since(start);

    PhaseTimes phases;
    run.solutions = solve(products, model, num, &phases);
    run.timings.precompute = phases.precompute;
    run.timings.stepping = phases.stepping;

    start = std::chrono::steady_clock::now();
    std::vector<std::vector<ValuationSlice>> slices;
    for (const auto& sol : run.solutions) slices.push_back(valuation_slices(sol, model, num, grid));
    run.timings.precompute += seconds_since(start);

    start = std::chrono::steady_clock::now();
    const auto ems = path_exposures(run.solutions, slices, paths, num.threads);
    for (std::size_t p = 0; p < products.size(); ++p) {
        ExposureProfile prof;
        prof.product = products[p];
        prof.grid = grid;
        prof.ee = expected_exposure(ems[p]);
        prof.pfe = pfe(ems[p], exp.alpha);
        prof.alpha = exp.alpha;
        prof.price_t0 = price(run.solutions[p], 0, x0);
        prof.paths = sim.paths;
        prof.seed = sim.seed;
        run.profiles.push_back(std::move(prof));
    }
    run.timings.stepping += seconds_since(start);
    run.timings.total = seconds_since(total_start);
    return run;
}

ExposureProfile run_exposure(const ProductSpec& product, const ModelSpec& model, const NumericsConfig& num,
                             const SimulationConfig& sim, const ExposureConfig& exp) {
    return std::move(run_exposure(std::span<const ProductSpec>(&product, 1), model, num, sim, exp).profiles.front());
}

}  // namespace chebex

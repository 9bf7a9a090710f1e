#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "chebex/error.hpp"
#include "chebex/exposure.hpp"

using namespace chebex;

namespace {

ExposureMatrix filled(std::size_t paths, std::size_t dates, std::vector<double> e) {
    ExposureMatrix m;
    m.paths = paths;
    m.dates = dates;
    m.e = std::move(e);
    m.alive.assign(paths * dates, 1);
    return m;
}

PathSet single_path(std::vector<double> x) {
    PathSet p;
    p.paths = 1;
    p.grid = uniform_grid(1.0, x.size() - 1);
    p.values = std::move(x);
    return p;
}

}  // namespace

TEST(ExpectedExposure, Examples) {
    const auto c = filled(3, 2, std::vector<double>(6, 5.0));
    EXPECT_EQ(expected_exposure(c), (std::vector<double>{5.0, 5.0}));
    const auto h = filled(2, 1, {0.0, 1.0});
    EXPECT_EQ(expected_exposure(h)[0], 0.5);
}

TEST(Pfe, OrderStatistic) {
    std::vector<double> e(100);
    for (int i = 0; i < 100; ++i) e[i] = 100.0 - i;
    const auto m = filled(100, 1, e);
    EXPECT_EQ(pfe(m, 0.975)[0], 98.0);
    EXPECT_EQ(pfe(m, 1.0)[0], 100.0);
    EXPECT_EQ(pfe(m, 0.5)[0], 50.0);
    const auto c = filled(7, 1, std::vector<double>(7, 3.25));
    for (double a : {0.01, 0.5, 0.9, 1.0}) EXPECT_EQ(pfe(c, a)[0], 3.25);
    EXPECT_THROW(pfe(m, 0.0), ConfigError);
    EXPECT_THROW(pfe(m, 1.5), ConfigError);
}

TEST(PathExposures, BarrierKnockOut) {
    NumericsConfig cfg;
    cfg.domain = ChebDomain(std::log(10.0), std::log(150.0));
    const auto sol = solve(barrier_up_out_call(100.0, 150.0, 1.0, 6), reference_black_scholes(), cfg);
    const double x = std::log(120.0);
    const auto em = path_exposures(sol, single_path({std::log(100.0), x, x, std::log(160.0), x, x, x}));
    EXPECT_GT(em(0, 2), 0.0);
    EXPECT_TRUE(em.is_alive(0, 2));
    for (std::size_t u = 3; u <= 6; ++u) {
        EXPECT_EQ(em(0, u), 0.0);
        EXPECT_FALSE(em.is_alive(0, u));
    }
}

TEST(PathExposures, BermudanForcedExercise) {
    const auto sol = solve(bermudan_put(100.0, 1.0, 6), reference_black_scholes());
    const double x = std::log(100.0);
    const auto em = path_exposures(sol, single_path({x, std::log(20.0), x, x, x, x, x}));
    EXPECT_NEAR(em(0, 1), 80.0, 1e-9);
    for (std::size_t u = 2; u <= 6; ++u) EXPECT_EQ(em(0, u), 0.0);
}

TEST(PathExposures, GridMismatchRejected) {
    const auto sol = solve(bermudan_put(100.0, 1.0, 6), reference_black_scholes());
    PathSet p;
    p.paths = 1;
    p.grid = uniform_grid(1.0, 5);
    p.values.assign(6, std::log(100.0));
    EXPECT_THROW(path_exposures(sol, p), ConfigError);
}

TEST(RunExposure, BermudanProfileProperties) {
    SimulationConfig sim;
    sim.paths = 20000;
    const auto prof = run_exposure(bermudan_put(), reference_black_scholes(), {}, sim);
    ASSERT_EQ(prof.ee.size(), 53u);
    EXPECT_NEAR(prof.ee[0], 8.66, 0.02);
    EXPECT_NEAR(prof.ee[0], prof.price_t0, 1e-10);
    for (std::size_t u = 0; u < prof.ee.size(); ++u) {
        EXPECT_GE(prof.ee[u], 0.0);
        EXPECT_GE(prof.pfe[u], 0.0);
    }
    EXPECT_LT(prof.ee[52], prof.ee[40]);
}

TEST(RunExposure, Determinism) {
    SimulationConfig sim;
    sim.paths = 3000;
    const auto a = run_exposure(bermudan_put(), reference_merton(), {}, sim);
    const auto b = run_exposure(bermudan_put(), reference_merton(), {}, sim);
    EXPECT_EQ(a.ee, b.ee);
    EXPECT_EQ(a.pfe, b.pfe);
}

TEST(RunExposure, ZeroPathsRejected) {
    SimulationConfig sim;
    sim.paths = 0;
    EXPECT_THROW(run_exposure(european_put(), reference_black_scholes(), {}, sim), ConfigError);
}

TEST(RunExposure, DailyGrid) {
    SimulationConfig sim;
    sim.paths = 2000;
    ExposureConfig exp;
    exp.grid = ExposureGrid::daily;
    const auto prod = bermudan_put();
    const auto grid = exposure_grid(std::span<const ProductSpec>(&prod, 1), exp);
    EXPECT_EQ(grid.front(), 0.0);
    EXPECT_EQ(grid.back(), 1.0);
    EXPECT_GE(grid.size(), 253u);
    for (std::size_t u = 1; u < grid.size(); ++u) ASSERT_GT(grid[u], grid[u - 1]);
    const auto prof = run_exposure(prod, reference_black_scholes(), {}, sim, exp);
    EXPECT_EQ(prof.grid, grid);
    EXPECT_NEAR(prof.ee[0], 8.66, 0.02);
}

TEST(RunExposure, SharedPathsDominance) {
    SimulationConfig sim;
    sim.paths = 20000;
    NumericsConfig num;
    const std::vector<ProductSpec> prods{european_call(), barrier_up_out_call(100.0, 150.0)};
    const auto run = run_exposure(prods, reference_black_scholes(), num, sim, {});
    for (std::size_t u = 0; u < run.profiles[0].ee.size(); ++u) {
        EXPECT_LE(run.profiles[1].ee[u], run.profiles[0].ee[u]) << u;
        EXPECT_LE(run.profiles[1].pfe[u], 50.0 + 1e-9) << u;
    }
}

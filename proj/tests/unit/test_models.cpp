#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "chebex/error.hpp"
#include "chebex/models.hpp"

using namespace chebex;

namespace {

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::vector<double> column(const PathSet& p, std::size_t u) {
    std::vector<double> c(p.paths);
    for (std::size_t i = 0; i < p.paths; ++i) c[i] = p(i, u);
    return c;
}

}  // namespace

TEST(ModelSpec, ReferenceDefaults) {
    const auto bs = reference_black_scholes();
    EXPECT_EQ(bs.sigma, 0.25);
    EXPECT_EQ(bs.mu, 0.1);
    EXPECT_EQ(bs.r, 0.03);
    const auto m = reference_merton();
    EXPECT_EQ(m.jump_intensity, 0.4);
    EXPECT_EQ(m.jump_mean, -0.5);
    EXPECT_EQ(m.jump_std, 0.4);
    const auto c = reference_cev();
    EXPECT_EQ(c.sigma, 0.3);
    EXPECT_EQ(c.cev_exponent, 1.5);
}

TEST(ModelSpec, Validation) {
    EXPECT_THROW(black_scholes(0.0, 0.1, 0.03).validate(), ConfigError);
    EXPECT_THROW(merton(0.2, 0.1, 0.03, -1.0, 0.0, 0.1).validate(), ConfigError);
    EXPECT_THROW(cev(0.3, 0.1, 0.03, 0.0).validate(), ConfigError);
    EXPECT_NO_THROW(reference_merton().validate());
    EXPECT_NE(reference_black_scholes().fingerprint(), reference_merton().fingerprint());
}

TEST(MertonCf, Basics) {
    const auto m = reference_merton();
    const auto one = merton_cf({0.0, 0.0}, 0.7, m);
    EXPECT_NEAR(one.real(), 1.0, 1e-15);
    EXPECT_NEAR(one.imag(), 0.0, 1e-15);

    const auto bs = merton(0.25, 0.1, 0.03, 0.0, -0.5, 0.4);
    const double t = 0.5, s2 = 0.0625;
    for (double z : {-3.0, 0.4, 2.5, 10.0}) {
        const std::complex<double> i(0.0, 1.0);
        const auto want = std::exp(t * (i * (0.03 - s2 / 2) * z - s2 * z * z / 2));
        EXPECT_NEAR(std::abs(merton_cf(z, t, bs) - want), 0.0, 1e-14);
    }
}

TEST(MertonCf, MeanByFiniteDifference) {
    const auto m = reference_merton();
    const double t = 1.0 / 52.0, h = 1e-5;
    const auto d = (merton_cf(h, t, m) - merton_cf(-h, t, m)) / (2.0 * h);
    const double b = m.r - 0.5 * m.sigma * m.sigma - m.jump_intensity * m.jump_compensator();
    EXPECT_NEAR(d.imag(), (b + m.jump_intensity * m.jump_mean) * t, 1e-8);
}

TEST(ConditionalNormal, Formula) {
    const auto bs = black_scholes(0.25, 0.1, 0.03);
    const auto p = conditional_normal_params(bs, std::log(100.0), 1.0 / 52.0);
    EXPECT_NEAR(p.mean_shift, (0.03 - 0.03125) / 52.0, 1e-17);
    EXPECT_NEAR(p.variance, 0.0625 / 52.0, 1e-17);
    const auto z = conditional_normal_params(bs, 1.0, 0.0);
    EXPECT_EQ(z.mean_shift, 0.0);
    EXPECT_EQ(z.variance, 0.0);
}

TEST(SimulatePaths, ZeroVolatility) {
    const auto bs = black_scholes(1e-12, 0.1, 0.03);
    const auto grid = uniform_grid(1.0, 4);
    const auto p = simulate_paths(bs, Measure::P, std::log(100.0), grid, 10, 5);
    for (std::size_t i = 0; i < p.paths; ++i)
        for (std::size_t u = 0; u < grid.size(); ++u) EXPECT_NEAR(p(i, u), std::log(100.0) + 0.1 * grid[u], 1e-10);
}

TEST(SimulatePaths, Determinism) {
    const auto grid = uniform_grid(1.0, 12);
    for (const auto& m : {reference_black_scholes(), reference_merton(), reference_cev()}) {
        const auto a = simulate_paths(m, Measure::P, std::log(100.0), grid, 500, 11, 1);
        const auto b = simulate_paths(m, Measure::P, std::log(100.0), grid, 500, 11, 4);
        const auto c = simulate_paths(m, Measure::P, std::log(100.0), grid, 500, 12, 1);
        EXPECT_EQ(a, b);
        EXPECT_NE(a.values, c.values);
        for (std::size_t i = 0; i < a.paths; ++i) EXPECT_EQ(a(i, 0), std::log(100.0));
        for (double v : a.values) ASSERT_TRUE(std::isfinite(v));
    }
}

TEST(SimulatePaths, Preconditions) {
    const auto grid = uniform_grid(1.0, 4);
    const auto m = reference_black_scholes();
    EXPECT_THROW(simulate_paths(m, Measure::P, 0.0, grid, 0, 1), ConfigError);
    EXPECT_THROW(simulate_paths(m, Measure::P, 0.0, std::vector<double>{}, 5, 1), ConfigError);
    EXPECT_THROW(simulate_paths(m, Measure::P, 0.0, std::vector<double>{0.0, 0.5, 0.4}, 5, 1), ConfigError);
}

TEST(SimulatePaths, BlackScholesTerminalMean) {
    const auto m = reference_black_scholes();
    const std::vector<double> grid{0.0, 1.0};
    const std::size_t n = 1000000;
    const auto p = simulate_paths(m, Measure::P, std::log(100.0), grid, n, 3);
    const auto x = column(p, 1);
    const double want = std::log(100.0) + (m.mu - 0.5 * m.sigma * m.sigma);
    EXPECT_NEAR(mean(x), want, 4.0 * stddev(x) / std::sqrt(double(n)));
}

TEST(SimulatePaths, DiscountedPriceIsMartingaleUnderQ) {
    const auto m = reference_black_scholes();
    const auto grid = uniform_grid(1.0, 8);
    const std::size_t n = 100000;
    const auto p = simulate_paths(m, Measure::Q, std::log(100.0), grid, n, 17);
    for (std::size_t u = 1; u < grid.size(); ++u) {
        auto s = column(p, u);
        for (double& v : s) v = std::exp(v - m.r * grid[u]);
        EXPECT_NEAR(mean(s), 100.0, 3.0 * stddev(s) / std::sqrt(double(n))) << u;
    }
}

TEST(SimulatePaths, MertonCompensatorUnderQ) {
    const auto m = reference_merton();
    const std::vector<double> grid{0.0, 1.0};
    const std::size_t n = 400000;
    const auto p = simulate_paths(m, Measure::Q, std::log(100.0), grid, n, 23);
    auto s = column(p, 1);
    for (double& v : s) v = std::exp(v - m.r);
    EXPECT_NEAR(mean(s), 100.0, 4.0 * stddev(s) / std::sqrt(double(n)));
}

TEST(SimulatePaths, CevWithExponentTwoMatchesBlackScholes) {
    const auto c = cev(0.25, 0.1, 0.03, 2.0);
    const auto b = black_scholes(0.25, 0.1, 0.03);
    const std::vector<double> grid{0.0, 1.0};
    const std::size_t n = 100000;
    auto x = column(simulate_paths(c, Measure::Q, std::log(100.0), grid, n, 5, 0, 64), 1);
    auto y = column(simulate_paths(b, Measure::Q, std::log(100.0), grid, n, 6), 1);
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < n && j < n) {
        if (x[i] <= y[j]) ++i;
        else ++j;
        d = std::max(d, std::abs(double(i) - double(j)) / double(n));
    }
    // Two-sample critical value at the 1% level.
    EXPECT_LT(d, 1.628 * std::sqrt(2.0 / double(n)));
}

TEST(SimulatePaths, CevPriceFloor) {
    const auto c = cev(3.0, 0.0, 0.0, 1.0);
    const auto p = simulate_paths(c, Measure::Q, std::log(1.0), uniform_grid(1.0, 10), 2000, 9);
    for (double v : p.values) ASSERT_FALSE(std::isnan(v));
}

TEST(PathSet, BinaryRoundTrip) {
    const auto p = simulate_paths(reference_merton(), Measure::P, std::log(100.0), uniform_grid(1.0, 5), 37, 8);
    const auto file = std::filesystem::temp_directory_path() / "chebex_paths_roundtrip.bin";
    save_paths_binary(p, file);
    EXPECT_EQ(load_paths_binary(file), p);
    std::filesystem::remove(file);
}

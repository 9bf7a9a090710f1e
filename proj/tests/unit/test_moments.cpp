#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "chebex/error.hpp"
#include "chebex/moments.hpp"
#include "chebex/rng.hpp"
#include "oracles.hpp"

using namespace chebex;

namespace {

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

const ChebDomain kRefDomain(std::log(0.2), std::log(350.0));

}  // namespace

TEST(TruncatedMoments, StandardNormalMass) {
    const auto m = truncated_cheb_moments(0.0, 1.0, 10);
    EXPECT_NEAR(m.moments[0], 0.682689492137086, 1e-12);
    EXPECT_NEAR(m.moments[1], 0.0, 1e-15);
}

TEST(TruncatedMoments, FirstMomentVanishesAtZeroMean) {
    for (double s : {0.01, 0.3, 2.0, 40.0}) EXPECT_NEAR(truncated_cheb_moments(0.0, s, 5).moments[1], 0.0, 1e-15);
}

TEST(TruncatedMoments, SecondMomentAgainstQuadrature) {
    const auto m = truncated_cheb_moments(0.3, 0.5, 4);
    const auto q = oracle::moments_quadrature(0.3, 0.5, 4);
    EXPECT_NEAR(m.moments[2], q[2], 1e-13);
}

TEST(TruncatedMoments, RecursionMatchesQuadratureOnGrid) {
    double worst = 0.0;
    for (double mu : {-3.0, -1.0, 0.0, 0.3, 1.0, 3.0})
        for (double s : {0.01, 0.1, 0.5, 1.0, 2.0}) {
            const auto m = truncated_cheb_moments(mu, s, 200);
            const auto q = oracle::moments_quadrature(mu, s, 200);
            const double e = max_abs_diff(m.moments, q);
            EXPECT_LT(e, 1e-9) << "mu=" << mu << " sigma=" << s;
            worst = std::max(worst, e);
        }
    RecordProperty("max_error", std::to_string(worst));
}

TEST(TruncatedMoments, DerivativeMomentsAgainstQuadrature) {
    for (double mu : {-0.7, 0.0, 0.3, 1.5})
        for (double s : {0.05, 0.5, 1.0}) {
            const auto m = truncated_cheb_moments(mu, s, 51);
            const auto q = oracle::derivative_moments_quadrature(mu, s, 51);
            for (std::size_t j = 0; j <= 51; ++j) EXPECT_NEAR(m.deriv_moments[j], q[j], 1e-8) << j;
        }
}

TEST(TruncatedMoments, DegenerateLimit) {
    for (double mu : {-0.8, -0.1, 0.45, 0.9}) {
        const auto m = truncated_cheb_moments(mu, 1e-6, 30);
        for (std::size_t j = 0; j <= 30; ++j) EXPECT_NEAR(m.moments[j], std::cos(j * std::acos(mu)), 1e-6) << j;
    }
}

TEST(TruncatedMoments, ForwardMarchingAgreesForSmallSigma) {
    const auto banded = truncated_cheb_moments(0.2, 0.02, 60).moments;
    const auto fwd = truncated_cheb_moments_forward(0.2, 0.02, 60);
    EXPECT_LT(max_abs_diff(banded, fwd), 1e-9);
}

TEST(TruncatedMoments, BoundedByMass) {
    const auto m = truncated_cheb_moments(0.4, 0.7, 120);
    EXPECT_GE(m.moments[0], 0.0);
    EXPECT_LE(m.moments[0], 1.0);
    for (double v : m.moments) EXPECT_LE(std::abs(v), m.moments[0] + 1e-12);
}

TEST(TruncatedMoments, InvalidSigma) { EXPECT_THROW(truncated_cheb_moments(0.0, 0.0, 5), ConfigError); }

TEST(GammaRowNormal, IdentityDomain) {
    const ChebDomain id(-1.0, 1.0);
    const double x = 0.2, drift = 0.5, var = 0.09, dt = 0.5;
    const auto row = gamma_row_normal(id, 12, x, drift, var, dt);
    const auto m = truncated_cheb_moments(x + dt * drift, std::sqrt(dt * var), 12);
    EXPECT_LT(max_abs_diff(row, m.moments), 1e-15);
}

TEST(GammaRowNormal, DegenerateLimit) {
    const double x = std::log(90.0);
    const auto row = gamma_row_normal(kRefDomain, 20, x, 0.0, 1e-12, 1.0);
    const double z = kRefDomain.to_unit(x);
    for (std::size_t j = 0; j <= 20; ++j) EXPECT_NEAR(row[j], std::cos(j * std::acos(z)), 1e-5);
}

TEST(GammaRowNormal, AgreesWithMonteCarlo) {
    const double sigma = 0.25, r = 0.03, dt = 1.0 / 52.0;
    const double x = std::log(100.0);
    const std::size_t N = 150, draws = 10000000;
    const auto row = gamma_row_normal(kRefDomain, N, x, r - 0.5 * sigma * sigma, sigma * sigma, dt);
    std::vector<double> sum(N + 1, 0.0), basis(N + 1);
    RandomStream rs(2718, 0);
    for (std::size_t i = 0; i < draws; ++i) {
        const double y = x + (r - 0.5 * sigma * sigma) * dt + sigma * std::sqrt(dt) * rs.normal();
        chebyshev_basis(kRefDomain.to_unit(y), basis);
        for (std::size_t j = 0; j <= N; ++j) sum[j] += basis[j];
    }
    for (std::size_t j = 0; j <= N; ++j) EXPECT_NEAR(row[j], sum[j] / double(draws), 1e-3) << j;
}

TEST(GammaNormal, TwoNodeSmallVariance) {
    // Mass at an endpoint node is cut in half by the indicator.
    const auto g = gamma_normal(ChebDomain(-1.0, 1.0), 1, 0.0, 1e-14, 1.0);
    EXPECT_NEAR(g(0, 0), 0.5, 1e-6);
    EXPECT_NEAR(g(0, 1), 0.5, 1e-6);
    EXPECT_NEAR(g(1, 0), 0.5, 1e-6);
    EXPECT_NEAR(g(1, 1), -0.5, 1e-6);
}

TEST(GammaNormal, InteriorNodesSmallVariance) {
    const auto g = gamma_normal(ChebDomain(-1.0, 1.0), 4, 0.0, 1e-14, 1.0);
    const auto z = cheb_nodes(4);
    for (std::size_t k = 1; k < 4; ++k)
        for (std::size_t j = 0; j <= 4; ++j) EXPECT_NEAR(g(k, j), std::cos(j * std::acos(z[k])), 1e-6);
}

TEST(GammaNormal, EntriesBounded) {
    const auto g = gamma_normal(kRefDomain, 150, 0.03 - 0.03125, 0.0625, 1.0 / 52.0);
    for (std::size_t k = 0; k <= 150; ++k) {
        EXPECT_GE(g(k, 0), 0.0);
        EXPECT_LE(g(k, 0), 1.0 + 1e-9);
        for (std::size_t j = 0; j <= 150; ++j) ASSERT_LE(std::abs(g(k, j)), 1.0 + 1e-9);
    }
}

TEST(MomentMatrix, RejectsOutOfRange) {
    EXPECT_THROW(MomentMatrix(ChebDomain(0, 1), 1, 0.1, MomentBackend::analytic, {1.0, 0.0, 2.0, 0.0}),
                 NumericalError);
    EXPECT_THROW(MomentMatrix(ChebDomain(0, 1), 1, 0.1, MomentBackend::analytic, {1.0, NAN, 0.0, 0.0}),
                 NumericalError);
}

TEST(MomentMatrix, Apply) {
    const MomentMatrix m(ChebDomain(0, 1), 1, 0.1, MomentBackend::analytic, {1.0, 0.5, 0.25, -0.5});
    const auto v = m.apply(std::vector<double>{2.0, 4.0});
    EXPECT_DOUBLE_EQ(v[0], 4.0);
    EXPECT_DOUBLE_EQ(v[1], -1.5);
}

TEST(GammaMc, DeterministicAndConvergent) {
    const auto bs = black_scholes(0.25, 0.1, 0.03);
    const double dt = 1.0 / 52.0;
    const std::size_t N = 30;
    const auto a = gamma_mc(kRefDomain, N, bs, dt, 2000, 5);
    const auto b = gamma_mc(kRefDomain, N, bs, dt, 2000, 5);
    EXPECT_EQ(a, b);

    const auto exact = gamma_normal(kRefDomain, N, bs.r - 0.03125, 0.0625, dt);
    const std::size_t big = 1000000;
    const auto g = gamma_mc(kRefDomain, N, bs, dt, big, 7);
    EXPECT_LT(max_abs_diff(g.data(), exact.data()), 3.0 / std::sqrt(double(big)));
    for (std::size_t k = 0; k <= N; ++k) {
        EXPECT_GE(g(k, 0), 0.0);
        EXPECT_LE(g(k, 0), 1.0);
    }
}

TEST(GammaMc, ErrorDecaysAsInverseSquareRoot) {
    const auto bs = black_scholes(0.25, 0.1, 0.03);
    const double dt = 1.0 / 52.0;
    const std::size_t N = 20;
    const auto exact = gamma_normal(kRefDomain, N, bs.r - 0.03125, 0.0625, dt);
    // Mean over seeds of the max error, at four decades of sample size.
    std::vector<double> lx, ly;
    for (std::size_t m : {1000u, 10000u, 100000u, 1000000u}) {
        const int seeds = m >= 1000000 ? 3 : 8;
        double e = 0.0;
        for (int s = 0; s < seeds; ++s) e += max_abs_diff(gamma_mc(kRefDomain, N, bs, dt, m, 100 + s).data(), exact.data());
        lx.push_back(std::log10(double(m)));
        ly.push_back(std::log10(e / seeds));
    }
    const double mx = (lx[0] + lx[1] + lx[2] + lx[3]) / 4, my = (ly[0] + ly[1] + ly[2] + ly[3]) / 4;
    double sxy = 0.0, sxx = 0.0;
    for (int i = 0; i < 4; ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    const double slope = sxy / sxx;
    EXPECT_NEAR(slope, -0.5, 0.1);
}

TEST(GammaMc, TooFewDrawsRejected) {
    EXPECT_THROW(gamma_mc(kRefDomain, 10, reference_black_scholes(), 0.1, 10, 1), ConfigError);
}

TEST(GammaMc, CevControlVariate) {
    // With exponent 2 the CEV step is an Euler discretisation of Black-Scholes.
    const auto c = cev(0.25, 0.1, 0.03, 2.0);
    const double dt = 1.0 / 52.0;
    const std::size_t N = 40;
    const auto exact = gamma_normal(kRefDomain, N, 0.03 - 0.03125, 0.0625, dt);
    const auto g = gamma_mc(kRefDomain, N, c, dt, 20000, 3, 0, 64);
    EXPECT_LT(max_abs_diff(g.data(), exact.data()), 3.0 / std::sqrt(20000.0));
    EXPECT_EQ(g, gamma_mc(kRefDomain, N, c, dt, 20000, 3, 0, 64));
    for (double v : g.data()) ASSERT_LE(std::abs(v), 1.0);
}

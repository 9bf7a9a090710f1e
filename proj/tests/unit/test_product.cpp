#include <gtest/gtest.h>

#include <cmath>

#include "chebex/error.hpp"
#include "chebex/product.hpp"

using namespace chebex;

TEST(Payoff, Examples) {
    EXPECT_EQ(payoff(european_put(), std::log(100.0)), 0.0);
    EXPECT_NEAR(payoff(bermudan_put(), std::log(50.0)), 50.0, 1e-12);
    EXPECT_EQ(payoff(barrier_up_out_call(100.0, 150.0), std::log(160.0)), 0.0);
    EXPECT_NEAR(payoff(barrier_up_out_call(100.0, 150.0), std::log(140.0)), 40.0, 1e-12);
    EXPECT_NEAR(payoff(european_call(), std::log(130.0)), 30.0, 1e-12);
}

TEST(ProductSpec, Validation) {
    EXPECT_THROW(european_put(0.0).validate(), ConfigError);
    EXPECT_THROW(european_put(100.0, -1.0).validate(), ConfigError);
    EXPECT_THROW(bermudan_put(100.0, 1.0, 0).validate(), ConfigError);
    EXPECT_THROW(barrier_up_out_call(100.0, 90.0).validate(), ConfigError);
    EXPECT_NO_THROW(barrier_up_out_call(100.0, 150.0).validate());
    EXPECT_THROW(parse_product_kind("asian"), ConfigError);
    for (auto k : {ProductKind::european_call, ProductKind::european_put, ProductKind::bermudan_put,
                   ProductKind::barrier_up_out_call})
        EXPECT_EQ(parse_product_kind(to_string(k)), k);
}

TEST(DefaultDomain, ReferenceValues) {
    const auto bs = reference_black_scholes();
    const auto d = default_domain(bermudan_put(), bs);
    EXPECT_DOUBLE_EQ(d.lo(), std::log(0.2));
    EXPECT_DOUBLE_EQ(d.hi(), std::log(350.0));
    const auto b = default_domain(barrier_up_out_call(100.0, 150.0), bs);
    EXPECT_DOUBLE_EQ(b.lo(), std::log(10.0));
    EXPECT_DOUBLE_EQ(b.hi(), std::log(150.0));
    const auto c = default_domain(barrier_up_out_call(100.0, 125.0), reference_cev());
    EXPECT_DOUBLE_EQ(c.hi(), std::log(125.0));
    EXPECT_EQ(default_degree(bermudan_put()), 150u);
    EXPECT_EQ(default_degree(barrier_up_out_call(100.0, 150.0)), 40u);
}

TEST(ExtensionValue, Examples) {
    const ChebDomain d(std::log(0.2), std::log(350.0));
    EXPECT_EQ(extension_value(bermudan_put(), 0.03, d, std::log(400.0), 0.5), 0.0);
    EXPECT_NEAR(extension_value(bermudan_put(), 0.03, d, std::log(0.1), 0.5), 99.9, 1e-12);
    const auto bar = barrier_up_out_call(100.0, 150.0);
    const ChebDomain db(std::log(10.0), std::log(150.0));
    EXPECT_EQ(extension_value(bar, 0.03, db, std::log(150.0) + 0.01, 0.2), 0.0);
    EXPECT_NEAR(extension_value(european_put(), 0.03, d, std::log(0.1), 0.0), 100.0 * std::exp(-0.03) - 0.1, 1e-12);
    EXPECT_THROW(extension_value(bermudan_put(), 0.03, d, std::log(100.0), 0.0), DomainError);
}

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "chebex/error.hpp"
#include "config.hpp"
#include "report.hpp"

using namespace chebex;
using namespace chebex::cli;
using nlohmann::json;

TEST(Presets, ReferenceLiterals) {
    for (const auto& name : preset_names()) {
        if (name.find("_paper") == std::string::npos) continue;
        SCOPED_TRACE(name);
        const auto c = preset(name);
        EXPECT_EQ(c.product.strike, 100.0);
        EXPECT_EQ(c.product.maturity, 1.0);
        EXPECT_EQ(c.product.n_dates, 52u);
        EXPECT_EQ(c.simulation.spot, 100.0);
        EXPECT_EQ(c.model.r, 0.03);
        EXPECT_EQ(c.exposure.alpha, 0.975);
        const std::size_t degree = c.numerics.degree.value_or(default_degree(c.product));
        const auto dom = c.numerics.domain.value_or(default_domain(c.product, c.model));
        if (c.product.is_barrier()) {
            EXPECT_EQ(degree, 40u);
            EXPECT_DOUBLE_EQ(dom.lo(), std::log(10.0));
            EXPECT_DOUBLE_EQ(dom.hi(), std::log(c.product.barrier));
            EXPECT_EQ(c.product.barrier, c.model.type == ModelType::cev ? 125.0 : 150.0);
        } else {
            EXPECT_EQ(degree, 150u);
            EXPECT_DOUBLE_EQ(dom.lo(), std::log(0.2));
            EXPECT_DOUBLE_EQ(dom.hi(), std::log(350.0));
        }
        switch (c.model.type) {
            case ModelType::black_scholes: EXPECT_EQ(c.model, reference_black_scholes()); break;
            case ModelType::merton: EXPECT_EQ(c.model, reference_merton()); break;
            case ModelType::cev:
                EXPECT_EQ(c.model, reference_cev());
                EXPECT_GE(c.numerics.m_pre, 100000u);
                break;
        }
    }
}

TEST(Presets, ExerciseFrequencyStudy) {
    for (std::size_t n : {4u, 12u, 36u, 84u, 252u}) {
        const auto c = preset("bs_bermudan_nT" + std::to_string(n));
        EXPECT_EQ(c.product.n_dates, n);
        EXPECT_EQ(c.exposure.grid, ExposureGrid::daily);
    }
    EXPECT_THROW(preset("nope"), ConfigError);
}

TEST(ApplyJson, OverlaysAndValidates) {
    auto c = preset("bs_bermudan_paper");
    apply_json(c, json::parse(R"({"product": {"K": 90}, "simulation": {"paths": 1234}})"));
    EXPECT_EQ(c.product.strike, 90.0);
    EXPECT_EQ(c.simulation.paths, 1234u);
    EXPECT_EQ(c.product.kind, ProductKind::bermudan_put);
}

TEST(ApplyJson, ErrorsNameTheField) {
    RunConfig c;
    try {
        apply_json(c, json::parse(R"({"product": {"kind": "european_put"}})"));
        FAIL() << "missing K accepted";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("product.K"), std::string::npos) << e.what();
    }
    auto p = preset("bs_european_paper");
    try {
        apply_json(p, json::parse(R"({"model": {"sigmaa": 0.2}})"));
        FAIL() << "unknown key accepted";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("sigmaa"), std::string::npos) << e.what();
    }
    EXPECT_THROW(apply_json(p, json::parse(R"({"product": {"K": "abc"}})")), ConfigError);
}

TEST(Validate, CrossField) {
    auto c = preset("cev_european_paper");
    c.numerics.backend = MomentBackend::analytic;
    EXPECT_THROW(c.validate(), ConfigError);
    auto b = preset("bs_barrier_paper");
    b.product.barrier = 0.0;
    EXPECT_THROW(b.validate(), ConfigError);
}

TEST(Resolve, Precedence) {
    const auto dir = std::filesystem::temp_directory_path() / ("chebex_cfg_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    const auto file = dir / "run.json";
    std::ofstream(file) << R"({"preset": "bs_bermudan_paper", "simulation": {"seed": 5, "paths": 100}})";
    Overrides flags;
    flags.paths = 777;
    const auto c = resolve(file, std::nullopt, flags);
    EXPECT_EQ(c.product.kind, ProductKind::bermudan_put);
    EXPECT_EQ(c.simulation.seed, 5u);
    EXPECT_EQ(c.simulation.paths, 777u);
    std::filesystem::remove_all(dir);
}

TEST(Report, LocaleIndependentCsv) {
    ExposureProfile p;
    p.grid = {0.0, 0.5};
    p.ee = {8.25, 1.5};
    p.pfe = {8.25, 12.125};
    EXPECT_EQ(profile_csv(p), "t,EE,PFE\n0,8.25,8.25\n0.5,1.5,12.125\n");
    EXPECT_EQ(format_number(1234567.5), "1234567.5");
}

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <unistd.h>

#include "chebex/moments.hpp"
#include "chebex/pricer.hpp"

using namespace chebex;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() : path(std::filesystem::temp_directory_path() / ("chebex_cache_" + std::to_string(::getpid()))) {
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

MomentCacheKey key_for(const MomentMatrix& m) {
    MomentCacheKey k;
    k.model_hash = reference_black_scholes().fingerprint();
    k.lo = m.domain().lo();
    k.hi = m.domain().hi();
    k.degree = m.degree();
    k.dt = m.dt();
    k.backend = m.backend();
    return k;
}

}  // namespace

TEST(MomentCache, BinaryRoundTripIsExact) {
    TempDir dir;
    const auto g = gamma_normal(ChebDomain(std::log(0.2), std::log(350.0)), 40, -0.00125, 0.0625, 1.0 / 52.0);
    const auto key = key_for(g);
    const auto file = dir.path / (cache_file_stem(key) + ".bin");
    save_moment_matrix(file, key, g);
    const auto back = load_moment_matrix(file, key);
    ASSERT_TRUE(back.has_value());
    EXPECT_EQ(*back, g);
}

TEST(MomentCache, JsonRoundTripIsExact) {
    TempDir dir;
    const auto g = gamma_normal(ChebDomain(-1.0, 2.0), 12, 0.01, 0.09, 0.25);
    const auto key = key_for(g);
    const auto file = dir.path / "g.json";
    save_moment_matrix_json(file, key, g);
    const auto back = load_moment_matrix_json(file, key);
    ASSERT_TRUE(back.has_value());
    EXPECT_EQ(*back, g);
}

TEST(MomentCache, KeyMismatchAndMissingFile) {
    TempDir dir;
    const auto g = gamma_normal(ChebDomain(-1.0, 2.0), 8, 0.01, 0.09, 0.25);
    auto key = key_for(g);
    const auto file = dir.path / "g.bin";
    save_moment_matrix(file, key, g);
    auto other = key;
    other.dt = 0.5;
    EXPECT_FALSE(load_moment_matrix(file, other).has_value());
    EXPECT_FALSE(load_moment_matrix(dir.path / "missing.bin", key).has_value());
    EXPECT_NE(cache_file_stem(key), cache_file_stem(other));
}

TEST(MomentCache, SolveReusesCachedMatrix) {
    TempDir dir;
    NumericsConfig cfg;
    cfg.cache_dir = dir.path;
    const auto first = solve(bermudan_put(), reference_black_scholes(), cfg);
    ASSERT_FALSE(std::filesystem::is_empty(dir.path));
    const auto second = solve(bermudan_put(), reference_black_scholes(), cfg);
    EXPECT_EQ(price(first, 0, std::log(100.0)), price(second, 0, std::log(100.0)));
}

#pragma once

#include <array>
#include <cstdint>

namespace chebex {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// A pure function of (counter, key); any draw can be regenerated from its
/// coordinates, which is what makes path- and node-parallel simulation
/// reproducible.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter ctr, Key key) noexcept;
};

/// Sequential stream of uniforms / normals for one (seed, stream id) pair.
///
/// Counter layout: words 0-1 hold the block index, words 2-3 the stream id;
/// the key is the 64-bit seed.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream) noexcept;

    /// Uniform on the open interval (0, 1) with 53-bit resolution.
    double uniform() noexcept;
    /// Standard normal by inverse CDF.
    double normal() noexcept;

private:
    void refill() noexcept;

    Philox4x32::Key key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    Philox4x32::Counter buffer_{};
    int used_ = 4;
};

/// Standard normal quantile; p must lie in (0, 1).
double normal_quantile(double p);

/// Standard normal CDF.
double normal_cdf(double x) noexcept;

/// Standard normal density.
double normal_pdf(double x) noexcept;

}  // namespace chebex

#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
//
// Key = 64-bit seed, counter = (draw index, stream index). Every Monte Carlo
// path owns the stream equal to its path index, so results do not depend on
// how paths are distributed over workers.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace gou {

using Philox4x32 = std::array<std::uint32_t, 4>;

/// One Philox4x32-10 block.
inline Philox4x32 philox4x32_10(Philox4x32 ctr, std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += W0;
            key[1] += W1;
        }
        const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

/// Sequential view of one Philox stream.
class Philox {
public:
    Philox(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, stream_(stream) {}

    /// Next 128-bit block.
    Philox4x32 block() noexcept {
        const Philox4x32 ctr = {static_cast<std::uint32_t>(draw_), static_cast<std::uint32_t>(draw_ >> 32),
                                static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
        ++draw_;
        return philox4x32_10(ctr, key_);
    }

    /// Two uniforms in (0, 1) with 53 random bits each.
    std::array<double, 2> uniform2() noexcept {
        const Philox4x32 b = block();
        return {to_open_unit(b[0], b[1]), to_open_unit(b[2], b[3])};
    }

    double uniform() noexcept {
        if (has_uniform_) {
            has_uniform_ = false;
            return spare_uniform_;
        }
        const auto u = uniform2();
        spare_uniform_ = u[1];
        has_uniform_ = true;
        return u[0];
    }

    /// Standard normal by Box-Muller; the second variate of each pair is cached.
    double normal() noexcept {
        if (has_normal_) {
            has_normal_ = false;
            return spare_normal_;
        }
        const auto u = uniform2();
        const double rad = std::sqrt(-2.0 * std::log(u[0]));
        const double ang = 2.0 * std::numbers::pi * u[1];
        spare_normal_ = rad * std::sin(ang);
        has_normal_ = true;
        return rad * std::cos(ang);
    }

    std::uint64_t draws() const noexcept { return draw_; }

private:
    static double to_open_unit(std::uint32_t lo, std::uint32_t hi) noexcept {
        const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32 | lo) >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t draw_ = 0;
    double spare_normal_ = 0.0;
    double spare_uniform_ = 0.0;
    bool has_normal_ = false;
    bool has_uniform_ = false;
};

}  // namespace gou

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>

namespace stowave {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline void mulhilo32(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

/// Philox4x32-10 block cipher (Salmon et al.): 128-bit counter, 64-bit key,
/// 128 output bits per block.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> x,
                                               std::uint32_t k0, std::uint32_t k1) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo32(M0, x[0], hi0, lo0);
        mulhilo32(M1, x[2], hi1, lo1);
        x = {hi1 ^ x[1] ^ k0, lo1, hi0 ^ x[3] ^ k1, lo0};
        k0 += W0;
        k1 += W1;
    }
    return x;
}

inline double to_unit_open(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t u = (static_cast<std::uint64_t>(hi) << 32) | lo;
    // (0, 1]: never returns 0, so log() below is safe
    return static_cast<double>((u >> 11) + 1) * 0x1.0p-53;
}

}  // namespace detail

/// Counter-based N(0,1) source addressed by (master seed, realization, step,
/// draw index). Any draw is reachable without sequential replay, so the value
/// at a given address is identical regardless of evaluation order or thread
/// placement. Each realization gets an independent Philox key derived from
/// the master seed.
class GaussianStream {
  public:
    GaussianStream(std::uint64_t master_seed, std::uint32_t realization) {
        const std::uint64_t k =
            detail::splitmix64(detail::splitmix64(master_seed) ^ (realization + 1ULL));
        key0_ = static_cast<std::uint32_t>(k);
        key1_ = static_cast<std::uint32_t>(k >> 32);
    }

    /// Two normals from one Philox block via Box-Muller.
    std::array<double, 2> normal_pair(std::uint64_t step, std::uint64_t block) const {
        const std::array<std::uint32_t, 4> counter = {
            static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
            static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32)};
        const auto r = detail::philox4x32(counter, key0_, key1_);
        const double u1 = detail::to_unit_open(r[0], r[1]);
        const double u2 = detail::to_unit_open(r[2], r[3]);
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * 3.14159265358979323846 * u2;
        double s, c;
        __builtin_sincos(ang, &s, &c);
        return {rad * c, rad * s};
    }

    double normal(std::uint64_t step, std::uint64_t index) const {
        const auto pair = normal_pair(step, index / 2);
        return pair[index % 2];
    }

    void fill_normals(std::uint64_t step, std::span<double> out) const {
        const size_t n = out.size();
        for (size_t i = 0; i < n; i += 2) {
            const auto pair = normal_pair(step, i / 2);
            out[i] = pair[0];
            if (i + 1 < n) out[i + 1] = pair[1];
        }
    }

  private:
    std::uint32_t key0_ = 0, key1_ = 0;
};

}  // namespace stowave

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace baps {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seeded random stream with deterministic, draw-order-independent splitting.
///
/// `split(key)` derives a child stream from the seed only, never from the
/// current engine position, so handing children to parallel workers cannot
/// change any draw. The engine (mt19937_64) and every distribution below
/// are fully specified, so sequences are reproducible across toolchains.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

    std::uint64_t seed() const noexcept { return seed_; }

    RngStream split(std::uint64_t key) const {
        return RngStream(splitmix64(seed_ ^ splitmix64(key + 0x632be59bd9b4e019ULL)));
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Rejection keeps the result exactly uniform.
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    bool coin() { return (engine_() >> 63) != 0; }

    /// Standard normal via Box-Muller (no cached second value).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace baps

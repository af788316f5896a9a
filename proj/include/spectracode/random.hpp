#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace spectracode {

/// SplitMix64 finalizer; used to derive statistically independent child seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) noexcept
{
    return splitmix64(seed ^ splitmix64(value + 0x632BE59BD9B4E019ull));
}

/// Which of the two matrices of a product a random stream feeds.
enum class MatrixRole : std::uint64_t { a = 0xA, b = 0xB };

/// Counter-based seed derivation: the child seed of (trial, role) depends only on
/// the master seed, never on the order in which trials are scheduled.
struct SeedSpec {
    std::uint64_t master = 0;

    std::uint64_t child(std::uint64_t trial, MatrixRole role) const noexcept
    {
        return hash_combine(hash_combine(master, trial), static_cast<std::uint64_t>(role));
    }

    std::uint64_t child(std::uint64_t trial) const noexcept { return hash_combine(master, trial); }
};

/// Platform-independent random stream.
///
/// std::mt19937_64 output is fixed by the standard; the distributions below are
/// implemented here because the standard library ones are not.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, bound), bound >= 1, unbiased (Lemire rejection).
    std::uint64_t uniform(std::uint64_t bound)
    {
        if (bound <= 1) return 0;
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const unsigned __int128 product = static_cast<unsigned __int128>(next()) * bound;
            if (static_cast<std::uint64_t>(product) >= threshold)
                return static_cast<std::uint64_t>(product >> 64);
        }
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller.
    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    int rademacher() { return (next() >> 63) ? 1 : -1; }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace spectracode

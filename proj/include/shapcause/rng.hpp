#pragma once

#include <cstdint>
#include <cmath>

namespace shapcause {

/// splitmix64 step function. Used for seeding and for deriving sub-stream
/// seeds; not used as the main generator.
struct SplitMix64 {
    std::uint64_t state;

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
};

/// Derives the seed of an independent sub-stream from a master seed and a
/// stream index (row index, permutation index, coalition bitmask, ...).
/// Every parallel loop seeds one Rng per logical unit of work through this
/// function, which makes results independent of thread count and schedule.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream) {
    SplitMix64 sm{master ^ (0x632BE59BD9B4E019ull + stream * 0x9E3779B97F4A7C15ull)};
    sm.next();
    return sm.next();
}

/// xoshiro256++ with splitmix64 seeding. Normal deviates come from a
/// Box-Muller transform on the generator's uniforms, so all sampling is
/// bit-reproducible across platforms and thread counts for a fixed seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        SplitMix64 sm{seed};
        for (auto& w : s_) w = sm.next();
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in (0, 1]. The open lower end keeps log() finite in
    /// the Box-Muller transform.
    double uniform01() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) {
        const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
        return lo + u * (hi - lo);
    }

    /// Standard normal deviate (Box-Muller; the pair's second value is cached).
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform01()));
        const double t = two_pi * uniform01();
        cached_ = r * std::sin(t);
        have_cached_ = true;
        return r * std::cos(t);
    }

    /// Unbiased uniform integer in [0, n), n >= 1. Rejection sampling.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

private:
    static constexpr double two_pi = 6.283185307179586476925286766559;

    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4];
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace shapcause

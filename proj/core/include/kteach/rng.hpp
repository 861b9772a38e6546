#pragma once

#include <cmath>
#include <cstdint>

namespace kteach {

/// Deterministic 64-bit generator (splitmix64) with hand-rolled output
/// transforms, so that seeded runs reproduce bit-identically across
/// platforms and standard-library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform index in [0, n).
    std::size_t next_index(std::size_t n) {
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// Box-Muller normal draw; consumes exactly two uniforms per call.
    double next_normal(double mean, double stddev) {
        double u1 = next_double();
        const double u2 = next_double();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        constexpr double two_pi = 6.283185307179586476925286766559;
        return mean + stddev * r * std::cos(two_pi * u2);
    }

    /// Independent child stream for learner i; removing or adding other
    /// learners never perturbs learner i's draws.
    static Rng stream(std::uint64_t seed, std::size_t learner_index) {
        Rng mix(seed);
        const std::uint64_t base = mix.next_u64();
        return Rng(base + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(learner_index) + 1));
    }

private:
    std::uint64_t state_;
};

}  // namespace kteach

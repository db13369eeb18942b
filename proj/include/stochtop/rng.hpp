#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace stochtop {

/// Seedable random generator with fully specified draw algorithms.
///
/// All draws are defined in terms of the raw mt19937_64 output stream so
/// that sequences are reproducible across platforms and standard library
/// implementations (std::uniform_int_distribution and friends are
/// implementation-defined and deliberately avoided).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) from the top 53 bits of one 64-bit word.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [lo, hi] (inclusive), Lemire's debiased
    /// multiply-shift rejection method.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
        if (range == 0) return static_cast<std::int64_t>(next_u64());  // full 64-bit span
        const std::uint64_t reject_below = (0 - range) % range;
        while (true) {
            const unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * range;
            if (static_cast<std::uint64_t>(m) >= reject_below)
                return lo + static_cast<std::int64_t>(m >> 64);
        }
    }

    /// Standard normal via the Marsaglia polar method (consumes a variable,
    /// but seed-deterministic, number of uniforms).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    double normal(double mu, double sigma) { return mu + sigma * normal(); }

    /// Truncated normal on [a, b] by rejection.
    double truncated_normal(double mu, double sigma, double a, double b) {
        while (true) {
            const double x = normal(mu, sigma);
            if (x >= a && x <= b) return x;
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace stochtop

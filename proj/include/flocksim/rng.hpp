#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace flocksim {

/// Seeded random stream with platform-independent output.
///
/// std::normal_distribution and friends are implementation-defined, so the
/// variates are derived here directly from the (fully specified) Mersenne
/// Twister output. Every agent owns independent streams keyed by
/// (master seed, agent id, purpose).
class Rng {
public:
    enum class Stream : std::uint32_t { Gps = 1, Plant = 2, Network = 3, Layout = 4, Control = 5 };

    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    Rng(std::uint64_t master_seed, std::uint32_t agent, Stream stream) {
        std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                          static_cast<std::uint32_t>(master_seed >> 32), agent,
                          static_cast<std::uint32_t>(stream)};
        engine_.seed(seq);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; the second variate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        spare_ = mag * std::sin(2.0 * std::numbers::pi * u2);
        has_spare_ = true;
        return mag * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Exponential with the given mean (mean 0 yields 0).
    double exponential(double mean) {
        if (mean <= 0.0) return 0.0;
        return -mean * std::log1p(-uniform());
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace flocksim

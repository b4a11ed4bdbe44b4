#ifndef TICTAQ_RNG_HPP
#define TICTAQ_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

#include "tictaq/common.hpp"

namespace tictaq {

// std::mt19937_64 is fully specified by the standard, so the raw bit stream is
// reproducible everywhere. The distributions below are hand-rolled because the
// standard library's distribution algorithms are implementation-defined, which
// would break byte-identical run logs across toolchains.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1).
    double uniform() {
        ++draws_;
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller. Two uniforms per draw, no cached spare,
    // so the stream position is a simple function of the draw count.
    double normal() {
        ++draws_;
        const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    // Poisson by Knuth's product-of-uniforms method; adequate for the small
    // event rates used here.
    std::uint64_t poisson(double lambda) {
        if (lambda < 0.0) throw std::invalid_argument("poisson: lambda < 0");
        if (lambda == 0.0) return 0;
        const double limit = std::exp(-lambda);
        std::uint64_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform();
        } while (p > limit);
        return k - 1;
    }

    // Binomial as a sum of Bernoulli trials; n is at most a few thousand here.
    std::uint64_t binomial(std::uint64_t n, double p) {
        if (p < 0.0 || p > 1.0) throw std::invalid_argument("binomial: p outside [0,1]");
        std::uint64_t k = 0;
        for (std::uint64_t i = 0; i < n; ++i)
            if (uniform() < p) ++k;
        return k;
    }

    std::uint64_t draw_count() const { return draws_; }

  private:
    std::mt19937_64 engine_;
    std::uint64_t draws_ = 0;
};

// SplitMix64 step, used to derive independent stream seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Deterministic seed for a (purpose, tag) substream of a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t purpose, std::uint64_t tag) {
    std::uint64_t s = master;
    (void)splitmix64(s);
    s ^= 0xD1B54A32D192ED03ULL * (purpose + 1);
    (void)splitmix64(s);
    s ^= 0xABCD1234ABCD1234ULL * (tag + 1);
    return splitmix64(s);
}

}  // namespace tictaq

#endif

#pragma once
#include <cmath>
#include <cstdint>
#include <random>

namespace qtomo {

// Deterministic random source. All samplers in the library draw through this
// wrapper so that data sets are reproducible byte-for-byte across platforms:
// uniform doubles are built from the top 53 bits of the mt19937_64 stream and
// normals use a plain (cache-free) Box-Muller transform, avoiding the
// implementation-defined std::*_distribution algorithms.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                          static_cast<std::uint32_t>(seed >> 32)};
        eng_.seed(seq);
    }

    // Independent stream for a block of records; used by block-parallel
    // samplers so that the concatenated output is independent of the number
    // of workers.
    Rng(std::uint64_t seed, std::uint64_t block_index) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                          static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(block_index & 0xffffffffu),
                          static_cast<std::uint32_t>(block_index >> 32)};
        eng_.seed(seq);
    }

    // Uniform on [0,1).
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Uniform on [a,b).
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // Standard normal; draws exactly two uniforms per call.
    double gauss() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    std::uint64_t raw() { return eng_(); }

  private:
    std::mt19937_64 eng_;
};

// Number of records per RNG block; samplers derive one stream per block.
inline constexpr std::size_t kRngBlockSize = 65536;

} // namespace qtomo

#pragma once

#include <cstdint>

namespace permlab {

// splitmix64-seeded xoshiro256** with hand-rolled distributions, so that a
// given seed yields the same stream on every compiler and platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // Uniform in [0, n), n >= 1.
    std::uint64_t uniform_index(std::uint64_t n);

    // Uniform in [0, 1).
    double uniform_real();

    // Fair coin as 0.0 / 1.0.
    double binary();

    // Standard normal via Box-Muller; consumes two uniforms per pair.
    double gaussian();

    // Independent stream for a sub-task (seed derivation: base XOR index).
    static Rng derived(std::uint64_t base_seed, std::uint64_t index) {
        return Rng(base_seed ^ index);
    }

private:
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace permlab

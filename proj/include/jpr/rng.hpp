#pragma once

#include <cstdint>
#include <random>

namespace jpr {

/// Portable seeded generator: std::mt19937_64 (whose output sequence is fixed
/// by the standard) with hand-written uniform/normal transforms, so draws are
/// reproducible across standard library implementations. The std::*_distribution
/// classes are implementation-defined and are not used.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();

    /// Uniform integer in [lo, hi] (inclusive), rejection-sampled.
    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi);

    /// Standard normal via the Box-Muller transform (second value cached).
    double normal();

    bool coin() { return (engine_() >> 63) != 0; }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// SplitMix64 finalizer; derives independent stream seeds from (seed, tag).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag);

}  // namespace jpr

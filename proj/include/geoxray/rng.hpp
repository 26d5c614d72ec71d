#pragma once

#include <cstdint>
#include <random>

namespace geoxray {

// Seeded generator with a platform-independent uniform mapping.
// std::uniform_real_distribution is implementation-defined, so draws are
// built from the raw 64-bit output of mt19937_64 instead.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller (deterministic given the seed).
    double normal();

private:
    std::mt19937_64 engine_;
};

}  // namespace geoxray

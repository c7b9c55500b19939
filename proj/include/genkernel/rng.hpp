#pragma once

#include <cstdint>
#include <random>

#include "genkernel/types.hpp"

namespace genkernel {

// mt19937_64 with hand-rolled mappings: identical streams on every platform,
// unlike std::uniform_real_distribution.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    Real uniform() {
        return static_cast<Real>(engine_() >> 11) * 0x1.0p-53;
    }

    Real uniform(Real lo, Real hi) { return lo + (hi - lo) * uniform(); }

    int uniform_int(int lo, int hi) { // inclusive bounds
        return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
    }

private:
    std::mt19937_64 engine_;
};

} // namespace genkernel

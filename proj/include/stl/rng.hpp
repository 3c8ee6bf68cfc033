#pragma once

#include <array>
#include <cstdint>

namespace stl {

// Philox4x32-10 (Salmon et al., SC'11). Counter-based: every draw is a pure
// function of (key, counter), so streams can be split across workers freely.
std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 4> ctr, std::array<uint32_t, 2> key);

// Draws keyed by (seed, stream, step). `block` selects further words at the same step.
class CounterRng {
public:
    explicit CounterRng(uint64_t seed) : seed_(seed) {}

    // four uniforms in (0,1) as two 64-bit words
    void uniforms(uint64_t stream, uint64_t step, uint32_t block, double out[2]) const;
    // n standard normals (Box-Muller)
    void normals(uint64_t stream, uint64_t step, double* out, int n) const;
    double uniform(uint64_t stream, uint64_t step, uint32_t block = 0) const;

    uint64_t seed() const { return seed_; }

private:
    uint64_t seed_;
};

// Dedicated step indices that never collide with time steps.
inline constexpr uint64_t kInitStep = 0xFFFFFFFFFFFFull;

}  // namespace stl

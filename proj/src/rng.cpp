#include "stl/rng.hpp"

#include <cmath>
#include <numbers>

namespace stl {

namespace {

constexpr uint32_t kM0 = 0xD2511F53u;
constexpr uint32_t kM1 = 0xCD9E8D57u;
constexpr uint32_t kW0 = 0x9E3779B9u;
constexpr uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
    uint64_t p = static_cast<uint64_t>(a) * b;
    hi = static_cast<uint32_t>(p >> 32);
    lo = static_cast<uint32_t>(p);
}

inline double to_unit(uint64_t x) {
    // 53 random bits, shifted off zero
    return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 4> c, std::array<uint32_t, 2> k) {
    for (int round = 0; round < 10; ++round) {
        uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kM0, c[0], hi0, lo0);
        mulhilo(kM1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += kW0;
        k[1] += kW1;
    }
    return c;
}

void CounterRng::uniforms(uint64_t stream, uint64_t step, uint32_t block, double out[2]) const {
    std::array<uint32_t, 4> ctr = {static_cast<uint32_t>(stream), static_cast<uint32_t>(stream >> 32),
                                   static_cast<uint32_t>(step),
                                   (static_cast<uint32_t>(step >> 32) << 16) ^ block};
    std::array<uint32_t, 2> key = {static_cast<uint32_t>(seed_), static_cast<uint32_t>(seed_ >> 32)};
    auto r = philox4x32(ctr, key);
    out[0] = to_unit((static_cast<uint64_t>(r[0]) << 32) | r[1]);
    out[1] = to_unit((static_cast<uint64_t>(r[2]) << 32) | r[3]);
}

double CounterRng::uniform(uint64_t stream, uint64_t step, uint32_t block) const {
    double u[2];
    uniforms(stream, step, block, u);
    return u[0];
}

void CounterRng::normals(uint64_t stream, uint64_t step, double* out, int n) const {
    for (int i = 0, block = 0; i < n; i += 2, ++block) {
        double u[2];
        uniforms(stream, step, static_cast<uint32_t>(block), u);
        double r = std::sqrt(-2.0 * std::log(u[0]));
        double th = 2.0 * std::numbers::pi * u[1];
        out[i] = r * std::cos(th);
        if (i + 1 < n) out[i + 1] = r * std::sin(th);
    }
}

}  // namespace stl

#include "lastzero/philox.hpp"

#include <cmath>
#include <numbers>

namespace lastzero {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter c, PhiloxKey k) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kM0, c[0], hi0, lo0);
        mulhilo(kM1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += kW0;
        k[1] += kW1;
    }
    return c;
}

PhiloxKey philox_key(std::uint64_t seed) {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

double uniform_open01(std::uint32_t hi, std::uint32_t lo) {
    // 52 bits: every midpoint (m + 0.5) 2^-52 is exact, so 0 and 1 are unreachable.
    const std::uint64_t m = (static_cast<std::uint64_t>(hi) << 20) | (lo >> 12);
    return (static_cast<double>(m) + 0.5) * 0x1p-52;
}

PhiloxStream::PhiloxStream(std::uint64_t seed, std::uint32_t stream, std::uint64_t path)
    : key_(philox_key(seed)), stream_(stream), path_(path) {}

PhiloxCounter PhiloxStream::block(std::uint32_t block) const {
    return philox4x32_10({block, stream_, static_cast<std::uint32_t>(path_), static_cast<std::uint32_t>(path_ >> 32)},
                         key_);
}

std::array<double, 2> PhiloxStream::uniforms(std::uint32_t b) const {
    const auto w = block(b);
    return {uniform_open01(w[0], w[1]), uniform_open01(w[2], w[3])};
}

std::array<double, 2> PhiloxStream::normals(std::uint32_t b) const {
    const auto u = uniforms(b);
    const double r = std::sqrt(-2.0 * std::log(u[0]));
    const double a = 2.0 * std::numbers::pi * u[1];
    return {r * std::cos(a), r * std::sin(a)};
}

}  // namespace lastzero

#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
// Every draw is a pure function of (key, counter), so per-path substreams
// are addressed directly by path index.

#include <array>
#include <cstdint>

namespace lastzero {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key);

/// Key from a 64-bit seed (low word first).
PhiloxKey philox_key(std::uint64_t seed);

/// Uniform in (0, 1) from two 32-bit words using 52 bits.
double uniform_open01(std::uint32_t hi, std::uint32_t lo);

/// Addresses a stream of 4-word blocks: counter = {block, stream, path_lo, path_hi}.
class PhiloxStream {
public:
    PhiloxStream(std::uint64_t seed, std::uint32_t stream, std::uint64_t path);

    /// The four words of block `block`.
    PhiloxCounter block(std::uint32_t block) const;

    /// Two uniforms in (0, 1) from block `block`.
    std::array<double, 2> uniforms(std::uint32_t block) const;

    /// Two independent standard normals from block `block` (Box-Muller).
    std::array<double, 2> normals(std::uint32_t block) const;

private:
    PhiloxKey key_;
    std::uint32_t stream_;
    std::uint64_t path_;
};

}  // namespace lastzero

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace pricewar {

using Rng = std::mt19937_64;

/// Derives an independent generator from a master seed and a list of stream
/// coordinates (e.g. {customer, round}). The same coordinates always give the
/// same stream, so results do not depend on evaluation order or thread count.
inline Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> coords) {
    std::seed_seq::result_type words[16];
    std::size_t n = 0;
    words[n++] = static_cast<std::uint32_t>(seed);
    words[n++] = static_cast<std::uint32_t>(seed >> 32);
    for (std::uint64_t c : coords) {
        if (n + 2 > 16) break;
        words[n++] = static_cast<std::uint32_t>(c);
        words[n++] = static_cast<std::uint32_t>(c >> 32);
    }
    std::seed_seq seq(words, words + n);
    return Rng(seq);
}

/// Stateless 64-bit mix (splitmix64 finalizer). Used where one uniform draw per
/// key is needed without constructing a full generator.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Uniform in [0, 1) from a hashed key.
inline double keyed_uniform(std::uint64_t seed, std::uint64_t key) {
    return static_cast<double>(mix64(mix64(seed) ^ key) >> 11) * 0x1.0p-53;
}

}  // namespace pricewar

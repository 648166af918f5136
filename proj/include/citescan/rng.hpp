#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace citescan {

// All randomness in the pipeline flows through these helpers. std::shuffle and
// std::uniform_int_distribution are implementation-defined, so the shuffle is
// spelled out to keep seeded runs bit-identical across standard libraries.

inline std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound) {
    // bound must be >= 1. Rejection sampling keeps the draw unbiased.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t value;
    do {
        value = rng();
    } while (value >= limit);
    return value % bound;
}

template <typename T>
void deterministic_shuffle(std::vector<T>& items, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(bounded_draw(rng, i));
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace citescan

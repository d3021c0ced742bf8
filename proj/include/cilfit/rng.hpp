#pragma once

#include <cstdint>
#include <random>

namespace cilfit {

// splitmix64; used to decorrelate derived seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent stream for run `index` under a common base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return mix_seed(base ^ mix_seed(index + 1));
}

inline std::mt19937_64 make_rng(std::uint64_t seed) {
    return std::mt19937_64(mix_seed(seed));
}

}  // namespace cilfit

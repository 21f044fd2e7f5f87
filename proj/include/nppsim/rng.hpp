#pragma once

#include <cstdint>
#include <random>

namespace nppsim {

// splitmix64 finalizer. Used to fan a single master seed out into
// statistically independent streams keyed by integer tags.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base) { return base; }

template <class... Tags>
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag, Tags... rest) {
    return derive_seed(mix64(base ^ mix64(tag)), static_cast<std::uint64_t>(rest)...);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

// Stream tags for hierarchical seed fan-out: plant -> robot -> session -> purpose.
enum Stream : std::uint64_t {
    kStreamScenario = 101,
    kStreamSensorNoise = 102,
    kStreamSplit = 103,
    kStreamTrain = 104,
    kStreamQkd = 105,
    kStreamCipher = 106,
    kStreamValidation = 107,
    kStreamFault = 108,
};

}  // namespace nppsim

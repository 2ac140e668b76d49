#pragma once

#include <cstdint>
#include <random>

namespace pvwatch {

// Named RNG streams. Every source of randomness in the toolkit derives its
// generator from (user seed, stream tag, index) so results never depend on
// call order or thread schedule.
enum class RngStream : std::uint64_t {
    Weather = 1,
    LoadProfile = 2,
    PvAssignment = 3,
    AttackSelection = 4,
    IsoForest = 5,
    Corruption = 6,
    RandomForest = 7,
    NetInit = 8,
    NetShuffle = 9,
    DaeNoise = 10,
};

inline std::mt19937_64 make_rng(std::uint64_t seed, RngStream stream, std::uint64_t index = 0) {
    std::uint64_t tag = static_cast<std::uint64_t>(stream);
    std::seed_seq seq{
        static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
        static_cast<std::uint32_t>(tag),  static_cast<std::uint32_t>(tag >> 32),
        static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

} // namespace pvwatch

#pragma once

#include <cstdint>
#include <random>

namespace proco {

// splitmix64 step; used to derive well-separated seeds for named substreams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic substream derivation: the same (seed, stream, index) triple
// always yields the same engine, and distinct triples are decorrelated.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s ^= stream * 0x9e3779b97f4a7c15ULL;
    std::uint64_t b = splitmix64(s);
    s ^= index * 0xd1342543de82ef95ULL;
    std::uint64_t c = splitmix64(s);
    std::seed_seq seq{a, b, c};
    return std::mt19937_64(seq);
}

// Stable stream ids for the training loops.
namespace stream_id {
inline constexpr std::uint64_t kModelInit = 1;
inline constexpr std::uint64_t kShuffle = 2;
inline constexpr std::uint64_t kUnlabeledShuffle = 3;
inline constexpr std::uint64_t kViews = 4;
}  // namespace stream_id

}  // namespace proco

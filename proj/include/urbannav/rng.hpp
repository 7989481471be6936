#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace urbannav {

// splitmix64 step; used to derive independent seed streams from
// (base_seed, cell, trial, stream) tuples so trials can run on any number
// of workers and still be bit-reproducible.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Hash-combines an arbitrary list of 64-bit values into one seed.
inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x8f1bbcdc2f8f2b4dULL;
    for (std::uint64_t p : parts) {
        h = splitmix64(h ^ p);
    }
    return h;
}

using RngEngine = std::mt19937_64;

inline RngEngine make_engine(std::uint64_t seed) {
    return RngEngine(splitmix64(seed));
}

inline RngEngine make_engine(std::initializer_list<std::uint64_t> parts) {
    return RngEngine(mix_seed(parts));
}

// Fixed stream tags for the per-trial sub-generators.
namespace stream {
inline constexpr std::uint64_t kCityLayout = 0x10;
inline constexpr std::uint64_t kLandmarks = 0x11;
inline constexpr std::uint64_t kStartGoal = 0x12;
inline constexpr std::uint64_t kOdometry = 0x20;
inline constexpr std::uint64_t kCompass = 0x21;
inline constexpr std::uint64_t kDetection = 0x22;
inline constexpr std::uint64_t kGoalChain = 0x23;
} // namespace stream

} // namespace urbannav

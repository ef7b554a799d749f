#pragma once

#include <cstdint>

namespace ttr {

/// Named random streams derived from one master seed.
enum class Stream : std::uint64_t { instance = 1, environment = 2, algorithm = 3, test_task = 4 };

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Counter-based split: the same (master, stream, counter) always maps to the same seed.
inline std::uint64_t derive_seed(std::uint64_t master, Stream stream, std::uint64_t counter = 0) {
    return splitmix64(splitmix64(master ^ (static_cast<std::uint64_t>(stream) << 56)) + counter);
}

}  // namespace ttr

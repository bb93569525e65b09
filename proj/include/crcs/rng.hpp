#pragma once

#include <cstdint>

// Counter-based generator: every variate is a pure hash of
// (seed, stream, counter, dim), so draws are order-independent and a
// replication produces the same numbers on any thread.

namespace crcs {

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_(mix64(mix64(seed) ^ (0x632be59bd9b4e019ULL + mix64(stream)))) {}

    // Strictly inside (0,1); dim must be < 8.
    double uniform(std::uint64_t counter, std::uint64_t dim) const {
        std::uint64_t h = mix64(key_ ^ mix64(counter * 8ULL + dim));
        return (static_cast<double>(h >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }

  private:
    std::uint64_t key_;
};

}  // namespace crcs

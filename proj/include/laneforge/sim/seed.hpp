#pragma once

#include <cstdint>

namespace laneforge {

// Independent stream seed from (base, stream) via two splitmix64 rounds.
inline uint64_t DeriveSeed(uint64_t base, uint64_t stream) {
  auto mix = [](uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(base) ^ stream);
}

}  // namespace laneforge

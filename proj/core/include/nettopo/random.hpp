#pragma once

#include <cstdint>

namespace nettopo {

/// Derives an independent stream seed from a master seed and a stream index
/// (splitmix64 finaliser over the mixed pair). Used to hand each Monte Carlo
/// trial its own generator so results do not depend on scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace nettopo

#pragma once

#include <cstdint>

namespace maskguard {

// Independent sub-streams derived from one root seed.
enum class SeedStream : std::uint64_t {
  Noise = 1,
  Sweep = 2,
  Split = 3,
  Training = 4,
  Suite = 5,
};

std::uint64_t splitmix64(std::uint64_t x);

// seed = splitmix64(splitmix64(root ^ stream * C1) + index * C2)
std::uint64_t derive_seed(std::uint64_t root, SeedStream stream, std::uint64_t index);

}  // namespace maskguard

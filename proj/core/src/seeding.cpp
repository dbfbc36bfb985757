#include "maskguard/seeding.hpp"

namespace maskguard {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, SeedStream stream, std::uint64_t index) {
  const std::uint64_t s = static_cast<std::uint64_t>(stream);
  return splitmix64(splitmix64(root ^ (s * 0xD1B54A32D192ED03ULL)) + index * 0x9E3779B97F4A7C15ULL);
}

}  // namespace maskguard

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace coagent::util {

// FNV-1a, 64 bit. Non-cryptographic; used for content addressing and
// deterministic seed derivation only.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

// splitmix64 step; advances the state and returns the next value.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Uniform double in [0, 1) from 53 high bits.
inline double unit_double(std::uint64_t v) {
  return static_cast<double>(v >> 11) * 0x1.0p-53;
}

std::string hex64(std::uint64_t v);

// "fnv1a64:<16 hex chars>" digest tag for manifests and journals.
inline std::string content_digest(std::string_view bytes) {
  return "fnv1a64:" + hex64(fnv1a64(bytes));
}

// Mixes any number of 64-bit values into one seed.
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts);

}  // namespace coagent::util

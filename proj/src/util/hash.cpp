#include "coagent/util/hash.hpp"

#include <array>

namespace coagent::util {

std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[v & 0xF];
    v >>= 4;
  }
  return out;
}

std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t state = 0x6A09E667F3BCC908ULL;
  std::uint64_t acc = 0;
  for (std::uint64_t p : parts) {
    state ^= p;
    acc ^= splitmix64(state);
  }
  return acc;
}

}  // namespace coagent::util

#include "coagent/util/ids.hpp"

#include "coagent/util/hash.hpp"

namespace coagent::util {

std::string derive_run_id(std::uint64_t hi, std::uint64_t lo) {
  static constexpr char kAlphabet[] = "0123456789ABCDEFGHJKMNPQRSTVWXYZ";
  std::uint64_t state = hi;
  std::uint64_t a = splitmix64(state);
  state ^= lo;
  std::uint64_t b = splitmix64(state);
  std::uint64_t c = splitmix64(state);

  // 26 chars x 5 bits = 130 bits; draw from three 64-bit words.
  std::string out(26, '0');
  std::uint64_t words[3] = {a, b, c};
  int word = 0;
  int bits = 64;
  for (char& ch : out) {
    if (bits < 5) {
      ++word;
      bits = 64;
    }
    bits -= 5;
    ch = kAlphabet[(words[word] >> bits) & 0x1F];
  }
  return out;
}

}  // namespace coagent::util

#pragma once

#include <cstdint>
#include <string>

namespace coagent::util {

// 26-character Crockford-base32 identifier (ULID shape) derived entirely
// from the given seed material. No wall clock: identical inputs must give
// identical run directories.
std::string derive_run_id(std::uint64_t hi, std::uint64_t lo);

}  // namespace coagent::util

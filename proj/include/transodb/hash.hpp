#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace transodb {

inline constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = kFnvOffsetBasis;
  for (char ch : bytes) {
    h ^= static_cast<unsigned char>(ch);
    h *= kFnvPrime;
  }
  return h;
}

/// 16 lowercase hex digits, zero padded.
std::string hex16(std::uint64_t value);

}  // namespace transodb

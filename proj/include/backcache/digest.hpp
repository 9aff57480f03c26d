#pragma once

#include <cstdint>
#include <string>
#include <type_traits>

namespace backcache {

/// 64-bit FNV-1a. Integers are fed little-endian, byte by byte, so digests do
/// not depend on host byte order.
class Fnv1a {
 public:
  static constexpr std::uint64_t kOffsetBasis = 0xcbf29ce484222325ULL;
  static constexpr std::uint64_t kPrime = 0x100000001b3ULL;

  template <typename T>
    requires std::is_unsigned_v<T>
  void add(T value) {
    for (unsigned i = 0; i < sizeof(T); ++i) {
      state_ ^= static_cast<std::uint8_t>(value >> (8 * i));
      state_ *= kPrime;
    }
  }

  std::uint64_t value() const noexcept { return state_; }

  std::string hex() const {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
      out[static_cast<std::size_t>(i)] = kDigits[(state_ >> (4 * (15 - i))) & 0xf];
    }
    return out;
  }

 private:
  std::uint64_t state_ = kOffsetBasis;
};

}  // namespace backcache

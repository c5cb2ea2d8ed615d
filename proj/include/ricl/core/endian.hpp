#pragma once

#include <bit>
#include <cstdint>

namespace ricl {

constexpr std::uint32_t to_le32(std::uint32_t x) noexcept {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap32(x);
  return x;
}

constexpr std::uint64_t to_le64(std::uint64_t x) noexcept {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(x);
  return x;
}

}  // namespace ricl

#pragma once

#include <bit>
#include <cstdint>

namespace pixie {

/// Data word as carried through the grid. Values are kept sign-extended from
/// their hardware width, so a 8-bit 0xFF is stored as -1.
using Word = std::int64_t;

inline constexpr unsigned kMaxBitwidth = 64;

/// Truncate `value` to `bits` bits and sign-extend the result back to 64.
constexpr Word wrap_to_width(Word value, unsigned bits) {
  if (bits >= 64) return value;
  const std::uint64_t mask = (std::uint64_t{1} << bits) - 1;
  std::uint64_t u = static_cast<std::uint64_t>(value) & mask;
  if ((u >> (bits - 1)) & 1U) u |= ~mask;
  return static_cast<Word>(u);
}

/// ceil(log2(n)) for n >= 1.
constexpr unsigned ceil_log2(std::uint64_t n) {
  return n <= 1 ? 0U : static_cast<unsigned>(std::bit_width(n - 1));
}

/// Smallest signed width that can hold `magnitude` and its negation.
constexpr unsigned signed_width_for(std::uint64_t magnitude) {
  return static_cast<unsigned>(std::bit_width(magnitude)) + 1;
}

}  // namespace pixie

#pragma once

#include <cstdint>

#include "fadec/core/tensor.hpp"

namespace fadec {

/// v / 2^r rounded half away from zero. r = 0 returns v.
constexpr std::int64_t rshift_round(std::int64_t v, int r) {
  if (r <= 0) return v;
  if (r >= 64) return 0;
  const std::uint64_t mag = v < 0 ? std::uint64_t{0} - static_cast<std::uint64_t>(v)
                                  : static_cast<std::uint64_t>(v);
  const std::uint64_t q = (mag >> r) + ((mag >> (r - 1)) & 1u);
  return v < 0 ? -static_cast<std::int64_t>(q) : static_cast<std::int64_t>(q);
}

/// Saturate to the signed two's-complement range of `bits` bits.
constexpr std::int64_t clip(std::int64_t v, int bits) {
  const auto lo = qmin(bits);
  const auto hi = qmax(bits);
  return v < lo ? lo : (v > hi ? hi : v);
}

/// Move v from exponent `from` to exponent `to`: rounding right shift when
/// the exponent drops, exact left shift when it grows.
constexpr std::int64_t rescale(std::int64_t v, int from, int to) {
  return to <= from ? rshift_round(v, from - to) : v * (std::int64_t{1} << (to - from));
}

}  // namespace fadec

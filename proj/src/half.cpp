#include "fflp/half.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <ostream>

namespace fflp {

namespace {

constexpr int kDoubleFracBits = 52;
constexpr int kHalfFracBits = 10;
// Bits dropped when a normal double significand is narrowed to 11 bits.
constexpr int kNarrowShift = kDoubleFracBits - kHalfFracBits;

// Round the integer significand right by `shift` bits, ties to even.
constexpr std::uint64_t shift_rne(std::uint64_t sig, int shift) {
  if (shift <= 0) return sig << -shift;
  if (shift >= 64) return 0;
  const std::uint64_t kept = sig >> shift;
  const std::uint64_t rem = sig & ((std::uint64_t{1} << shift) - 1);
  const std::uint64_t halfway = std::uint64_t{1} << (shift - 1);
  if (rem > halfway || (rem == halfway && (kept & 1u))) return kept + 1;
  return kept;
}

}  // namespace

Half Half::from_double(double value) {
  const auto raw = std::bit_cast<std::uint64_t>(value);
  const auto sign = static_cast<std::uint16_t>((raw >> 48) & 0x8000u);
  const int exp_field = static_cast<int>((raw >> kDoubleFracBits) & 0x7FF);
  const std::uint64_t frac = raw & ((std::uint64_t{1} << kDoubleFracBits) - 1);

  if (exp_field == 0x7FF) {
    return from_bits(frac != 0 ? half_bits::kQuietNaN : static_cast<std::uint16_t>(sign | half_bits::kPosInf));
  }
  // Zero or binary64 subnormal: far below half the smallest binary16 subnormal.
  if (exp_field == 0) return from_bits(sign);

  const int exponent = exp_field - 1023;
  if (exponent > 15) return from_bits(static_cast<std::uint16_t>(sign | half_bits::kPosInf));

  const std::uint64_t sig = (std::uint64_t{1} << kDoubleFracBits) | frac;
  std::uint64_t magnitude = 0;
  if (exponent >= -14) {
    // Normal range; a rounding carry out of the significand bumps the exponent
    // field through the addition, and past 30 lands on the infinity pattern.
    magnitude = (static_cast<std::uint64_t>(exponent + 14) << kHalfFracBits) + shift_rne(sig, kNarrowShift);
  } else {
    // Subnormal range: LSB weight is 2^-24. Rounding up to 0x400 yields the
    // smallest normal, which is the correct encoding.
    magnitude = shift_rne(sig, kNarrowShift + (-14 - exponent));
  }
  if (magnitude >= half_bits::kPosInf) magnitude = half_bits::kPosInf;
  return from_bits(static_cast<std::uint16_t>(sign | magnitude));
}

double Half::to_double() const {
  const auto sign = static_cast<std::uint64_t>(bits_ & 0x8000u) << 48;
  const int exp_field = (bits_ >> kHalfFracBits) & 0x1F;
  const std::uint64_t frac = bits_ & 0x3FFu;
  if (exp_field == 0x1F) {
    if (frac != 0) return std::numeric_limits<double>::quiet_NaN();
    return std::bit_cast<double>(sign | 0x7FF0000000000000ull);
  }
  if (exp_field == 0) {
    const double magnitude = static_cast<double>(frac) * 0x1p-24;
    return sign != 0 ? -magnitude : magnitude;
  }
  const auto biased = static_cast<std::uint64_t>(exp_field - 15 + 1023);
  return std::bit_cast<double>(sign | (biased << kDoubleFracBits) | (frac << kNarrowShift));
}

namespace detail {

const std::array<float, 65536> kWiden = [] {
  std::array<float, 65536> t{};
  for (std::uint32_t b = 0; b < t.size(); ++b) {
    t[b] = static_cast<float>(Half::from_bits(static_cast<std::uint16_t>(b)).to_double());
  }
  return t;
}();

}  // namespace detail

Half halve(Half a) {
  if (a.is_nan()) return Half::from_bits(half_bits::kQuietNaN);
  const std::uint16_t bits = a.bits();
  const std::uint16_t sign = bits & 0x8000u;
  const int exp_field = (bits >> kHalfFracBits) & 0x1F;
  if (exp_field == 0x1F) return a;  // infinity
  if (exp_field >= 2) return Half::from_bits(static_cast<std::uint16_t>(bits - 0x0400u));

  // Exponent field 0 or 1: the result is subnormal (or the smallest normal
  // after a rounding carry). Shift the full significand right by one.
  std::uint64_t sig = bits & 0x3FFu;
  if (exp_field == 1) sig |= 0x400u;
  return Half::from_bits(static_cast<std::uint16_t>(sign | shift_rne(sig, 1)));
}

bool greater_equal(Half a, Half b) {
  if (a.is_nan() || b.is_nan()) return false;
  return detail::kWiden[a.bits()] >= detail::kWiden[b.bits()];
}

std::ostream& operator<<(std::ostream& os, Half h) {
  return os << h.to_double();
}

}  // namespace fflp

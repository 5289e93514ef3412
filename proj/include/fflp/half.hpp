#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <iosfwd>

namespace fflp {

/// IEEE 754 binary16 value held as its raw bit pattern.
///
/// Arithmetic is provided as free functions (add, mul, halve, ...) rather than
/// operators so that every rounding point in the datapath is visible at the
/// call site. All operations round to nearest, ties to even, and every NaN
/// result is the canonical quiet NaN 0x7E00.
class Half {
 public:
  constexpr Half() = default;

  static constexpr Half from_bits(std::uint16_t bits) {
    Half h;
    h.bits_ = bits;
    return h;
  }

  /// Correctly rounded (RNE) conversion from binary64.
  static Half from_double(double value);
  /// Correctly rounded (RNE) conversion from binary32.
  static Half from_float(float value);

  constexpr std::uint16_t bits() const { return bits_; }

  /// Exact widening conversion.
  double to_double() const;
  float to_float() const;

  constexpr bool is_nan() const { return (bits_ & 0x7C00u) == 0x7C00u && (bits_ & 0x03FFu) != 0; }
  constexpr bool is_inf() const { return (bits_ & 0x7FFFu) == 0x7C00u; }
  constexpr bool is_zero() const { return (bits_ & 0x7FFFu) == 0; }
  constexpr bool is_subnormal() const { return (bits_ & 0x7C00u) == 0 && (bits_ & 0x03FFu) != 0; }
  constexpr bool sign() const { return (bits_ & 0x8000u) != 0; }

  // Bit-pattern equality; NaN == NaN when the patterns match.
  friend constexpr bool operator==(Half a, Half b) { return a.bits_ == b.bits_; }

 private:
  std::uint16_t bits_ = 0;
};

namespace half_bits {
inline constexpr std::uint16_t kPosZero = 0x0000;
inline constexpr std::uint16_t kNegZero = 0x8000;
inline constexpr std::uint16_t kOne = 0x3C00;
inline constexpr std::uint16_t kHalf = 0x3800;
inline constexpr std::uint16_t kPosInf = 0x7C00;
inline constexpr std::uint16_t kNegInf = 0xFC00;
inline constexpr std::uint16_t kQuietNaN = 0x7E00;
inline constexpr std::uint16_t kMaxFinite = 0x7BFF;
inline constexpr std::uint16_t kMinNormal = 0x0400;
inline constexpr std::uint16_t kMinSubnormal = 0x0001;
}  // namespace half_bits

inline constexpr Half kHalfZero = Half::from_bits(half_bits::kPosZero);
inline constexpr Half kHalfOne = Half::from_bits(half_bits::kOne);

namespace detail {
// Widening table: every binary16 value is exactly representable in binary32.
extern const std::array<float, 65536> kWiden;
}  // namespace detail

inline float Half::to_float() const { return detail::kWiden[bits_]; }

inline Half Half::from_float(float value) {
  const auto raw = std::bit_cast<std::uint32_t>(value);
  const auto sign = static_cast<std::uint16_t>((raw >> 16) & 0x8000u);
  const std::uint32_t mag = raw & 0x7FFFFFFFu;
  if (mag > 0x7F800000u) return from_bits(half_bits::kQuietNaN);
  // 65520 and above rounds to infinity.
  if (mag >= 0x477FF000u) return from_bits(static_cast<std::uint16_t>(sign | half_bits::kPosInf));
  if (mag >= 0x38800000u) {
    // Normal result: rebias, then round the 13 dropped bits to nearest even.
    const std::uint32_t rebased = mag - (std::uint32_t{127 - 15} << 23);
    const std::uint32_t rounded = (rebased + 0x0FFFu + ((rebased >> 13) & 1u)) >> 13;
    return from_bits(static_cast<std::uint16_t>(sign | rounded));
  }
  // Subnormal result: adding 0.5 aligns the 2^-24 grid with the binary32 LSB
  // so the FPU performs the RNE rounding.
  const float aligned = std::bit_cast<float>(mag) + 0.5f;
  return from_bits(static_cast<std::uint16_t>(sign | (std::bit_cast<std::uint32_t>(aligned) - 0x3F000000u)));
}

// A binary32 sum or product of two binary16 values is either exact or carries
// at least 2p+1 significant bits, so rounding it once more to binary16 yields
// the correctly rounded result. NaN operands propagate through the binary32
// operation and come out canonical from from_float.
inline Half add(Half a, Half b) { return Half::from_float(a.to_float() + b.to_float()); }
inline Half mul(Half a, Half b) { return Half::from_float(a.to_float() * b.to_float()); }

/// Sign flip; exact for every pattern including NaN.
constexpr Half neg(Half a) { return Half::from_bits(static_cast<std::uint16_t>(a.bits() ^ 0x8000u)); }

/// Division by two without a multiplier: exponent decrement, or a rounded
/// one-bit right shift of the significand once the result leaves the normal
/// range. Bit-identical to mul(a, 0.5).
Half halve(Half a);

/// Spike-gated accumulation: acc when the spike bit is clear, add(acc, w) otherwise.
inline Half fused_psum(Half acc, Half w, bool spike) { return spike ? add(acc, w) : acc; }

/// a >= b under IEEE ordering (false when either operand is NaN; -0 >= +0).
bool greater_equal(Half a, Half b);

std::ostream& operator<<(std::ostream& os, Half h);

}  // namespace fflp

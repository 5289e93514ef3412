#pragma once

// Reference binary16 rounding used only by tests. Values are computed in
// x87 extended precision (64-bit significand, exact for every binary16 sum
// and product) and rounded by searching the sorted table of all finite
// binary16 values for the nearest neighbour, ties to the even pattern. This
// shares no code with the bit-manipulation rounding in the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace fflp::oracle {

inline long double decode(std::uint16_t bits) {
  const int sign = bits >> 15;
  const int e = (bits >> 10) & 0x1F;
  const int f = bits & 0x3FF;
  long double mag;
  if (e == 0x1F) {
    mag = f ? NAN : INFINITY;
  } else if (e == 0) {
    mag = std::ldexp(static_cast<long double>(f), -24);
  } else {
    mag = std::ldexp(static_cast<long double>(1024 + f), e - 25);
  }
  return sign ? -mag : mag;
}

struct Table {
  std::vector<long double> values;      // ascending, positive finite (incl. +0)
  std::vector<std::uint16_t> patterns;  // matching bit patterns
  Table() {
    for (std::uint32_t p = 0; p <= 0x7BFF; ++p) {
      values.push_back(decode(static_cast<std::uint16_t>(p)));
      patterns.push_back(static_cast<std::uint16_t>(p));
    }
  }
};

inline const Table& table() {
  static const Table t;
  return t;
}

/// Round an exact value to binary16, RNE, canonical NaN.
inline std::uint16_t round(long double x) {
  if (std::isnan(x)) return 0x7E00;
  const std::uint16_t sign = std::signbit(x) ? 0x8000 : 0;
  const long double mag = std::fabs(x);
  // 65520 = max finite + half ulp; the tie goes to the even (infinite) neighbour.
  if (mag >= 65520.0L) return sign | 0x7C00;
  const Table& t = table();
  auto it = std::lower_bound(t.values.begin(), t.values.end(), mag);
  std::size_t hi = static_cast<std::size_t>(it - t.values.begin());
  if (hi < t.values.size() && t.values[hi] == mag) return sign | t.patterns[hi];
  const std::size_t lo = hi - 1;
  std::uint16_t pick;
  if (hi == t.values.size()) {
    pick = t.patterns[lo];  // above max finite, below the overflow threshold
  } else {
    const long double dlo = mag - t.values[lo];
    const long double dhi = t.values[hi] - mag;
    if (dlo < dhi) {
      pick = t.patterns[lo];
    } else if (dhi < dlo) {
      pick = t.patterns[hi];
    } else {
      pick = (t.patterns[lo] & 1u) == 0 ? t.patterns[lo] : t.patterns[hi];
    }
  }
  return sign | pick;
}

inline std::uint16_t add(std::uint16_t a, std::uint16_t b) { return round(decode(a) + decode(b)); }
inline std::uint16_t mul(std::uint16_t a, std::uint16_t b) { return round(decode(a) * decode(b)); }

}  // namespace fflp::oracle

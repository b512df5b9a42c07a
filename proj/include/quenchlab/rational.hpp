#pragma once

#include <cstdint>
#include <numeric>

#include "quenchlab/common.hpp"

namespace quenchlab {

/// Exact rational coupling value. Instance files store couplings as
/// numerator/denominator so that regenerated and round-tripped instances are
/// bit-identical across platforms.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
    if (den == 0) throw ValidationError("Rational: zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  Rational half() const { return Rational(num, den * 2); }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
};

}  // namespace quenchlab

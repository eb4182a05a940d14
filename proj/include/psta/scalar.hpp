#pragma once

#include <algorithm>
#include <cmath>

namespace psta {

// sign(0) == 0
inline double sign(double x) {
  return (x > 0.0) ? 1.0 : ((x < 0.0) ? -1.0 : 0.0);
}

/// Signed power |x|^xi * sign(x). For xi == 0 this is sign(x).
inline double sgn_pow(double x, double xi) {
  if (xi == 0.0) {
    return sign(x);
  }
  if (x == 0.0) {
    return 0.0;
  }
  return std::pow(std::abs(x), xi) * sign(x);
}

/// Projection of x onto the interval [-bound, bound].
inline double proj_interval(double x, double bound) {
  if (std::abs(x) < bound) {
    return x;
  }
  return bound * sign(x);
}

/// proj_interval(x, bound) / bound evaluated without forming the quotient of
/// two small numbers. Lies in [-1, 1].
inline double proj_ratio(double x, double bound) {
  if (std::abs(x) >= bound) {
    return sign(x);
  }
  return std::clamp(x / bound, -1.0, 1.0);
}

}  // namespace psta

#pragma once

#include <algorithm>
#include <cmath>

#include "tikhoprox/core.hpp"

namespace tikhoprox {

// Scalar proximal maps used by the closed-form test problems.

// prox of lam * ( |.| + indicator([-a, a]) ): soft-threshold, then clamp.
// The two operations commute here because thresholding shrinks toward 0.
inline double prox_abs_box(double x, double lam, double a) {
  if (!(lam >= 0.0)) throw ConfigError("prox_abs_box: lam must be >= 0");
  if (!(a > 0.0)) throw ConfigError("prox_abs_box: a must be > 0");
  double mag = std::min(std::max(std::abs(x) - lam, 0.0), a);
  return x < 0.0 ? -mag : mag;
}

// prox of lam * (1/2)(y - v0)^2: stationarity (z - y) + lam (z - v0) = 0,
// i.e. z = (y + lam*v0) / (1 + lam). Always a strict convex combination of
// y and v0, so fixed points are exactly y = v0.
inline double prox_shifted_quad(double y, double lam, double v0) {
  if (!(lam >= 0.0)) throw ConfigError("prox_shifted_quad: lam must be >= 0");
  return (y + lam * v0) / (1.0 + lam);
}

// Sign-flipped variant kept for comparison: -(y - lam*v0)/(lam + 1).
// Not a proximal map of anything (it repels the fixed point y = v0 unless
// v0 = 0); see the unit test that exercises the fixed-point property.
inline double prox_shifted_quad_printed(double y, double lam, double v0) {
  if (!(lam >= 0.0)) throw ConfigError("prox_shifted_quad: lam must be >= 0");
  return -(y - lam * v0) / (lam + 1.0);
}

}  // namespace tikhoprox

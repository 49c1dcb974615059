#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include "chlab/kernels.hpp"

namespace chlab::kernels {

/// Outcome of the randomized strict-monotonicity check of the kernel
/// derivatives.  For every a < b and y outside [a, b]:
///   line:   -sgn(b-y) e^{-|b-y|}  >  -sgn(a-y) e^{-|a-y|}
///   circle: dG(b-y) > dG(a-y)  for 0 < a < b < 1, y in [0,1] \ [a,b],
/// together with the floor identities floor(b-y) = floor(a-y) = 0 for
/// y in [0,a) and = -1 for y in (b,1].
struct KernelCheckResult {
  std::uint64_t trials = 0;
  double min_margin_line = std::numeric_limits<double>::infinity();
  double min_margin_circle = std::numeric_limits<double>::infinity();
  std::uint64_t floor_mismatches = 0;

  bool passed() const {
    return min_margin_line > 0.0 && min_margin_circle > 0.0 &&
           floor_mismatches == 0;
  }
};

inline KernelCheckResult inequality_check(std::uint64_t trials,
                                          std::uint64_t seed) {
  if (trials < 1) {
    throw std::invalid_argument("inequality_check: trial count must be >= 1");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> line_ab(-5.0, 5.0);
  std::uniform_real_distribution<double> line_y(-8.0, 8.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  KernelCheckResult r;
  r.trials = trials;
  for (std::uint64_t t = 0; t < trials; ++t) {
    // Line case.
    double a = line_ab(rng), b = line_ab(rng);
    if (a > b) std::swap(a, b);
    while (a == b) b = line_ab(rng);
    double y = line_y(rng);
    while (y >= a && y <= b) y = line_y(rng);
    const double margin =
        2.0 * (line_kernel_deriv(b - y) - line_kernel_deriv(a - y));
    r.min_margin_line = std::min(r.min_margin_line, margin);

    // Circle case; resample arguments that land in the exclusion zone of dG.
    double ca, cb, cy;
    for (;;) {
      ca = unit(rng);
      cb = unit(rng);
      if (ca > cb) std::swap(ca, cb);
      if (ca <= 0.0 || cb >= 1.0 || ca == cb) continue;
      cy = unit(rng);
      if (cy > ca && cy < cb) continue;
      const double da = ca - cy, db = cb - cy;
      if (std::abs(da - std::round(da)) < kIntegerExclusionTol ||
          std::abs(db - std::round(db)) < kIntegerExclusionTol) {
        continue;
      }
      break;
    }
    const double cmargin =
        periodic_green_deriv(cb - cy) - periodic_green_deriv(ca - cy);
    r.min_margin_circle = std::min(r.min_margin_circle, cmargin);

    const double fa = std::floor(ca - cy), fb = std::floor(cb - cy);
    const double expected = cy < ca ? 0.0 : -1.0;
    if (fa != expected || fb != expected) ++r.floor_mismatches;
  }
  return r;
}

}  // namespace chlab::kernels

#include "cablesoup/brownian.hpp"

#include <cmath>

#include "cablesoup/errors.hpp"

namespace cablesoup {

namespace {

// Fill values[lo..hi] (endpoints already set) by recursive midpoints,
// level by level so the draw order only depends on (levels).
void fill_bridge(DyadicPath& p, RngStream& rng) {
  std::size_t n = p.size() - 1;  // 2^levels
  double dx = p.span / static_cast<double>(n);
  for (std::size_t step = n; step >= 2; step /= 2) {
    double seg = dx * static_cast<double>(step);  // current segment length
    double sd = 0.5 * std::sqrt(seg);             // midpoint Var = seg / 4
    for (std::size_t lo = 0; lo < n; lo += step) {
      std::size_t mid = lo + step / 2;
      p.values[mid] = 0.5 * (p.values[lo] + p.values[lo + step]) + sd * rng.normal();
    }
  }
}

}  // namespace

DyadicPath brownian_motion(double x0, double span, int levels, RngStream& rng) {
  if (span <= 0.0) throw InputError("brownian_motion: span must be positive");
  DyadicPath p = DyadicPath::with_levels(span, levels);
  p.kind = "brownian_motion";
  p.values.front() = x0;
  p.values.back() = x0 + std::sqrt(span) * rng.normal();
  if (levels > 0) fill_bridge(p, rng);
  return p;
}

DyadicPath brownian_bridge(double a, double b, double span, int levels, RngStream& rng) {
  if (span <= 0.0) throw InputError("brownian_bridge: span must be positive");
  DyadicPath p = DyadicPath::with_levels(span, levels);
  p.kind = "brownian_bridge";
  p.values.front() = a;
  p.values.back() = b;
  if (levels > 0) fill_bridge(p, rng);
  return p;
}

}  // namespace cablesoup

#pragma once

#include <vector>

#include "cablesoup/dyadic_path.hpp"
#include "cablesoup/rng.hpp"

namespace cablesoup {

// Reflected Brownian motion approximated by |SRW| on the lattice {k dx},
// dx = sqrt(step).  Local time at level k dx is visits_k * dx (doubled at the
// boundary site 0, whose bin is half as wide).  Profiles at inverse local
// times tau(h) = inf{t : ell_t(0) >= h} use an exact excursion-count shortcut
// above the height x_tail: the number of upcrossings one level higher is
// NegBin(U, 1/2) given U upcrossings below, so the (heavy) tail of every
// excursion is generated level by level instead of step by step.
struct ReflectedBmResult {
  double step = 0.0;
  double dx = 0.0;
  std::vector<double> local_time;  // indexed by site, level = site * dx
  double level = 0.0;              // target h (inverse-local-time stops only)
  double duration = 0.0;           // elapsed time, steps * step
  DyadicPath trajectory;           // fixed-horizon runs only
  bool has_trajectory = false;

  // Local time at the site nearest to x (x must be within dx/2 of a site).
  double local_time_at(double x) const;
};

inline constexpr double kDefaultTailHeight = 8.0;

// Run until the fixed horizon; optionally record a dyadic trajectory
// subsample with 2^trajectory_levels + 1 points (pass -1 to skip it).
ReflectedBmResult reflected_bm_with_local_time(double horizon, double step,
                                               int trajectory_levels, RngStream& rng);

// Run until tau(h).  No trajectory (the tail shortcut skips the steps).
ReflectedBmResult reflected_bm_at_inverse_local_time(double h, double step,
                                                     double x_tail, RngStream& rng);

// One walk observed at tau(h) for each level in ascending order; profiles are
// cumulative (the walk continues between stops).
std::vector<ReflectedBmResult> layered_inverse_local_time(
    const std::vector<double>& levels, double step, double x_tail, RngStream& rng);

}  // namespace cablesoup

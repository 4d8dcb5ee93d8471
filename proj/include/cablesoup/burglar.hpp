#pragma once

#include <cstdint>
#include <vector>

#include "cablesoup/dyadic_path.hpp"
#include "cablesoup/modulus.hpp"
#include "cablesoup/reflected_walk.hpp"
#include "cablesoup/rng.hpp"
#include "cablesoup/stats.hpp"

namespace cablesoup {

// Spatial local-time profile of a reflected Brownian motion stopped at the
// inverse local time tau(h).  In the spatial variable this is a squared
// Bessel process of dimension 0 started from h, which the tests verify
// against the exact transition law rather than assume.
struct LocalTimeProfile {
  double dx = 0.0;
  double step = 0.0;
  std::vector<double> values;  // site k sits at x = k * dx
  double level = 0.0;          // h
  double elapsed = 0.0;        // tau(h)

  double value_at(double x) const;  // nearest site; 0 beyond the support
};

LocalTimeProfile profile_at_inverse_local_time(double h, double step, RngStream& rng,
                                               double x_tail = kDefaultTailHeight);

// One trajectory snapshotted at each tau(h_j); profiles are cumulative, so
// consecutive differences are the layer increments.
std::vector<LocalTimeProfile> layered_profiles(const std::vector<double>& levels,
                                               double step, RngStream& rng,
                                               double x_tail = kDefaultTailHeight);

// The excursion local-time field: increments of the profile between
// consecutive local-time levels spaced delta_h apart, emitted at the levels
// where the increment is not identically zero.
struct ExcursionEntry {
  double h = 0.0;
  std::vector<double> profile;
};

struct ExcursionField {
  double dx = 0.0;
  double step = 0.0;
  double h_max = 0.0;
  double delta_h = 0.0;
  std::vector<ExcursionEntry> entries;
};

ExcursionField excursion_field(double h_max, double delta_h, double step, RngStream& rng,
                               double x_tail = kDefaultTailHeight);

// Restriction of a profile to the dyadic grid over [0, span] by nearest-site
// lookup (the profile is piecewise constant at the walk resolution).
DyadicPath profile_to_dyadic(const LocalTimeProfile& p, double span, int levels);

// The conditioned-profile fingerprint: per replica build X1 = profile at
// tau(h) and X2 = profile increment to tau(l), then run the adding-mechanism
// observation with F1 = X2, F2 = X1.  At near-quick points of the total
// profile, X1's quick ratio should dominate its value at uniform points.
struct Prop2Report {
  std::vector<double> treatment;
  std::vector<double> control;
  MannWhitneyResult mw;
};

Prop2Report proposition2_statistic(double h, double l, double step, double span,
                                   int levels, int j_min, std::size_t replicas,
                                   std::uint64_t seed);

}  // namespace cablesoup

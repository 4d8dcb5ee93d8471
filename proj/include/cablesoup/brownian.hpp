#pragma once

#include "cablesoup/dyadic_path.hpp"
#include "cablesoup/rng.hpp"

namespace cablesoup {

// Standard Brownian motion from x0 on [0, span], sampled exactly on the
// dyadic grid by midpoint refinement (endpoint first, then level by level).
DyadicPath brownian_motion(double x0, double span, int levels, RngStream& rng);

// Brownian bridge from a to b on [0, span], same refinement order.
DyadicPath brownian_bridge(double a, double b, double span, int levels, RngStream& rng);

}  // namespace cablesoup

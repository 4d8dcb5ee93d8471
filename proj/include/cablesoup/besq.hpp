#pragma once

#include <vector>

#include "cablesoup/dyadic_path.hpp"
#include "cablesoup/rng.hpp"

namespace cablesoup {

// Squared Bessel process of dimension delta >= 0:
//   dX = 2 sqrt(X) dB + delta dt,
// absorbed at 0 when delta = 0.  All samplers below are exact in law.

struct BesqParams {
  double x0 = 0.0;
  double delta = 0.0;
};

// One transition step: X_t given X_0 = x0, as the Poisson-Gamma mixture
// N ~ Poisson(x0 / (2t)), X ~ Gamma(N + delta/2, scale 2t).
double besq_transition(double x0, double delta, double t, RngStream& rng);

// Transition CDF and log density (testing and conditioning support).
double besq_transition_cdf(double x0, double delta, double t, double x);
double besq_transition_log_density(double x0, double delta, double t, double x);

// Forward path on the dyadic grid of [0, span], sequential exact transitions.
DyadicPath besq_path(double x0, double delta, double span, int levels, RngStream& rng);

// Law of the bridge midpoint: value at the center of an interval of length
// 2 dt whose endpoint values are y1 and y2.  Three regimes, all exact:
// both endpoints 0 (plain Gamma), one endpoint 0 (Poisson-Gamma mixture CDF),
// both positive (CDF of e^{-z/dt} I_nu(sqrt(y1 z)/dt) I_nu(sqrt(y2 z)/dt) dz,
// integrated by series or Gauss-Legendre panels).  Sampling is by CDF
// inversion: bisection plus secant, tolerance 1e-10, 200 iteration cap.
class BesqBridgeMidpoint {
 public:
  BesqBridgeMidpoint(double y1, double y2, double delta, double dt);

  double cdf(double z) const;
  double atom() const { return atom_; }  // mass at exactly 0 (delta = 0 only)
  double sample(RngStream& rng) const;

 private:
  enum class Mode { kZero, kGamma, kSeries, kPanels };

  double invert(double u) const;

  Mode mode_ = Mode::kZero;
  double delta_ = 0.0;
  double dt_ = 0.0;
  double atom_ = 0.0;
  // kSeries: mixture over total index M of Gamma(base_shape_ + M, dt).
  std::vector<double> weights_;
  double base_shape_ = 0.0;
  double z_hi_ = 0.0;
  // kPanels: prefix integrals of the density over [s_lo_, s_hi_] in s = sqrt(z).
  std::vector<double> panel_edges_;
  std::vector<double> panel_prefix_;
  double total_ = 0.0;
  double log_scale_ = 0.0;
  double nu_ = 0.0;
  double u1_ = 0.0, u2_ = 0.0;

  double log_density_s(double s) const;
  double panel_cdf_s(double s) const;
};

double besq_bridge_midpoint(double y1, double y2, double delta, double dt, RngStream& rng);

// Bridge from a to b over [0, span], recursive midpoint construction with
// the inversion sampler at every fill.
DyadicPath besq_bridge(double a, double b, double delta, double span, int levels,
                       RngStream& rng);

// Same law for integer delta in {1, 2, 3}: realize the bridge as the squared
// norm of a delta-dimensional Gaussian bridge whose terminal direction is
// drawn from the exponentially tilted sphere law.  Much faster on fine grids.
DyadicPath besq_bridge_gaussian(double a, double b, int delta, double span, int levels,
                                RngStream& rng);

}  // namespace cablesoup

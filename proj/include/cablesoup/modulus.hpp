#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "cablesoup/dyadic_path.hpp"
#include "cablesoup/rng.hpp"
#include "cablesoup/stats.hpp"

namespace cablesoup {

// Normalizer of the increment modulus: U(h) = sqrt(2 h log(1/h)), defined on
// (0, 1/e) where it is strictly increasing.
double u_of_h(double h);

// Multiscale increment ratios of a dyadic path: R(x) = max over dyadic
// scales h = span * 2^-j, j in [j_min, J], and both directions, of
// |F(x +- h) - F(x)| / U(h).  modulus_scan parallelizes over grid points;
// modulus_scan_reference is the serial loop with identical arithmetic, kept
// as the comparison baseline.
struct ModulusReport {
  double span = 1.0;
  int levels = 0;
  int j_min = 0;
  std::vector<double> scales;  // h for j = j_min..J
  std::vector<double> r;       // per grid point
};

ModulusReport modulus_scan(const DyadicPath& f, int j_min);
ModulusReport modulus_scan_reference(const DyadicPath& f, int j_min);

std::array<double, 5> r_quantiles(const ModulusReport& report);

// Grid indices with R(x) >= a (1 - eta): the finite-resolution stand-in for
// the a-fast points.
std::vector<std::size_t> fast_points(const ModulusReport& report, double a,
                                     double eta = 0.1);

// Quick points of a nonnegative path: F(x) > 0 and R(x) >= 2a(1-eta) sqrt(F(x)).
std::vector<std::size_t> quick_points(const DyadicPath& f, const ModulusReport& report,
                                      double a, double eta = 0.1);

// R(x) / (2 sqrt(F(x))) where F(x) > 0, else 0.
std::vector<double> quick_ratio(const DyadicPath& f, const ModulusReport& report);

// Box counts of the fast set over box sizes span * 2^-j, j in [8, J-4], and
// the log-log regression slope (the box dimension estimate).  A box counts as
// hit when the increment across it beats a(1-eta) times the modulus at the
// box's own size; a single cross-scale maximum would saturate the counts,
// because at coarse sizes a typical increment already sits near 0.6 U(h).
struct DimensionEstimate {
  double a = 0.0;
  std::vector<int> box_levels;
  std::vector<std::size_t> box_counts;
  double slope = 0.0;
  double slope_se = 0.0;
};

DimensionEstimate dimension_estimate(const DyadicPath& f, double a, double eta = 0.1);

// One paired observation of the adding mechanism: x* is the argmax of the
// quick ratio of F = F1 + F2 over {F1 > 0, F2 > 0} (ties to the smallest
// index); treatment reads F2's quick ratio at x*, control reads it at a
// uniform point of the same overlap set.
struct PairObservation {
  double treatment = 0.0;
  double control = 0.0;
  std::size_t argmax = 0;
};

PairObservation lemma1_observation(const DyadicPath& f1, const DyadicPath& f2, int j_min,
                                   RngStream& rng);

// Replicated test: draw_pair(t) supplies the t-th independent (F1, F2);
// one-sided Mann-Whitney that the treatment sample dominates the control.
struct Lemma1Report {
  std::vector<double> treatment;
  std::vector<double> control;
  MannWhitneyResult mw;
};

Lemma1Report lemma1_test(
    const std::function<std::pair<DyadicPath, DyadicPath>(std::uint64_t)>& draw_pair,
    std::size_t replicas, int j_min, std::uint64_t seed);

// Warm-up mechanism: Z = (B + B') / sqrt(2); at the top_k points of Z's
// ratio, both components should keep ratio >= tau0 more often than at
// uniform points.
struct WarmupObservation {
  double top_rate = 0.0;
  double random_rate = 0.0;
};

WarmupObservation warmup_observation(const DyadicPath& b1, const DyadicPath& b2,
                                     int j_min, int top_k, double tau0, RngStream& rng);

struct WarmupReport {
  std::vector<double> top_rate;
  std::vector<double> random_rate;
  MannWhitneyResult mw;
};

WarmupReport warmup_test(
    const std::function<std::pair<DyadicPath, DyadicPath>(std::uint64_t)>& draw_pair,
    std::size_t replicas, int j_min, int top_k, double tau0, std::uint64_t seed);

}  // namespace cablesoup

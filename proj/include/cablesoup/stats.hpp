#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace cablesoup {

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;  // sample size (effective size for the two-sample test)
};

// One-sample Kolmogorov-Smirnov against a right-continuous CDF.  Works for
// distributions with atoms (the occupation field at delta = 0 has mass at 0)
// because the comparison uses the supplied CDF values directly.
KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);

// Two-sample KS with the asymptotic Kolmogorov p-value at the effective
// sample size nm/(n+m).  Ties are handled by advancing both scans through
// equal values before recording the gap.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct MannWhitneyResult {
  double u = 0.0;          // rank-sum statistic of the first sample
  double z = 0.0;          // tie-corrected normal score
  double p_one_sided = 1;  // P(first sample stochastically larger)
};

// One-sided Mann-Whitney: small p means the first sample tends to exceed the
// second.  Normal approximation with tie correction and continuity correction.
MannWhitneyResult mann_whitney_greater(const std::vector<double>& a,
                                       const std::vector<double>& b);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

double mean(const std::vector<double>& v);
double sample_variance(const std::vector<double>& v);

// Variance-to-mean ratio with the normal-theory standard error sqrt(2/(n-1))
// under the Poisson null.
struct DispersionResult {
  double index = 1.0;
  double se = 0.0;
};
DispersionResult dispersion_index(const std::vector<double>& counts);

}  // namespace cablesoup

#pragma once

namespace cablesoup {

// log I_nu(x) for x > 0 and nu >= -1.  Power series below x = 40, uniform
// asymptotic expansion above; the two agree to ~1e-13 at the switch point.
// nu = -1 is mapped to nu = 1 (I_{-n} = I_n), which is what the squared
// Bessel bridge density needs in the absorbed (delta = 0) case.
double log_bessel_i(double nu, double x);

// Regularized lower incomplete gamma P(a, x): series for x < a + 1,
// continued fraction otherwise.
double gamma_p(double a, double x);

// Kolmogorov limit distribution tail Q(lambda) = 2 sum (-1)^{k-1} e^{-2 k^2 lambda^2}.
double kolmogorov_sf(double lambda);

// Standard normal CDF.
double normal_cdf(double z);

}  // namespace cablesoup

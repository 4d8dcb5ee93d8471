#include "cablesoup/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cablesoup/special.hpp"

namespace cablesoup {

KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  std::size_t n = samples.size();
  double d = 0.0;
  // Walk tied groups so distributions with atoms are treated correctly: the
  // empirical value just below the group is compared against the left limit
  // F(x-), not against the post-jump F(x).
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && samples[j + 1] == samples[i]) ++j;
    double f = cdf(samples[i]);
    double f_left = cdf(std::nextafter(samples[i], -std::numeric_limits<double>::infinity()));
    double lo = f_left - static_cast<double>(i) / n;
    double hi = static_cast<double>(j + 1) / n - f;
    d = std::max(d, std::max(lo, hi));
    i = j + 1;
  }
  double sqrt_n = std::sqrt(static_cast<double>(n));
  // Stephens' small-sample adjustment of the asymptotic distribution.
  double lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
  return {d, kolmogorov_sf(lambda), n};
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  double na = static_cast<double>(a.size());
  double nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(i / na - j / nb));
  }
  double n_eff = na * nb / (na + nb);
  KsResult r;
  r.statistic = d;
  r.p_value = kolmogorov_sf(std::sqrt(n_eff) * d);
  r.n = static_cast<std::size_t>(n_eff);
  return r;
}

MannWhitneyResult mann_whitney_greater(const std::vector<double>& a,
                                       const std::vector<double>& b) {
  std::size_t na = a.size(), nb = b.size();
  std::vector<std::pair<double, int>> all;
  all.reserve(na + nb);
  for (double v : a) all.emplace_back(v, 0);
  for (double v : b) all.emplace_back(v, 1);
  std::sort(all.begin(), all.end(),
            [](const auto& p, const auto& q) { return p.first < q.first; });

  std::size_t n = all.size();
  double rank_sum_a = 0.0;
  double tie_term = 0.0;  // sum of t^3 - t over tie groups
  std::size_t k = 0;
  while (k < n) {
    std::size_t k2 = k;
    while (k2 + 1 < n && all[k2 + 1].first == all[k].first) ++k2;
    double avg_rank = 0.5 * (k + k2) + 1.0;  // ranks are 1-based
    std::size_t t = k2 - k + 1;
    if (t > 1) tie_term += static_cast<double>(t) * t * t - t;
    for (std::size_t m = k; m <= k2; ++m) {
      if (all[m].second == 0) rank_sum_a += avg_rank;
    }
    k = k2 + 1;
  }

  double u = rank_sum_a - 0.5 * na * (na + 1.0);
  double mu = 0.5 * na * nb;
  double nn = static_cast<double>(n);
  double var = na * nb / 12.0 * ((nn + 1.0) - tie_term / (nn * (nn - 1.0)));
  MannWhitneyResult r;
  r.u = u;
  if (var <= 0.0) {
    r.z = 0.0;
    r.p_one_sided = 1.0;
    return r;
  }
  r.z = (u - mu - 0.5) / std::sqrt(var);
  r.p_one_sided = normal_cdf(-r.z);
  return r;
}

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  std::size_t n = x.size();
  double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (n > 2) {
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double r = y[i] - (f.intercept + f.slope * x[i]);
      ss_res += r * r;
    }
    f.slope_se = std::sqrt(ss_res / (n - 2) / sxx);
  }
  return f;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v) {
  double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

DispersionResult dispersion_index(const std::vector<double>& counts) {
  DispersionResult r;
  double m = mean(counts);
  r.index = sample_variance(counts) / m;
  r.se = std::sqrt(2.0 / (static_cast<double>(counts.size()) - 1.0));
  return r;
}

}  // namespace cablesoup

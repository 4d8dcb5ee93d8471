#include "cablesoup/modulus.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

#include "cablesoup/errors.hpp"

namespace cablesoup {

double u_of_h(double h) {
  if (!(h > 0.0) || h >= std::exp(-1.0)) {
    throw OutOfDomainError("u_of_h requires 0 < h < 1/e");
  }
  return std::sqrt(-2.0 * h * std::log(h));
}

namespace {

// R at one grid point; shared verbatim by the parallel scan and the serial
// reference so the two agree to the last bit.
double point_r(const std::vector<double>& v, std::size_t i,
               const std::vector<std::size_t>& offs, const std::vector<double>& u) {
  const std::size_t last = v.size() - 1;
  double best = 0.0;
  for (std::size_t s = 0; s < offs.size(); ++s) {
    const std::size_t off = offs[s];
    if (i >= off) {
      best = std::max(best, std::abs(v[i] - v[i - off]) / u[s]);
    }
    if (i + off <= last) {
      best = std::max(best, std::abs(v[i + off] - v[i]) / u[s]);
    }
  }
  return best;
}

ModulusReport scan_setup(const DyadicPath& f, int j_min, std::vector<std::size_t>& offs,
                         std::vector<double>& u) {
  if (j_min < 0) throw InputError("j_min must be nonnegative");
  if (f.levels < j_min + 4) throw InputError("path level must be at least j_min + 4");
  ModulusReport rep;
  rep.span = f.span;
  rep.levels = f.levels;
  rep.j_min = j_min;
  for (int j = j_min; j <= f.levels; ++j) {
    const double h = std::ldexp(f.span, -j);
    rep.scales.push_back(h);
    offs.push_back(std::size_t{1} << (f.levels - j));
    u.push_back(u_of_h(h));
  }
  rep.r.assign(f.size(), 0.0);
  return rep;
}

}  // namespace

ModulusReport modulus_scan(const DyadicPath& f, int j_min) {
  std::vector<std::size_t> offs;
  std::vector<double> u;
  ModulusReport rep = scan_setup(f, j_min, offs, u);
  const std::size_t n = f.size();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    rep.r[i] = point_r(f.values, i, offs, u);
  }
  return rep;
}

ModulusReport modulus_scan_reference(const DyadicPath& f, int j_min) {
  std::vector<std::size_t> offs;
  std::vector<double> u;
  ModulusReport rep = scan_setup(f, j_min, offs, u);
  for (std::size_t i = 0; i < f.size(); ++i) {
    rep.r[i] = point_r(f.values, i, offs, u);
  }
  return rep;
}

std::array<double, 5> r_quantiles(const ModulusReport& report) {
  std::vector<double> sorted = report.r;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  auto at = [&](double q) { return sorted[static_cast<std::size_t>(q * (n - 1))]; };
  return {sorted.front(), at(0.25), at(0.5), at(0.75), sorted.back()};
}

std::vector<std::size_t> fast_points(const ModulusReport& report, double a, double eta) {
  if (!(a > 0.0)) throw InputError("threshold a must be positive");
  const double cut = a * (1.0 - eta);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < report.r.size(); ++i) {
    if (report.r[i] >= cut) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> quick_points(const DyadicPath& f, const ModulusReport& report,
                                      double a, double eta) {
  if (!(a > 0.0)) throw InputError("threshold a must be positive");
  if (f.size() != report.r.size()) throw InputError("report does not match the path");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < report.r.size(); ++i) {
    if (f.values[i] > 0.0 &&
        report.r[i] >= 2.0 * a * (1.0 - eta) * std::sqrt(f.values[i])) {
      out.push_back(i);
    }
  }
  return out;
}

std::vector<double> quick_ratio(const DyadicPath& f, const ModulusReport& report) {
  if (f.size() != report.r.size()) throw InputError("report does not match the path");
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f.values[i] > 0.0) out[i] = report.r[i] / (2.0 * std::sqrt(f.values[i]));
  }
  return out;
}

DimensionEstimate dimension_estimate(const DyadicPath& f, double a, double eta) {
  if (!(a > 0.0 && a < 1.0)) throw InputError("dimension estimate needs 0 < a < 1");
  const int j_lo = 8, j_hi = f.levels - 4;
  if (j_hi - j_lo + 1 < 2) {
    throw InsufficientScalesError("need at least two box levels in [8, J-4]");
  }

  DimensionEstimate est;
  est.a = a;
  std::vector<double> xs, ys;
  for (int j = j_lo; j <= j_hi; ++j) {
    const double h = f.span * std::ldexp(1.0, -j);
    if (h >= std::exp(-1.0)) continue;
    const double threshold = a * (1.0 - eta) * u_of_h(h);
    const std::size_t stride = std::size_t{1} << (f.levels - j);
    std::size_t count = 0;
    for (std::size_t k = 0; k + stride < f.values.size(); k += stride) {
      if (std::abs(f.values[k + stride] - f.values[k]) >= threshold) ++count;
    }
    est.box_levels.push_back(j);
    est.box_counts.push_back(count);
    if (count > 0) {
      xs.push_back(j * std::log(2.0));
      ys.push_back(std::log(static_cast<double>(count)));
    }
  }
  if (xs.size() < 2) {
    throw InsufficientScalesError("fast set too sparse for a box-count regression");
  }
  const LinearFit fit = least_squares(xs, ys);
  est.slope = fit.slope;
  est.slope_se = fit.slope_se;
  return est;
}

PairObservation lemma1_observation(const DyadicPath& f1, const DyadicPath& f2, int j_min,
                                   RngStream& rng) {
  if (f1.size() != f2.size() || f1.span != f2.span) {
    throw InputError("component paths must share the grid");
  }
  DyadicPath sum = f1;
  for (std::size_t i = 0; i < sum.size(); ++i) sum.values[i] += f2.values[i];

  std::vector<std::size_t> overlap;
  for (std::size_t i = 0; i < sum.size(); ++i) {
    if (f1.values[i] > 0.0 && f2.values[i] > 0.0) overlap.push_back(i);
  }
  if (overlap.empty()) {
    throw EmptyOverlapError("no grid point has both components positive");
  }

  const ModulusReport rep_sum = modulus_scan(sum, j_min);
  const ModulusReport rep_f2 = modulus_scan(f2, j_min);

  PairObservation obs;
  double best = -1.0;
  for (std::size_t i : overlap) {
    const double q = rep_sum.r[i] / (2.0 * std::sqrt(sum.values[i]));
    if (q > best) {
      best = q;
      obs.argmax = i;
    }
  }
  const std::size_t ctrl = overlap[rng.uniform_index(overlap.size())];
  obs.treatment = rep_f2.r[obs.argmax] / (2.0 * std::sqrt(f2.values[obs.argmax]));
  obs.control = rep_f2.r[ctrl] / (2.0 * std::sqrt(f2.values[ctrl]));
  return obs;
}

Lemma1Report lemma1_test(
    const std::function<std::pair<DyadicPath, DyadicPath>(std::uint64_t)>& draw_pair,
    std::size_t replicas, int j_min, std::uint64_t seed) {
  Lemma1Report report;
  report.treatment.assign(replicas, 0.0);
  report.control.assign(replicas, 0.0);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t t = 0; t < replicas; ++t) {
    try {
      const auto [f1, f2] = draw_pair(t);
      RngStream ctrl(seed, "lemma1-control", t);
      const PairObservation obs = lemma1_observation(f1, f2, j_min, ctrl);
      report.treatment[t] = obs.treatment;
      report.control[t] = obs.control;
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  report.mw = mann_whitney_greater(report.treatment, report.control);
  return report;
}

WarmupObservation warmup_observation(const DyadicPath& b1, const DyadicPath& b2,
                                     int j_min, int top_k, double tau0, RngStream& rng) {
  if (b1.size() != b2.size() || b1.span != b2.span) {
    throw InputError("component paths must share the grid");
  }
  if (top_k <= 0) throw InputError("top_k must be positive");
  DyadicPath z = b1;
  const double root_half = std::sqrt(0.5);
  for (std::size_t i = 0; i < z.size(); ++i) {
    z.values[i] = (b1.values[i] + b2.values[i]) * root_half;
  }
  const ModulusReport rep_z = modulus_scan(z, j_min);
  const ModulusReport rep_1 = modulus_scan(b1, j_min);
  const ModulusReport rep_2 = modulus_scan(b2, j_min);

  std::vector<std::size_t> order(rep_z.r.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t k = std::min<std::size_t>(top_k, order.size());
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (rep_z.r[a] != rep_z.r[b]) return rep_z.r[a] > rep_z.r[b];
                      return a < b;
                    });

  auto passes = [&](std::size_t i) {
    return std::min(rep_1.r[i], rep_2.r[i]) >= tau0 ? 1.0 : 0.0;
  };
  WarmupObservation obs;
  for (std::size_t t = 0; t < k; ++t) obs.top_rate += passes(order[t]);
  obs.top_rate /= static_cast<double>(k);
  for (std::size_t t = 0; t < k; ++t) {
    obs.random_rate += passes(rng.uniform_index(rep_z.r.size()));
  }
  obs.random_rate /= static_cast<double>(k);
  return obs;
}

WarmupReport warmup_test(
    const std::function<std::pair<DyadicPath, DyadicPath>(std::uint64_t)>& draw_pair,
    std::size_t replicas, int j_min, int top_k, double tau0, std::uint64_t seed) {
  WarmupReport report;
  report.top_rate.assign(replicas, 0.0);
  report.random_rate.assign(replicas, 0.0);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t t = 0; t < replicas; ++t) {
    try {
      const auto [b1, b2] = draw_pair(t);
      RngStream ctrl(seed, "warmup-control", t);
      const WarmupObservation obs = warmup_observation(b1, b2, j_min, top_k, tau0, ctrl);
      report.top_rate[t] = obs.top_rate;
      report.random_rate[t] = obs.random_rate;
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  report.mw = mann_whitney_greater(report.top_rate, report.random_rate);
  return report;
}

}  // namespace cablesoup

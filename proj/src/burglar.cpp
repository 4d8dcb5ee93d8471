#include "cablesoup/burglar.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <utility>

#include "cablesoup/errors.hpp"

namespace cablesoup {

double LocalTimeProfile::value_at(double x) const {
  if (!std::isfinite(x) || x < 0.0) {
    throw InputError("profile position must be finite and nonnegative");
  }
  const std::size_t k = static_cast<std::size_t>(std::llround(x / dx));
  return k < values.size() ? values[k] : 0.0;
}

namespace {

LocalTimeProfile from_walk(const ReflectedBmResult& walk) {
  LocalTimeProfile p;
  p.dx = walk.dx;
  p.step = walk.step;
  p.values = walk.local_time;
  p.level = walk.level;
  p.elapsed = walk.duration;
  return p;
}

}  // namespace

LocalTimeProfile profile_at_inverse_local_time(double h, double step, RngStream& rng,
                                               double x_tail) {
  if (h < 0.0) throw InputError("local-time level must be nonnegative");
  if (h == 0.0) {
    LocalTimeProfile p;
    p.dx = std::sqrt(step);
    p.step = step;
    p.values = {0.0};
    return p;
  }
  return from_walk(reflected_bm_at_inverse_local_time(h, step, x_tail, rng));
}

std::vector<LocalTimeProfile> layered_profiles(const std::vector<double>& levels,
                                               double step, RngStream& rng,
                                               double x_tail) {
  std::vector<LocalTimeProfile> out;
  for (const ReflectedBmResult& walk :
       layered_inverse_local_time(levels, step, x_tail, rng)) {
    out.push_back(from_walk(walk));
  }
  return out;
}

ExcursionField excursion_field(double h_max, double delta_h, double step, RngStream& rng,
                               double x_tail) {
  if (!(h_max > 0.0)) throw InputError("h_max must be positive");
  if (!(delta_h > 0.0)) throw InputError("delta_h must be positive");
  const int n = std::max(1, static_cast<int>(std::floor(h_max / delta_h + 1e-9)));
  std::vector<double> levels(n);
  for (int j = 0; j < n; ++j) levels[j] = (j + 1) * delta_h;
  const std::vector<LocalTimeProfile> profiles = layered_profiles(levels, step, rng, x_tail);

  ExcursionField field;
  field.dx = profiles.front().dx;
  field.step = step;
  field.h_max = h_max;
  field.delta_h = delta_h;
  std::vector<double> prev;
  for (int j = 0; j < n; ++j) {
    const std::vector<double>& cur = profiles[j].values;
    std::vector<double> inc(cur.size(), 0.0);
    double peak = 0.0;
    for (std::size_t k = 0; k < cur.size(); ++k) {
      const double below = k < prev.size() ? prev[k] : 0.0;
      inc[k] = cur[k] - below;
      peak = std::max(peak, inc[k]);
    }
    if (peak > 0.0) {
      // the profile of everything straddling local-time level (j) delta_h
      field.entries.push_back({j * delta_h, std::move(inc)});
    }
    prev = cur;
  }
  return field;
}

DyadicPath profile_to_dyadic(const LocalTimeProfile& p, double span, int levels) {
  DyadicPath out = DyadicPath::with_levels(span, levels);
  out.kind = "local-time-profile";
  const std::size_t n = out.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double x = out.position(i);
    const std::size_t k = static_cast<std::size_t>(std::llround(x / p.dx));
    out.values[i] = k < p.values.size() ? p.values[k] : 0.0;
  }
  return out;
}

Prop2Report proposition2_statistic(double h, double l, double step, double span,
                                   int levels, int j_min, std::size_t replicas,
                                   std::uint64_t seed) {
  if (!(h > 0.0)) throw InputError("h must be positive");
  if (l < h) throw InputError("l must be at least h");
  if (l == h) {
    // The increment between equal levels is identically zero, so there is
    // nothing for the adding mechanism to observe.
    throw EmptyOverlapError("local time increment is identically zero at l = h");
  }
  if (replicas == 0) throw InputError("need at least one replica");

  Prop2Report report;
  report.treatment.assign(replicas, 0.0);
  report.control.assign(replicas, 0.0);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t t = 0; t < replicas; ++t) {
    try {
      RngStream walk_rng(seed, "prop2-walk", t);
      const std::vector<LocalTimeProfile> snaps =
          layered_profiles({h, l}, step, walk_rng);
      const LocalTimeProfile& at_h = snaps[0];
      const LocalTimeProfile& at_l = snaps[1];
      LocalTimeProfile increment;
      increment.dx = at_l.dx;
      increment.step = at_l.step;
      increment.level = l - h;
      increment.values.assign(at_l.values.size(), 0.0);
      for (std::size_t k = 0; k < at_l.values.size(); ++k) {
        const double below = k < at_h.values.size() ? at_h.values[k] : 0.0;
        increment.values[k] = at_l.values[k] - below;
      }
      const DyadicPath f1 = profile_to_dyadic(increment, span, levels);
      const DyadicPath f2 = profile_to_dyadic(at_h, span, levels);
      RngStream ctrl(seed, "prop2-control", t);
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

}  // namespace cablesoup

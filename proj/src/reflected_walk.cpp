#include "cablesoup/reflected_walk.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

#include "cablesoup/errors.hpp"

namespace cablesoup {

namespace {

constexpr double kMaxStep = 1e-2;

void check_step(double step) {
  if (step <= 0.0) throw InputError("step must be positive");
  if (step > kMaxStep) {
    throw StepTooCoarseError("reflected walk step must be <= 1e-2");
  }
}

// One random bit at a time out of 64-bit blocks; the walk consumes billions.
class BitSource {
 public:
  explicit BitSource(RngStream& rng) : rng_(rng) {}
  bool next() {
    if (left_ == 0) {
      bits_ = rng_.next_u64();
      left_ = 64;
    }
    bool b = bits_ & 1;
    bits_ >>= 1;
    --left_;
    return b;
  }

 private:
  RngStream& rng_;
  std::uint64_t bits_ = 0;
  int left_ = 0;
};

}  // namespace

double ReflectedBmResult::local_time_at(double x) const {
  double site_f = x / dx;
  auto site = static_cast<std::size_t>(std::llround(site_f));
  if (std::fabs(site_f - static_cast<double>(site)) > 0.5 + 1e-9) {
    throw InputError("local_time_at: position does not line up with the lattice");
  }
  if (site >= local_time.size()) return 0.0;
  return local_time[site];
}

ReflectedBmResult reflected_bm_with_local_time(double horizon, double step,
                                               int trajectory_levels, RngStream& rng) {
  check_step(step);
  if (horizon <= 0.0) throw InputError("horizon must be positive");
  double dx = std::sqrt(step);
  auto n_steps = static_cast<std::uint64_t>(std::llround(horizon / step));
  if (n_steps == 0) n_steps = 1;

  ReflectedBmResult out;
  out.step = step;
  out.dx = dx;
  std::vector<std::uint64_t> visits;
  visits.assign(256, 0);
  BitSource bits(rng);

  std::uint64_t record_every = 0;
  std::size_t traj_n = 0;
  if (trajectory_levels >= 0) {
    traj_n = std::size_t{1} << trajectory_levels;
    out.trajectory = DyadicPath::with_levels(static_cast<double>(n_steps) * step,
                                             trajectory_levels);
    out.trajectory.kind = "reflected_bm";
    out.has_trajectory = true;
    record_every = n_steps / traj_n;
    if (record_every == 0) {
      throw InputError("trajectory grid finer than the walk itself");
    }
  }

  std::size_t pos = 0;
  visits[0] = 1;
  if (out.has_trajectory) out.trajectory.values[0] = 0.0;
  for (std::uint64_t t = 1; t <= n_steps; ++t) {
    if (pos == 0) {
      pos = 1;
    } else {
      pos = bits.next() ? pos + 1 : pos - 1;
    }
    if (pos >= visits.size()) visits.resize(visits.size() * 2, 0);
    ++visits[pos];
    if (out.has_trajectory && t % record_every == 0 && t / record_every <= traj_n) {
      out.trajectory.values[t / record_every] = static_cast<double>(pos) * dx;
    }
  }

  std::size_t top = visits.size();
  while (top > 1 && visits[top - 1] == 0) --top;
  out.local_time.resize(top);
  out.local_time[0] = 2.0 * static_cast<double>(visits[0]) * dx;
  for (std::size_t k = 1; k < top; ++k) {
    out.local_time[k] = static_cast<double>(visits[k]) * dx;
  }
  out.duration = static_cast<double>(n_steps) * step;
  return out;
}

std::vector<ReflectedBmResult> layered_inverse_local_time(
    const std::vector<double>& levels, double step, double x_tail, RngStream& rng) {
  check_step(step);
  if (levels.empty()) throw InputError("need at least one local time level");
  double dx = std::sqrt(step);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] <= 0.0) throw InputError("local time levels must be positive");
    if (i > 0 && levels[i] <= levels[i - 1]) {
      throw InputError("local time levels must be strictly increasing");
    }
  }

  bool capped = std::isfinite(x_tail);
  std::size_t tail_site = 0;
  std::vector<std::uint64_t> visits;
  if (capped) {
    if (x_tail < 2.0 * dx) throw InputError("x_tail must be at least two lattice sites");
    tail_site = static_cast<std::size_t>(std::floor(x_tail / dx));
    visits.assign(tail_site + 1, 0);
  } else {
    visits.assign(256, 0);
  }

  BitSource bits(rng);
  std::size_t pos = 0;
  visits[0] = 1;
  std::uint64_t total_visits = 1;

  std::vector<ReflectedBmResult> out;
  out.reserve(levels.size());
  std::vector<double> tail_cumulative;  // visit counts above the cap, cumulative

  for (double h : levels) {
    // The local time at the origin is 2 dx per completed excursion; the
    // initial visit starts one but the stopping visit does not, so the walk
    // must return to zero target + 1 times for target completed excursions.
    // Stopping one visit short leaves every interior mean low by a factor
    // (target - 1) / target.
    auto target = static_cast<std::uint64_t>(std::ceil(h / (2.0 * dx)));
    if (target == 0) target = 1;
    std::uint64_t tail_upcross = 0;

    while (visits[0] < target + 1 || pos != 0) {
      if (pos == 0) {
        pos = 1;  // reflection
      } else if (capped && pos == tail_site) {
        if (bits.next()) {
          // Up-move: the whole excursion above the cap is pooled; the walk
          // is back at the cap site when it ends.
          ++tail_upcross;
          ++visits[tail_site];
          ++total_visits;
          continue;
        }
        pos = tail_site - 1;
      } else {
        pos = bits.next() ? pos + 1 : pos - 1;
      }
      if (pos >= visits.size()) visits.resize(visits.size() * 2, 0);
      ++visits[pos];
      ++total_visits;
    }

    // Expand this stretch's pooled excursions by critical branching
    // (upcrossings one level higher are NegBin(u, 1/2) given u below) and
    // fold the visit counts into the cumulative tail profile.
    if (tail_upcross > 0) {
      std::uint64_t u = tail_upcross;
      std::size_t lvl = 0;
      while (u > 0) {
        std::uint64_t next = rng.negative_binomial(u, 0.5);
        if (lvl >= tail_cumulative.size()) tail_cumulative.resize(lvl + 1, 0.0);
        tail_cumulative[lvl] += static_cast<double>(u + next);
        total_visits += u + next;
        u = next;
        ++lvl;
        if (lvl > (std::size_t{1} << 26)) {
          throw TruncationTooTightError("excursion tail exceeded 2^26 levels");
        }
      }
    }

    ReflectedBmResult r;
    r.step = step;
    r.dx = dx;
    r.level = h;
    std::size_t top = visits.size();
    while (top > 1 && visits[top - 1] == 0) --top;
    r.local_time.resize(top);
    r.local_time[0] = 2.0 * static_cast<double>(visits[0] - 1) * dx;
    for (std::size_t k = 1; k < top; ++k) {
      r.local_time[k] = static_cast<double>(visits[k]) * dx;
    }
    if (capped && !tail_cumulative.empty()) {
      r.local_time.resize(tail_site + 1 + tail_cumulative.size(), 0.0);
      for (std::size_t k = 0; k < tail_cumulative.size(); ++k) {
        r.local_time[tail_site + 1 + k] = tail_cumulative[k] * dx;
      }
    }
    r.duration = static_cast<double>(total_visits - 1) * step;
    out.push_back(std::move(r));
  }
  return out;
}

ReflectedBmResult reflected_bm_at_inverse_local_time(double h, double step,
                                                     double x_tail, RngStream& rng) {
  std::vector<double> one{h};
  auto v = layered_inverse_local_time(one, step, x_tail, rng);
  return std::move(v.front());
}

}  // namespace cablesoup

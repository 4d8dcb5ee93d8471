#include "cablesoup/besq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cablesoup/brownian.hpp"
#include "cablesoup/errors.hpp"
#include "cablesoup/special.hpp"

namespace cablesoup {

namespace {

constexpr double kInvTol = 1e-10;  // CDF inversion tolerance
constexpr int kInvCap = 200;       // iteration cap
constexpr double kSeriesLimit = 60.0;  // switch to panel integration above

void check_besq_args(double delta, double t) {
  if (delta < 0.0) throw InputError("squared Bessel dimension must be >= 0");
  if (t <= 0.0) throw InputError("squared Bessel time step must be positive");
}

// 20-point Gauss-Legendre rule on [-1, 1], nodes by Newton iteration.
struct Gl20 {
  double x[20];
  double w[20];
  Gl20() {
    const int n = 20;
    for (int i = 0; i < n / 2 + 1; ++i) {
      double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = t;
        for (int k = 2; k <= n; ++k) {
          double pk = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = pk;
        }
        dp = n * (t * p1 - p0) / (t * t - 1.0);
        double step = p1 / dp;
        t -= step;
        if (std::fabs(step) < 1e-15) {
          p0 = 1.0;
          p1 = t;
          for (int k = 2; k <= n; ++k) {
            double pk = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
          }
          dp = n * (t * p1 - p0) / (t * t - 1.0);
          break;
        }
      }
      x[i] = -t;
      x[n - 1 - i] = t;
      double wi = 2.0 / ((1.0 - t * t) * dp * dp);
      w[i] = wi;
      w[n - 1 - i] = wi;
    }
  }
};

const Gl20& gl20() {
  static const Gl20 rule;
  return rule;
}

}  // namespace

double besq_transition(double x0, double delta, double t, RngStream& rng) {
  check_besq_args(delta, t);
  if (x0 < 0.0) throw InputError("squared Bessel state must be >= 0");
  std::uint64_t n = x0 > 0.0 ? rng.poisson(x0 / (2.0 * t)) : 0;
  return rng.gamma(static_cast<double>(n) + 0.5 * delta, 2.0 * t);
}

double besq_transition_cdf(double x0, double delta, double t, double x) {
  check_besq_args(delta, t);
  if (x < 0.0) return 0.0;
  double lam = x0 / (2.0 * t);
  double y = x / (2.0 * t);
  if (lam == 0.0) {
    if (delta == 0.0) return 1.0;  // absorbed immediately
    return gamma_p(0.5 * delta, y);
  }
  std::size_t n_max =
      static_cast<std::size_t>(std::ceil(lam + 12.0 * std::sqrt(lam + 1.0) + 30.0));
  double log_pmf = -lam;  // Poisson pmf at n = 0, in logs
  double cdf = 0.0;
  double shape = 0.5 * delta;
  double p_shape, term;
  std::size_t n0 = 0;
  if (shape == 0.0) {
    // n = 0 component is the atom at 0.
    if (y >= 0.0) cdf += std::exp(log_pmf);
    log_pmf += std::log(lam) - std::log(1.0);
    n0 = 1;
    shape = 1.0;
  }
  if (y <= 0.0) return cdf;
  p_shape = gamma_p(shape, y);
  term = std::exp(shape * std::log(y) - y - std::lgamma(shape + 1.0));
  for (std::size_t n = n0; n <= n_max; ++n) {
    cdf += std::exp(log_pmf) * p_shape;
    log_pmf += std::log(lam) - std::log(static_cast<double>(n + 1));
    p_shape = std::max(0.0, p_shape - term);
    term *= y / (shape + 1.0);
    shape += 1.0;
  }
  return std::fmin(1.0, cdf);
}

double besq_transition_log_density(double x0, double delta, double t, double x) {
  check_besq_args(delta, t);
  if (x <= 0.0) throw InputError("transition density is for the continuous part x > 0");
  if (x0 == 0.0) {
    if (delta == 0.0) return -std::numeric_limits<double>::infinity();
    double a = 0.5 * delta;
    return (a - 1.0) * std::log(x) - x / (2.0 * t) - std::lgamma(a) - a * std::log(2.0 * t);
  }
  double nu = 0.5 * delta - 1.0;
  return -std::log(2.0 * t) + 0.5 * nu * std::log(x / x0) - (x + x0) / (2.0 * t) +
         log_bessel_i(nu, std::sqrt(x * x0) / t);
}

DyadicPath besq_path(double x0, double delta, double span, int levels, RngStream& rng) {
  if (span <= 0.0) throw InputError("besq_path: span must be positive");
  if (x0 < 0.0) throw InputError("besq_path: start must be >= 0");
  DyadicPath p = DyadicPath::with_levels(span, levels);
  p.kind = "besq_path";
  double du = p.dx();
  p.values[0] = x0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    p.values[i] = besq_transition(p.values[i - 1], delta, du, rng);
  }
  return p;
}

BesqBridgeMidpoint::BesqBridgeMidpoint(double y1, double y2, double delta, double dt)
    : delta_(delta), dt_(dt) {
  check_besq_args(delta, dt);
  if (y1 < 0.0 || y2 < 0.0) throw InputError("bridge endpoints must be >= 0");

  if (y1 == 0.0 && y2 == 0.0) {
    if (delta == 0.0) {
      mode_ = Mode::kZero;
      atom_ = 1.0;
    } else {
      mode_ = Mode::kGamma;
      base_shape_ = 0.5 * delta;
      z_hi_ = dt * (base_shape_ + 12.0 * std::sqrt(base_shape_ + 1.0) + 30.0);
    }
    return;
  }

  double a1 = y1 / (4.0 * dt);
  double a2 = y2 / (4.0 * dt);

  if (y1 == 0.0 || y2 == 0.0) {
    // Poisson(y/(4 dt)) mixture of Gamma(delta/2 + j, dt).
    double a = a1 + a2;
    if (delta == 0.0) atom_ = std::exp(-a);
    if (a <= kSeriesLimit) {
      mode_ = Mode::kSeries;
      base_shape_ = 0.5 * delta;
      std::size_t j_max =
          static_cast<std::size_t>(std::ceil(a + 12.0 * std::sqrt(a + 1.0) + 30.0));
      weights_.resize(j_max + 1);
      double log_pmf = -a;
      for (std::size_t j = 0; j <= j_max; ++j) {
        weights_[j] = std::exp(log_pmf);
        log_pmf += std::log(a) - std::log(static_cast<double>(j + 1));
      }
      double shape_top = base_shape_ + static_cast<double>(j_max);
      z_hi_ = dt * (shape_top + 12.0 * std::sqrt(shape_top) + 30.0);
      return;
    }
    mode_ = Mode::kPanels;
    nu_ = delta > 0.0 ? 0.5 * delta - 1.0 : -1.0;
    u1_ = std::sqrt(y1 + y2) / dt;
    u2_ = 0.0;
    log_scale_ = nu_ + 1.0;  // reused as the power of s in log_density_s
  } else if (std::max(a1, a2) <= kSeriesLimit) {
    // Both endpoints positive, coupled double series collapsed over M = j + k:
    //   w_{jk} ~ a1^j a2^k Gamma(j+k+m+1) / (j! k! Gamma(m+j+1) Gamma(m+k+1)),
    // component Gamma(m + 1 + M, dt), with m = delta/2 - 1 (m = 1 when delta = 0,
    // from I_{-1} = I_1).
    mode_ = Mode::kSeries;
    double m = delta > 0.0 ? 0.5 * delta - 1.0 : 1.0;
    base_shape_ = m + 1.0;
    auto range = [](double a) {
      return static_cast<std::size_t>(std::ceil(a + 12.0 * std::sqrt(a + 1.0) + 25.0));
    };
    std::size_t j_max = range(a1), k_max = range(a2);
    std::vector<double> logw;
    logw.assign(j_max + k_max + 1, -std::numeric_limits<double>::infinity());
    double la1 = std::log(a1), la2 = std::log(a2);
    double max_lw = -std::numeric_limits<double>::infinity();
    std::vector<double> lw_jk;
    lw_jk.reserve((j_max + 1) * (k_max + 1));
    for (std::size_t j = 0; j <= j_max; ++j) {
      for (std::size_t k = 0; k <= k_max; ++k) {
        double lw = j * la1 + k * la2 + std::lgamma(j + k + m + 1.0) -
                    std::lgamma(j + 1.0) - std::lgamma(k + 1.0) -
                    std::lgamma(m + j + 1.0) - std::lgamma(m + k + 1.0);
        lw_jk.push_back(lw);
        max_lw = std::max(max_lw, lw);
      }
    }
    weights_.assign(j_max + k_max + 1, 0.0);
    std::size_t idx = 0;
    for (std::size_t j = 0; j <= j_max; ++j) {
      for (std::size_t k = 0; k <= k_max; ++k) {
        weights_[j + k] += std::exp(lw_jk[idx++] - max_lw);
      }
    }
    double total = 0.0;
    for (double w : weights_) total += w;
    for (double& w : weights_) w /= total;
    double shape_top = base_shape_ + static_cast<double>(weights_.size() - 1);
    z_hi_ = dt * (shape_top + 12.0 * std::sqrt(shape_top) + 30.0);
    return;
  } else {
    mode_ = Mode::kPanels;
    nu_ = delta > 0.0 ? 0.5 * delta - 1.0 : -1.0;
    u1_ = std::sqrt(y1) / dt;
    u2_ = std::sqrt(y2) / dt;
    log_scale_ = 1.0;  // power of s: the 2s Jacobian, endpoint powers cancel
  }

  if (mode_ != Mode::kPanels) return;

  // Panel setup.  Density in s = sqrt(z) peaks near (sqrt(y1)+sqrt(y2))/2 with
  // width ~ sqrt(dt/2); the mass this window misses is ~ e^{-60} of the total.
  double s_star = 0.25 * (u1_ + u2_) * dt * 2.0;  // (sqrt(y1)+sqrt(y2))/2
  double sigma = std::sqrt(0.5 * dt);
  double pow_s = log_scale_;
  log_scale_ = 0.0;
  auto log_h = [&](double s) {
    double nu_ser = delta_ > 0.0 ? nu_ : -1.0;
    double v = std::numbers::ln2 + pow_s * std::log(s) - s * s / dt_;
    v += log_bessel_i(nu_ser, u1_ * s);
    if (u2_ > 0.0) v += log_bessel_i(nu_ser, u2_ * s);
    return v;
  };
  // Locate the peak by ternary search.
  double lo = std::max(s_star - 15.0 * sigma, 1e-3 * sigma);
  double hi = s_star + 15.0 * sigma;
  for (int it = 0; it < 200; ++it) {
    double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (log_h(m1) < log_h(m2)) {
      lo = m1;
    } else {
      hi = m2;
    }
  }
  double s_peak = 0.5 * (lo + hi);
  double l_max = log_h(s_peak);
  double target = l_max - 60.0;
  // Walk out from the peak until the log density drops 60 below the maximum.
  double step = 0.5 * sigma;
  double s_lo = s_peak;
  while (s_lo - step > 1e-6 * sigma && log_h(s_lo - step) > target) s_lo -= step;
  double a_end = std::max(1e-6 * sigma, s_lo - step);
  if (log_h(a_end) > target) {
    // Cannot happen while the panel regime is entered only for y/(4 dt) > 60;
    // fail loudly rather than integrate across the s = 0 singularity.
    throw SingularSystemError("bridge midpoint mass reaches s = 0 in panel mode");
  }
  // refine the crossing
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (a_end + s_lo);
    if (log_h(mid) > target) {
      s_lo = mid;
    } else {
      a_end = mid;
    }
  }
  s_lo = a_end;
  double s_hi = s_peak;
  for (int it = 0; it < 100000 && log_h(s_hi + step) > target; ++it) s_hi += step;
  double b_end = s_hi + step;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (s_hi + b_end);
    if (log_h(mid) > target) {
      s_hi = mid;
    } else {
      b_end = mid;
    }
  }
  s_hi = b_end;

  log_scale_ = l_max;
  const int n_panels = 48;
  const Gl20& rule = gl20();
  panel_edges_.resize(n_panels + 1);
  panel_prefix_.assign(n_panels + 1, 0.0);
  double width = (s_hi - s_lo) / n_panels;
  for (int i = 0; i <= n_panels; ++i) panel_edges_[i] = s_lo + width * i;
  double acc = 0.0;
  for (int i = 0; i < n_panels; ++i) {
    double mid = 0.5 * (panel_edges_[i] + panel_edges_[i + 1]);
    double half = 0.5 * width;
    double s = 0.0;
    for (int q = 0; q < 20; ++q) {
      s += rule.w[q] * std::exp(log_h(mid + half * rule.x[q]) - log_scale_);
    }
    acc += s * half;
    panel_prefix_[i + 1] = acc;
  }
  total_ = acc;
  if (!(total_ > 0.0)) throw SingularSystemError("bridge midpoint density integrated to zero");
}

double BesqBridgeMidpoint::log_density_s(double s) const {
  double nu_ser = delta_ > 0.0 ? nu_ : -1.0;
  double pow_s = u2_ > 0.0 ? 1.0 : nu_ + 1.0;
  double v = std::numbers::ln2 + pow_s * std::log(s) - s * s / dt_;
  v += log_bessel_i(nu_ser, u1_ * s);
  if (u2_ > 0.0) v += log_bessel_i(nu_ser, u2_ * s);
  return v;
}

double BesqBridgeMidpoint::panel_cdf_s(double s) const {
  if (s <= panel_edges_.front()) return 0.0;
  if (s >= panel_edges_.back()) return 1.0;
  auto it = std::upper_bound(panel_edges_.begin(), panel_edges_.end(), s);
  std::size_t idx = static_cast<std::size_t>(it - panel_edges_.begin()) - 1;
  double lo = panel_edges_[idx];
  double mid = 0.5 * (lo + s);
  double half = 0.5 * (s - lo);
  const Gl20& rule = gl20();
  double part = 0.0;
  for (int q = 0; q < 20; ++q) {
    part += rule.w[q] * std::exp(log_density_s(mid + half * rule.x[q]) - log_scale_);
  }
  return (panel_prefix_[idx] + part * half) / total_;
}

double BesqBridgeMidpoint::cdf(double z) const {
  if (z < 0.0) return 0.0;
  switch (mode_) {
    case Mode::kZero:
      return 1.0;
    case Mode::kGamma:
      return gamma_p(base_shape_, z / dt_);
    case Mode::kSeries: {
      if (z == 0.0) return atom_;
      double y = z / dt_;
      double f = 0.0;
      double shape = base_shape_;
      std::size_t m0 = 0;
      if (shape == 0.0) {
        f += weights_[0];
        m0 = 1;
        shape = 1.0;
      }
      double p = gamma_p(shape, y);
      double term = std::exp(shape * std::log(y) - y - std::lgamma(shape + 1.0));
      for (std::size_t m = m0; m < weights_.size(); ++m) {
        f += weights_[m] * p;
        p = std::max(0.0, p - term);
        term *= y / (shape + 1.0);
        shape += 1.0;
      }
      return std::fmin(1.0, f);
    }
    case Mode::kPanels:
      return panel_cdf_s(std::sqrt(z));
  }
  return 0.0;
}

double BesqBridgeMidpoint::invert(double u) const {
  double lo = 0.0, f_lo = atom_;
  double hi = mode_ == Mode::kPanels
                  ? panel_edges_.back() * panel_edges_.back()
                  : z_hi_;
  double f_hi = cdf(hi);
  for (int it = 0; it < 60 && f_hi < u; ++it) {
    lo = hi;
    f_lo = f_hi;
    hi *= 2.0;
    f_hi = cdf(hi);
  }
  double z = 0.5 * (lo + hi);
  for (int it = 0; it < kInvCap; ++it) {
    // Secant proposal, bisection fallback (and every other step, for safety).
    double zc;
    if (it % 2 == 0 && f_hi > f_lo) {
      zc = lo + (u - f_lo) * (hi - lo) / (f_hi - f_lo);
      if (!(zc > lo && zc < hi)) zc = 0.5 * (lo + hi);
    } else {
      zc = 0.5 * (lo + hi);
    }
    double f = cdf(zc);
    z = zc;
    if (std::fabs(f - u) < kInvTol) return z;
    if (f < u) {
      lo = zc;
      f_lo = f;
    } else {
      hi = zc;
      f_hi = f;
    }
    if (hi - lo < 1e-14 * (1.0 + hi)) return 0.5 * (lo + hi);
  }
  return z;
}

double BesqBridgeMidpoint::sample(RngStream& rng) const {
  double u = rng.uniform();
  if (mode_ == Mode::kZero) return 0.0;
  if (u <= atom_) return 0.0;
  return invert(u);
}

double besq_bridge_midpoint(double y1, double y2, double delta, double dt, RngStream& rng) {
  return BesqBridgeMidpoint(y1, y2, delta, dt).sample(rng);
}

DyadicPath besq_bridge(double a, double b, double delta, double span, int levels,
                       RngStream& rng) {
  if (span <= 0.0) throw InputError("besq_bridge: span must be positive");
  if (a < 0.0 || b < 0.0) throw InputError("besq_bridge: endpoints must be >= 0");
  DyadicPath p = DyadicPath::with_levels(span, levels);
  p.kind = "besq_bridge";
  p.values.front() = a;
  p.values.back() = b;
  std::size_t n = p.size() - 1;
  double du = p.dx();
  for (std::size_t step = n; step >= 2; step /= 2) {
    double dt_half = 0.5 * du * static_cast<double>(step);
    for (std::size_t lo = 0; lo < n; lo += step) {
      std::size_t mid = lo + step / 2;
      p.values[mid] =
          besq_bridge_midpoint(p.values[lo], p.values[lo + step], delta, dt_half, rng);
    }
  }
  return p;
}

namespace {

// Best-Fisher wrapped Cauchy rejection for the von Mises distribution.
double sample_von_mises(double kappa, RngStream& rng) {
  if (kappa < 1e-8) return (2.0 * rng.uniform() - 1.0) * std::numbers::pi;
  double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
  double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
  double r = (1.0 + rho * rho) / (2.0 * rho);
  for (;;) {
    double z = std::cos(std::numbers::pi * rng.uniform());
    double f = (1.0 + r * z) / (r + z);
    double c = kappa * (r - f);
    double u2 = rng.uniform_pos();
    if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
      double u3 = rng.uniform();
      double theta = std::acos(std::fmin(1.0, std::fmax(-1.0, f)));
      return u3 > 0.5 ? theta : -theta;
    }
  }
}

// cos of the angle between a fixed axis and a direction drawn from the
// exponentially tilted uniform law on S^2: density ~ e^{kappa t} on [-1, 1].
double sample_tilted_cos3(double kappa, RngStream& rng) {
  double u = rng.uniform_pos();
  if (kappa < 1e-8) return 2.0 * u - 1.0;
  double e = std::exp(-2.0 * kappa);
  double t = 1.0 + std::log(e + u * (1.0 - e)) / kappa;
  return std::fmin(1.0, std::fmax(-1.0, t));
}

}  // namespace

DyadicPath besq_bridge_gaussian(double a, double b, int delta, double span, int levels,
                                RngStream& rng) {
  if (delta < 1 || delta > 3) {
    throw InputError("besq_bridge_gaussian handles dimensions 1, 2, 3");
  }
  if (span <= 0.0) throw InputError("besq_bridge_gaussian: span must be positive");
  if (a < 0.0 || b < 0.0) throw InputError("besq_bridge_gaussian: endpoints must be >= 0");

  double ra = std::sqrt(a), rb = std::sqrt(b);
  double kappa = ra * rb / span;

  // Start at ra * e1; draw the terminal direction from the tilted sphere law.
  double start[3] = {ra, 0.0, 0.0};
  double finish[3] = {0.0, 0.0, 0.0};
  if (delta == 1) {
    double p_plus = 1.0 / (1.0 + std::exp(-2.0 * kappa));
    finish[0] = rng.uniform() < p_plus ? rb : -rb;
  } else if (delta == 2) {
    double theta = b > 0.0 ? sample_von_mises(kappa, rng) : 0.0;
    finish[0] = rb * std::cos(theta);
    finish[1] = rb * std::sin(theta);
  } else {
    double t = b > 0.0 ? sample_tilted_cos3(kappa, rng) : 1.0;
    double psi = 2.0 * std::numbers::pi * rng.uniform();
    double s = std::sqrt(std::fmax(0.0, 1.0 - t * t));
    finish[0] = rb * t;
    finish[1] = rb * s * std::cos(psi);
    finish[2] = rb * s * std::sin(psi);
  }

  DyadicPath p = DyadicPath::with_levels(span, levels);
  p.kind = "besq_bridge";
  for (int d = 0; d < delta; ++d) {
    DyadicPath coord = brownian_bridge(start[d], finish[d], span, levels, rng);
    for (std::size_t i = 0; i < p.size(); ++i) {
      p.values[i] += coord.values[i] * coord.values[i];
    }
  }
  // Squaring the roots costs an ulp; the endpoints are known exactly.
  p.values.front() = a;
  p.values.back() = b;
  return p;
}

}  // namespace cablesoup

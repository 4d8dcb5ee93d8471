#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <vector>

#include "cablesoup/besq.hpp"
#include "cablesoup/errors.hpp"
#include "cablesoup/rng.hpp"
#include "cablesoup/special.hpp"
#include "cablesoup/stats.hpp"

using namespace cablesoup;

namespace {

// Monte Carlo estimate of the bridge midpoint CDF through a second route:
// draw the forward transition from y1 and reweight by the density of then
// reaching y2.  Shares nothing with the series/panel integrator.
double weighted_forward_cdf(double y1, double y2, double delta, double dt,
                            double z, int n, RngStream& rng) {
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i) {
    double mid = besq_transition(y1, delta, dt, rng);
    if (mid <= 0.0) continue;  // cannot reach y2 > 0 from an absorbed state
    double w = std::exp(besq_transition_log_density(mid, delta, dt, y2));
    den += w;
    if (mid <= z) num += w;
  }
  return num / den;
}

}  // namespace

TEST_CASE("transition moments match x0 + delta t and 4 x0 t + 2 delta t^2") {
  struct Case {
    double x0, delta, t;
  } cases[] = {{1.0, 0.0, 0.5}, {2.0, 1.0, 0.3}, {0.0, 3.0, 1.0}, {4.0, 2.5, 2.0}};
  for (const Case& c : cases) {
    RngStream rng(21, "besq-moments");
    const int n = 100000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
      double x = besq_transition(c.x0, c.delta, c.t, rng);
      CHECK(x >= 0.0);
      s += x;
      s2 += x * x;
    }
    double m = s / n;
    double var = s2 / n - m * m;
    double mean_true = c.x0 + c.delta * c.t;
    double var_true = 4.0 * c.x0 * c.t + 2.0 * c.delta * c.t * c.t;
    CHECK(std::abs(m - mean_true) < 5.0 * std::sqrt(var_true / n));
    CHECK(std::abs(var - var_true) / var_true < 0.1);
  }
}

TEST_CASE("absorbed mass of the zero-dimension transition") {
  const double x0 = 1.0, t = 0.5;
  double atom = std::exp(-x0 / (2.0 * t));
  CHECK(besq_transition_cdf(x0, 0.0, t, 0.0) == doctest::Approx(atom).epsilon(1e-12));

  RngStream rng(22, "besq-atom");
  const int n = 50000;
  int zeros = 0;
  for (int i = 0; i < n; ++i)
    if (besq_transition(x0, 0.0, t, rng) == 0.0) ++zeros;
  double freq = static_cast<double>(zeros) / n;
  double se = std::sqrt(atom * (1.0 - atom) / n);
  CHECK(std::abs(freq - atom) < 5.0 * se);
}

TEST_CASE("transition cdf against reference values and the exponential case") {
  // x0 = 1, delta = 0, t = 0.5; values from 40-digit arithmetic.
  struct Row {
    double x, expect;
  } rows[] = {
      {0.0, 0.367879441171442322}, {0.1, 0.403757964678611295},
      {0.5, 0.530130362197095267}, {1.0, 0.65425416127683552},
      {2.0, 0.817415225069611934}, {5.0, 0.976650054770644412},
  };
  for (const Row& r : rows)
    CHECK(besq_transition_cdf(1.0, 0.0, 0.5, r.x) == doctest::Approx(r.expect).epsilon(1e-12));

  // From 0 in dimension 2 the transition is exponential with mean 2t.
  for (double x : {0.1, 1.0, 3.0})
    CHECK(besq_transition_cdf(0.0, 2.0, 0.7, x) ==
          doctest::Approx(1.0 - std::exp(-x / 1.4)).epsilon(1e-12));
}

TEST_CASE("transition samples follow the transition cdf") {
  struct Case {
    double x0, delta, t;
  } cases[] = {{1.0, 0.0, 0.5}, {2.0, 1.0, 0.3}, {0.0, 3.0, 1.0}};
  int ci = 0;
  for (const Case& c : cases) {
    RngStream rng(23, "besq-ks", static_cast<std::uint64_t>(ci++));
    std::vector<double> s(10000);
    for (double& v : s) v = besq_transition(c.x0, c.delta, c.t, rng);
    KsResult r = ks_test(s, [&](double x) { return besq_transition_cdf(c.x0, c.delta, c.t, x); });
    CHECK(r.p_value > 0.01);
  }
}

TEST_CASE("path endpoint composed of many steps keeps the one-step law") {
  std::vector<double> ends;
  for (int t = 0; t < 4000; ++t) {
    RngStream rng(24, "besq-path", static_cast<std::uint64_t>(t));
    DyadicPath p = besq_path(1.0, 0.0, 1.0, 4, rng);
    ends.push_back(p.values.back());
  }
  KsResult r = ks_test(ends, [](double x) { return besq_transition_cdf(1.0, 0.0, 1.0, x); });
  CHECK(r.p_value > 0.01);
}

TEST_CASE("zero-dimension paths stay absorbed") {
  for (int t = 0; t < 200; ++t) {
    RngStream rng(25, "besq-absorb", static_cast<std::uint64_t>(t));
    DyadicPath p = besq_path(0.5, 0.0, 4.0, 6, rng);
    bool dead = false;
    for (double v : p.values) {
      if (dead) CHECK(v == 0.0);
      if (v == 0.0) dead = true;
      CHECK(v >= 0.0);
    }
  }
}

TEST_CASE("bridge midpoint cdf against high-precision integrals") {
  // Reference values integrate e^{-z/dt} I_nu(sqrt(y1 z)/dt) I_nu(sqrt(y2 z)/dt)
  // with 40-digit arithmetic.
  struct Row {
    double y1, y2, delta, dt;
    double z, expect;
  } rows[] = {
      {1.0, 1.0, 1.0, 0.5, 0.5, 0.34592145918219061485},
      {1.0, 1.0, 1.0, 0.5, 1.0, 0.55414980066457285228},
      {1.0, 1.0, 1.0, 0.5, 2.0, 0.8200108119177703853},
      {1.0, 1.0, 0.0, 0.5, 0.5, 0.11636868614022640823},
      {1.0, 1.0, 0.0, 0.5, 1.0, 0.33326058310999848337},
      {1.0, 1.0, 0.0, 0.5, 2.0, 0.70316431929814851843},
      {2.0, 3.0, 2.5, 0.4, 1.0, 0.10328475385242195025},
      {2.0, 3.0, 2.5, 0.4, 2.0, 0.36642770851563871677},
      {2.0, 3.0, 2.5, 0.4, 4.0, 0.83252545350942638823},
      // Large Bessel arguments, the panel integrator regime.
      {8.0, 8.0, 1.0, 0.05, 7.0, 0.12397493765942808908},
      {8.0, 8.0, 1.0, 0.05, 8.0, 0.5},
      {8.0, 8.0, 1.0, 0.05, 9.0, 0.86106621890151000822},
  };
  for (const Row& r : rows) {
    BesqBridgeMidpoint law(r.y1, r.y2, r.delta, r.dt);
    CHECK(law.cdf(r.z) == doctest::Approx(r.expect).epsilon(1e-8));
  }
}

TEST_CASE("bridge midpoint sampler matches its own cdf") {
  struct Case {
    double y1, y2, delta, dt;
  } cases[] = {
      {0.0, 0.0, 1.5, 0.7},   // plain Gamma
      {2.0, 0.0, 1.0, 0.5},   // one endpoint zero
      {1.0, 1.0, 1.0, 0.5},   // series
      {1.0, 1.0, 0.0, 0.5},   // series at dimension zero
      {8.0, 8.0, 1.0, 0.05},  // panels
  };
  int ci = 0;
  for (const Case& c : cases) {
    BesqBridgeMidpoint law(c.y1, c.y2, c.delta, c.dt);
    RngStream rng(26, "bridge-mid", static_cast<std::uint64_t>(ci++));
    std::vector<double> s(10000);
    for (double& v : s) v = law.sample(rng);
    KsResult r = ks_test(s, [&](double z) { return law.cdf(z); });
    CHECK(r.p_value > 0.01);
  }
}

TEST_CASE("zero dimension with both endpoints zero is the dead bridge") {
  BesqBridgeMidpoint law(0.0, 0.0, 0.0, 0.5);
  CHECK(law.atom() == 1.0);
  RngStream rng(27, "dead");
  for (int i = 0; i < 20; ++i) CHECK(law.sample(rng) == 0.0);
}

TEST_CASE("gamma regime of the midpoint law") {
  BesqBridgeMidpoint law(0.0, 0.0, 1.5, 0.7);
  RngStream rng(28, "bridge-gamma");
  std::vector<double> s(10000);
  for (double& v : s) v = law.sample(rng);
  KsResult r = ks_test(s, [](double z) { return gamma_p(0.75, z / 0.7); });
  CHECK(r.p_value > 0.01);
}

TEST_CASE("midpoint cdf agrees with a reweighted forward simulation") {
  struct Case {
    double y1, y2, delta, dt, z;
  } cases[] = {
      {2.0, 0.5, 1.0, 0.5, 1.0},
      {1.0, 1.0, 0.0, 0.5, 1.0},
      {1.0, 2.0, 2.0, 0.3, 1.5},
  };
  int ci = 0;
  for (const Case& c : cases) {
    BesqBridgeMidpoint law(c.y1, c.y2, c.delta, c.dt);
    RngStream rng(29, "fwd-weight", static_cast<std::uint64_t>(ci++));
    double mc = weighted_forward_cdf(c.y1, c.y2, c.delta, c.dt, c.z, 400000, rng);
    CHECK(law.cdf(c.z) == doctest::Approx(mc).epsilon(0.02));
  }
}

TEST_CASE("bridge paths pin endpoints and stay nonnegative") {
  RngStream rng(30, "bridge-path");
  DyadicPath p = besq_bridge(1.0, 2.0, 0.0, 1.0, 6, rng);
  CHECK(p.values.front() == 1.0);
  CHECK(p.values.back() == 2.0);
  for (double v : p.values) CHECK(v >= 0.0);

  DyadicPath q = besq_bridge(0.0, 0.0, 0.0, 1.0, 6, rng);
  for (double v : q.values) CHECK(v == 0.0);
}

TEST_CASE("bridge center value has the midpoint law") {
  BesqBridgeMidpoint law(1.0, 1.0, 0.0, 0.5);
  std::vector<double> s;
  for (int t = 0; t < 5000; ++t) {
    RngStream rng(31, "bridge-center", static_cast<std::uint64_t>(t));
    DyadicPath p = besq_bridge(1.0, 1.0, 0.0, 1.0, 3, rng);
    s.push_back(p.values[p.size() / 2]);
  }
  KsResult r = ks_test(s, [&](double z) { return law.cdf(z); });
  CHECK(r.p_value > 0.01);
}

TEST_CASE("gaussian-construction bridge agrees with the inversion bridge") {
  for (int delta : {1, 2, 3}) {
    std::vector<double> a, b;
    for (int t = 0; t < 5000; ++t) {
      RngStream r1(32, "gauss-route", static_cast<std::uint64_t>(t) * 3 + delta);
      RngStream r2(33, "invert-route", static_cast<std::uint64_t>(t) * 3 + delta);
      DyadicPath pg = besq_bridge_gaussian(1.5, 0.5, delta, 1.0, 2, r1);
      DyadicPath pi = besq_bridge(1.5, 0.5, static_cast<double>(delta), 1.0, 2, r2);
      CHECK(pg.values.front() == 1.5);
      CHECK(pg.values.back() == 0.5);
      a.push_back(pg.values[1]);  // quarter point
      b.push_back(pi.values[1]);
    }
    KsResult r = ks_two_sample(a, b);
    CHECK(r.p_value > 0.01);
  }
}

TEST_CASE("invalid besq arguments throw") {
  RngStream rng(34, "besq-errors");
  CHECK_THROWS_AS(besq_transition(1.0, -0.5, 1.0, rng), InputError);
  CHECK_THROWS_AS(besq_transition(1.0, 1.0, 0.0, rng), InputError);
  CHECK_THROWS_AS(besq_transition(-1.0, 1.0, 1.0, rng), InputError);
  CHECK_THROWS_AS(besq_path(-1.0, 1.0, 1.0, 3, rng), InputError);
  CHECK_THROWS_AS(besq_bridge(-1.0, 1.0, 1.0, 1.0, 3, rng), InputError);
  CHECK_THROWS_AS(besq_bridge_gaussian(1.0, 1.0, 4, 1.0, 3, rng), InputError);
  CHECK_THROWS_AS(BesqBridgeMidpoint(-1.0, 1.0, 1.0, 0.5), InputError);
}

TEST_CASE("absorption mass matches a fine euler discretization of the sde") {
  // Full-truncation Euler for dX = 2 sqrt(X+) dB at step 1e-5, absorbed on
  // crossing zero.  The scheme's hitting frequency over [0, 0.5] from x0 = 1
  // must agree with the exact sampler's atom and with exp(-x0 / 2t).
  const double x0 = 1.0, t = 0.5, dt = 1e-5;
  const int steps = static_cast<int>(t / dt);
  const int n = 1500;
  const double sdt = std::sqrt(dt);
  int euler_dead = 0;
  RngStream rng(35, "euler-atom");
  for (int r = 0; r < n; ++r) {
    double x = x0;
    for (int k = 0; k < steps; ++k) {
      x += 2.0 * std::sqrt(x) * sdt * rng.normal();
      if (x <= 0.0) {
        ++euler_dead;
        break;
      }
    }
  }
  int exact_dead = 0;
  for (int r = 0; r < n; ++r) {
    RngStream s(36, "exact-atom", static_cast<std::uint64_t>(r));
    if (besq_transition(x0, 0.0, t, s) == 0.0) ++exact_dead;
  }
  double atom = std::exp(-x0 / (2.0 * t));
  double se = std::sqrt(atom * (1.0 - atom) / n);
  CHECK(std::abs(euler_dead / static_cast<double>(n) - atom) <= 3.0 * se);
  CHECK(std::abs(exact_dead / static_cast<double>(n) - atom) <= 3.0 * se);
}

TEST_CASE("bridge midpoints agree with endpoint-conditioned euler paths") {
  // Cross-check of the exact bridge against the crude route it replaces:
  // run full-truncation Euler forward from a at step length * 2^-(J+6),
  // keep paths landing within eps of b, and compare midpoint means.  The
  // tolerance carries an explicit allowance for the scheme's weak error
  // and the eps-window smearing on top of the Monte Carlo noise.
  const double a = 1.5, b = 0.5, length = 1.0, delta = 1.0;
  const int levels = 4;
  const double dt = length * std::pow(2.0, -(levels + 6));
  const int steps = static_cast<int>(std::lround(length / dt));
  const double sdt = std::sqrt(dt);
  const double eps = 0.1;
  std::vector<double> euler_mid;
  RngStream rng(37, "euler-bridge");
  for (int r = 0; r < 30000; ++r) {
    double x = a, mid = 0.0;
    bool alive = true;
    for (int k = 0; k < steps; ++k) {
      x += 2.0 * std::sqrt(std::max(x, 0.0)) * sdt * rng.normal() + delta * dt;
      if (x < 0.0) x = 0.0;
      if (k + 1 == steps / 2) mid = x;
      if (x == 0.0 && delta == 0.0) {
        alive = false;
        break;
      }
    }
    if (alive && std::abs(x - b) <= eps) euler_mid.push_back(mid);
  }
  REQUIRE(euler_mid.size() > 500);
  std::vector<double> exact_mid;
  BesqBridgeMidpoint law(a, b, delta, length / 2.0);
  for (int r = 0; r < 20000; ++r) {
    RngStream s(38, "exact-bridge", static_cast<std::uint64_t>(r));
    exact_mid.push_back(law.sample(s));
  }
  double me = mean(euler_mid), mx = mean(exact_mid);
  double se = std::sqrt(sample_variance(euler_mid) / euler_mid.size() +
                        sample_variance(exact_mid) / exact_mid.size());
  CHECK(std::abs(me - mx) <= 4.0 * se + 0.02);
}

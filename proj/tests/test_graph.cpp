#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cablesoup/cable_graph.hpp"
#include "cablesoup/errors.hpp"
#include "cablesoup/loop_soup.hpp"
#include "cablesoup/special.hpp"
#include "cablesoup/stats.hpp"

using namespace cablesoup;

namespace {

const std::string kGraphDir = std::string(CABLESOUP_SOURCE_DIR) + "/data/graphs/";

CableGraph chain4() { return read_graph_file(kGraphDir + "chain4.txt"); }

}  // namespace

TEST_CASE("green value on a single hanging edge is twice the length") {
  CableGraph g = read_graph_file(kGraphDir + "single_edge.txt");
  GreenMatrix gm = green_matrix(g);
  double got = gm.g(g.interior_index[1], g.interior_index[1]);
  CHECK(std::abs(got - 3.0) / 3.0 <= 1e-10);
}

TEST_CASE("green value between two anchors is the parallel-resistance form") {
  CableGraph g = read_graph_file(kGraphDir + "two_anchors.txt");
  GreenMatrix gm = green_matrix(g);
  double expect = 2.0 * 1.0 * 2.0 / (1.0 + 2.0);
  double got = gm.g(g.interior_index[1], g.interior_index[1]);
  CHECK(std::abs(got - expect) / expect <= 1e-10);
}

TEST_CASE("green matrix of the unit chain in closed form") {
  CableGraph g = chain4();
  GreenMatrix gm = green_matrix(g);
  // L = [[2,-1],[-1,2]] in conductance units, G = 2 L^{-1}.
  int r1 = g.interior_index[1], r2 = g.interior_index[2];
  CHECK(gm.g(r1, r1) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK(gm.g(r2, r2) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK(gm.g(r1, r2) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(gm.g(r2, r1) == gm.g(r1, r2));
}

TEST_CASE("green matrix is symmetric positive definite on a looped graph") {
  CableGraph g = read_graph_file(kGraphDir + "loops5.txt");
  GreenMatrix gm = green_matrix(g);
  REQUIRE(gm.g.rows() == 4);
  for (int i = 0; i < gm.g.rows(); ++i) {
    CHECK(gm.g(i, i) > 0.0);
    for (int j = 0; j < i; ++j)
      CHECK(gm.g(i, j) == doctest::Approx(gm.g(j, i)).epsilon(1e-12));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gm.g);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("jump chain of the unit chain kills half the mass at each end") {
  CableGraph g = chain4();
  JumpChain jc = jump_chain(g);
  int r1 = g.interior_index[1], r2 = g.interior_index[2];
  CHECK(jc.p(r1, r2) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(jc.p(r2, r1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(jc.p(r1, r1) == 0.0);
  CHECK(jc.kill[r1] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(jc.spectral_radius == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(jc.hold_mean[r1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("loop measure mass of the unit chain is log 4/3") {
  CHECK(loop_measure_mass(chain4()) == doctest::Approx(std::log(4.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("a star of boundary anchors carries no loops") {
  CableGraph g = build_graph({{0, 1, 1.0}, {1, 2, 1.0}}, {0, 2});
  CHECK(loop_measure_mass(g) == 0.0);
  SoupConfig cfg;
  cfg.intensity = 2.0;
  cfg.seed = 77;
  CHECK(sample_loops(g, cfg).loops.empty());
}

TEST_CASE("length-resolved masses of the unit chain") {
  CableGraph g = chain4();
  std::vector<double> w = loop_length_masses(g, 40);
  // tr(P^n) = (1/2)^n + (-1/2)^n: zero for odd n, 2 (1/2)^n for even n.
  CHECK(w[2] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(w[3] == doctest::Approx(0.0));
  CHECK(w[4] == doctest::Approx(1.0 / 32.0).epsilon(1e-12));
  double total = 0.0;
  for (double v : w) total += v;
  CHECK(total == doctest::Approx(std::log(4.0 / 3.0)).epsilon(1e-9));
}

TEST_CASE("a too tight length cap is refused") {
  CHECK_THROWS_AS(loop_length_masses(chain4(), 2), TruncationTooTightError);
}

TEST_CASE("sampled loops come out canonical") {
  CableGraph g = read_graph_file(kGraphDir + "loops5.txt");
  SoupConfig cfg;
  cfg.intensity = 6.0;  // plenty of loops
  cfg.seed = 101;
  LoopSoup soup = sample_loops(g, cfg);
  CHECK(!soup.loops.empty());
  for (const DiscreteLoop& loop : soup.loops) {
    CHECK(loop.vertices.size() >= 2);
    CHECK(canonical_rotation(loop.vertices) == loop.vertices);
    for (int v : loop.vertices) CHECK(!g.is_boundary[v]);
  }
}

TEST_CASE("soups are monotone in the intensity under a shared seed") {
  CableGraph g = read_graph_file(kGraphDir + "loops5.txt");
  SoupConfig lo, hi;
  lo.intensity = 0.8;
  hi.intensity = 1.6;
  lo.seed = hi.seed = 2024;
  LoopSoup a = sample_loops(g, lo);
  LoopSoup b = sample_loops(g, hi);
  CHECK(a.loops.size() <= b.loops.size());
  std::map<std::uint64_t, const DiscreteLoop*> big;
  for (const DiscreteLoop& loop : b.loops) big[loop.index] = &loop;
  for (const DiscreteLoop& loop : a.loops) {
    REQUIRE(big.count(loop.index) == 1);
    CHECK(big[loop.index]->vertices == loop.vertices);
  }
}

TEST_CASE("loop count over many soups is Poisson with mean c/2 times the mass") {
  CableGraph g = chain4();
  const double c = 1.5;
  const double lam = 0.5 * c * std::log(4.0 / 3.0);
  const int n = 10000;
  double s = 0, s2 = 0, two = 0;
  for (int t = 0; t < n; ++t) {
    SoupConfig cfg;
    cfg.intensity = c;
    cfg.seed = derive_seed(301, 0, static_cast<std::uint64_t>(t));
    LoopSoup soup = sample_loops(g, cfg);
    double k = static_cast<double>(soup.loops.size());
    s += k;
    s2 += k * k;
    for (const DiscreteLoop& loop : soup.loops)
      if (loop.vertices.size() == 2) two += 1.0;
  }
  double m = s / n;
  double var = s2 / n - m * m;
  CHECK(std::abs(m - lam) < 3.0 * std::sqrt(lam / n));
  CHECK(std::abs(var - lam) < 3.0 * std::sqrt((2.0 * lam * lam + lam) / n));
  // Loops of length 2 arrive at rate (c/2) w_2 = (c/2) / 4.
  double lam2 = 0.5 * c * 0.25;
  CHECK(std::abs(two / n - lam2) < 3.0 * std::sqrt(lam2 / n));
}

TEST_CASE("holding times on a loop are reproducible and have the right mean") {
  CableGraph g = chain4();
  DiscreteLoop loop;
  loop.vertices = {1, 2};
  loop.index = 5;
  std::vector<double> a = loop_vertex_local_times(g, loop, 99);
  std::vector<double> b = loop_vertex_local_times(g, loop, 99);
  CHECK(a == b);
  CHECK(a[0] == 0.0);
  CHECK(a[3] == 0.0);
  CHECK(a[1] > 0.0);
  CHECK(a[2] > 0.0);

  // One visit to vertex 1 per loop, holding mean m_1 = 2 / C_1 = 1.
  const int n = 20000;
  double s = 0;
  for (int t = 0; t < n; ++t) {
    loop.index = static_cast<std::uint64_t>(t);
    s += loop_vertex_local_times(g, loop, 7)[1];
  }
  CHECK(std::abs(s / n - 1.0) < 5.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("loop-route vertex field has the gamma marginal") {
  CableGraph g = chain4();
  const double c = 1.5;  // non-integer, exercises the soup construction
  std::vector<double> s(10000);
  for (std::size_t t = 0; t < s.size(); ++t) {
    SoupConfig cfg;
    cfg.intensity = c;
    cfg.seed = derive_seed(302, 1, t);
    VertexField f = sample_vertex_field(g, cfg);
    CHECK(f.value[0] == 0.0);
    CHECK(f.value[3] == 0.0);
    s[t] = f.value[1];
  }
  KsResult r = ks_test(s, [&](double x) { return gamma_p(0.75, x * 3.0 / 4.0); });
  CHECK(r.p_value > 0.01);
}

TEST_CASE("gaussian route and loop route agree at integer intensity") {
  CableGraph g = chain4();
  std::vector<double> gauss, loops;
  for (std::size_t t = 0; t < 8000; ++t) {
    SoupConfig cfg;
    cfg.intensity = 1.0;
    cfg.seed = derive_seed(303, 2, t);
    VertexField a = sample_vertex_field(g, cfg);  // dispatches to the squares
    gauss.push_back(a.value[2]);
    cfg.seed = derive_seed(304, 3, t);
    VertexField b = sample_vertex_field_loops(g, cfg);
    loops.push_back(b.value[2]);
  }
  CHECK(ks_two_sample(gauss, loops).p_value > 0.01);
}

TEST_CASE("gaussian route mean equals half the intensity times the green value") {
  CableGraph g = read_graph_file(kGraphDir + "loops5.txt");
  GreenMatrix gm = green_matrix(g);
  double gvv = gm.g(g.interior_index[2], g.interior_index[2]);
  const int n = 20000;
  double s = 0, s2 = 0;
  for (int t = 0; t < n; ++t) {
    VertexField f = sample_vertex_field_gaussian(g, 2, derive_seed(305, 4, t));
    s += f.value[2];
    s2 += f.value[2] * f.value[2];
  }
  double m = s / n, var = s2 / n - m * m;
  CHECK(std::abs(m - gvv) < 5.0 * std::sqrt(var / n));
}

TEST_CASE("graph input validation") {
  CHECK_THROWS_AS(build_graph({{0, 0, 1.0}}, {0}), SelfLoopError);
  CHECK_THROWS_AS(build_graph({{0, 1, 0.0}}, {0}), ZeroLengthError);
  CHECK_THROWS_AS(build_graph({{0, 1, -2.0}}, {0}), ZeroLengthError);
  CHECK_THROWS_AS(build_graph({{0, 1, 1.0}}, {}), NotTransientError);
  CHECK_THROWS_AS(read_graph_file(kGraphDir + "no_such_file.txt"), InputError);
  std::istringstream missing("0 1 1.0\n");
  CHECK_THROWS_AS(read_graph(missing), InputError);

  SoupConfig bad;
  bad.intensity = -1.0;
  CHECK_THROWS_AS(sample_loops(chain4(), bad), InvalidIntensityError);
}

TEST_CASE("graph text round trip and hash stability") {
  CableGraph g = read_graph_file(kGraphDir + "loops5.txt");
  std::ostringstream out;
  write_graph(g, out);
  std::istringstream in(out.str());
  CableGraph h = read_graph(in);
  CHECK(graph_hash(g) == graph_hash(h));
  CHECK(h.n_vertices == g.n_vertices);
  CHECK(h.edges.size() == g.edges.size());

  CableGraph other = build_graph({{0, 1, 1.0}, {1, 2, 0.5}, {2, 3, 0.8},
                                  {1, 3, 1.2}, {3, 4, 0.601}},
                                 {0});
  CHECK(graph_hash(other) != graph_hash(g));
}

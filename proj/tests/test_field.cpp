#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "cablesoup/besq.hpp"
#include "cablesoup/cable_graph.hpp"
#include "cablesoup/errors.hpp"
#include "cablesoup/loop_soup.hpp"
#include "cablesoup/modulus.hpp"
#include "cablesoup/occupation_field.hpp"
#include "cablesoup/special.hpp"
#include "cablesoup/stats.hpp"

using namespace cablesoup;
namespace fs = std::filesystem;

namespace {

const std::string kGraphDir = std::string(CABLESOUP_SOURCE_DIR) + "/data/graphs/";

}  // namespace

TEST_CASE("extending the zero field gives nonnegative bridges pinned at zero") {
  CableGraph g = read_graph_file(kGraphDir + "two_anchors.txt");
  VertexField vf;
  vf.value.assign(3, 0.0);
  vf.intensity = 2.0;
  OccupationField f = extend_to_edges(g, vf, 2.0, 5, 900);
  REQUIRE(f.edge.size() == 2);
  double interior_mass = 0.0;
  for (const DyadicPath& p : f.edge) {
    CHECK(p.values.front() == 0.0);
    CHECK(p.values.back() == 0.0);
    for (double v : p.values) {
      CHECK(v >= 0.0);
      interior_mass += v;
    }
  }
  CHECK(interior_mass > 0.0);
}

TEST_CASE("edge profiles take the vertex values exactly at their ends") {
  CableGraph g = read_graph_file(kGraphDir + "loops5.txt");
  OccupationField f = sample_field(g, 1.3, 6, 901);
  REQUIRE(f.edge.size() == g.edges.size());
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& edge = g.edges[e];
    CHECK(f.edge[e].values.front() == f.vertex.value[edge.u]);
    CHECK(f.edge[e].values.back() == f.vertex.value[edge.v]);
    CHECK(f.edge[e].span == edge.length);
    for (double v : f.edge[e].values) CHECK(v >= 0.0);
  }
  // Integer intensity runs through the Gaussian bridge construction instead;
  // the endpoint contract is the same.
  OccupationField h = sample_field(g, 2.0, 6, 902);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    CHECK(h.edge[e].values.front() == h.vertex.value[g.edges[e].u]);
    CHECK(h.edge[e].values.back() == h.vertex.value[g.edges[e].v]);
  }
}

TEST_CASE("field sampling is deterministic in the seed") {
  CableGraph g = read_graph_file(kGraphDir + "loops5.txt");
  OccupationField a = sample_field(g, 1.5, 5, 903);
  OccupationField b = sample_field(g, 1.5, 5, 903);
  CHECK(a.vertex.value == b.vertex.value);
  for (std::size_t e = 0; e < a.edge.size(); ++e)
    CHECK(a.edge[e].values == b.edge[e].values);
}

TEST_CASE("each edge bridge only looks at its own endpoints and stream") {
  CableGraph g = read_graph_file(kGraphDir + "loops5.txt");
  VertexField vf;
  vf.value = {0.0, 0.8, 1.1, 0.6, 0.9};
  vf.intensity = 1.0;
  OccupationField a = extend_to_edges(g, vf, 1.0, 6, 904);
  vf.value[4] = 1.7;  // vertex 4 touches only the last edge
  OccupationField b = extend_to_edges(g, vf, 1.0, 6, 904);
  for (std::size_t e = 0; e + 1 < g.edges.size(); ++e)
    CHECK(a.edge[e].values == b.edge[e].values);
  CHECK(a.edge[4].values != b.edge[4].values);
}

TEST_CASE("edge midpoint follows the analytic bridge midpoint law") {
  CableGraph g = read_graph_file(kGraphDir + "single_edge.txt");
  VertexField vf;
  vf.value = {0.0, 0.7};
  // Time change: the profile is X(2x)/2 for a bridge X over [0, 2 L], so the
  // midpoint sits at time L with endpoint values twice the vertex values.
  SUBCASE("integer intensity, gaussian construction") {
    BesqBridgeMidpoint law(0.0, 1.4, 1.0, 1.5);
    vf.intensity = 1.0;
    std::vector<double> s(10000);
    for (std::size_t t = 0; t < s.size(); ++t) {
      OccupationField f = extend_to_edges(g, vf, 1.0, 4, derive_seed(905, 0, t));
      s[t] = f.edge[0].values[8];
    }
    KsResult r = ks_test(s, [&](double v) { return law.cdf(2.0 * v); });
    CHECK(r.p_value > 0.01);
  }
  SUBCASE("fractional intensity, inversion construction") {
    BesqBridgeMidpoint law(0.0, 1.4, 1.5, 1.5);
    vf.intensity = 1.5;
    std::vector<double> s(10000);
    for (std::size_t t = 0; t < s.size(); ++t) {
      OccupationField f = extend_to_edges(g, vf, 1.5, 4, derive_seed(906, 1, t));
      s[t] = f.edge[0].values[8];
    }
    KsResult r = ks_test(s, [&](double v) { return law.cdf(2.0 * v); });
    CHECK(r.p_value > 0.01);
  }
}

TEST_CASE("independent fields add up to the field of the summed intensity") {
  CableGraph g = read_graph_file(kGraphDir + "two_anchors.txt");
  const int n = 5000;
  std::vector<double> sum_v, one_v, sum_m, one_m;
  for (int t = 0; t < n; ++t) {
    OccupationField a = sample_field(g, 1.0, 4, derive_seed(907, 0, t));
    OccupationField b = sample_field(g, 1.0, 4, derive_seed(907, 1, t));
    OccupationField c = sample_field(g, 2.0, 4, derive_seed(907, 2, t));
    sum_v.push_back(a.vertex.value[1] + b.vertex.value[1]);
    one_v.push_back(c.vertex.value[1]);
    sum_m.push_back(a.edge[0].values[8] + b.edge[0].values[8]);
    one_m.push_back(c.edge[0].values[8]);
  }
  CHECK(ks_two_sample(sum_v, one_v).p_value > 0.01);
  CHECK(ks_two_sample(sum_m, one_m).p_value > 0.01);
}

TEST_CASE("vertex marginal at unit intensity is Gamma(1/2, G(v,v))") {
  CableGraph g = read_graph_file(kGraphDir + "single_edge.txt");
  std::vector<double> s(8000);
  for (std::size_t t = 0; t < s.size(); ++t) {
    OccupationField f = sample_field(g, 1.0, 2, derive_seed(908, 2, t));
    s[t] = f.vertex.value[1];
  }
  KsResult r = ks_test(s, [](double x) { return gamma_p(0.5, x / 3.0); });
  CHECK(r.p_value > 0.01);
}

TEST_CASE("decomposition against the largest loop") {
  CableGraph g = read_graph_file(kGraphDir + "loops5.txt");
  SoupConfig cfg;
  cfg.intensity = 3.0;
  cfg.seed = 909;
  LoopDecomposition dec = decompose_against_loop(g, cfg, 5);

  SUBCASE("whole equals part plus rest on every grid point") {
    for (int v = 0; v < g.n_vertices; ++v)
      CHECK(dec.whole.vertex.value[v] == dec.part.vertex.value[v] + dec.rest.vertex.value[v]);
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      REQUIRE(dec.whole.edge[e].size() == dec.part.edge[e].size());
      for (std::size_t i = 0; i < dec.whole.edge[e].size(); ++i)
        CHECK(dec.whole.edge[e].values[i] ==
              dec.part.edge[e].values[i] + dec.rest.edge[e].values[i]);
    }
  }

  SUBCASE("part vanishes away from the chosen loop") {
    std::set<int> on_loop(dec.loop.vertices.begin(), dec.loop.vertices.end());
    for (int v = 0; v < g.n_vertices; ++v)
      if (!on_loop.count(v)) CHECK(dec.part.vertex.value[v] == 0.0);
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      bool u_on = on_loop.count(g.edges[e].u) > 0;
      bool v_on = on_loop.count(g.edges[e].v) > 0;
      if (!u_on || !v_on) {
        // Not a loop edge; the interior must be silent.
        for (std::size_t i = 1; i + 1 < dec.part.edge[e].size(); ++i)
          CHECK(dec.part.edge[e].values[i] == 0.0);
      }
    }
  }

  SUBCASE("part vertex values reuse the loop's holding-time stream") {
    std::vector<double> lt = loop_vertex_local_times(g, dec.loop, cfg.seed);
    for (int v = 0; v < g.n_vertices; ++v)
      CHECK(dec.part.vertex.value[v] == lt[v]);
  }

  SUBCASE("the chosen loop maximizes the diameter") {
    LoopSoup soup = sample_loops(g, cfg);
    REQUIRE(!soup.loops.empty());
    double best = -1.0;
    for (const DiscreteLoop& loop : soup.loops)
      best = std::max(best, loop_diameter(g, loop));
    CHECK(loop_diameter(g, dec.loop) == doctest::Approx(best));
  }
}

TEST_CASE("decomposition with an impossible filter is refused") {
  CableGraph g = read_graph_file(kGraphDir + "loops5.txt");
  SoupConfig cfg;
  cfg.intensity = 1.0;
  cfg.seed = 910;
  cfg.diameter_floor = 1e9;
  CHECK_THROWS_AS(decompose_against_loop(g, cfg, 4), EmptySoupError);
}

TEST_CASE("cable walk conserves occupation and stays off the boundary") {
  CableGraph g = read_graph_file(kGraphDir + "two_anchors.txt");
  RngStream rng(911, "cable-walk");
  CableBmConfig cfg;
  cfg.start = 1;
  cfg.step = 1e-3;
  cfg.horizon = 0.3;
  CableOccupation occ = simulate_cable_bm(g, cfg, rng);
  double sum = occ.vertex_density[1] * occ.vertex_bin[1];
  for (std::size_t e = 0; e < occ.edge_density.size(); ++e)
    for (double d : occ.edge_density[e]) sum += d * occ.edge_dx[e];
  CHECK(std::abs(sum - occ.elapsed) <= 2.0 * cfg.step);
  CHECK(occ.vertex_density[0] == 0.0);
  CHECK(occ.vertex_density[2] == 0.0);
  if (!occ.killed) CHECK(occ.elapsed == doctest::Approx(0.3).epsilon(1e-2));
}

TEST_CASE("killed cable walks record the boundary vertex they died at") {
  CableGraph g = read_graph_file(kGraphDir + "single_edge.txt");
  int killed = 0;
  for (int t = 0; t < 20; ++t) {
    RngStream rng(912, "cable-kill", static_cast<std::uint64_t>(t));
    CableBmConfig cfg;
    cfg.start = 1;
    cfg.step = 1.5e-3;
    CableOccupation occ = simulate_cable_bm(g, cfg, rng);
    CHECK(occ.killed);
    CHECK(occ.final_vertex == 0);
    CHECK(occ.vertex_density[0] == 0.0);
    ++killed;
  }
  CHECK(killed == 20);
}

TEST_CASE("trajectory recording keeps points within the graph") {
  CableGraph g = read_graph_file(kGraphDir + "two_anchors.txt");
  RngStream rng(913, "cable-traj");
  CableBmConfig cfg;
  cfg.start = 1;
  cfg.step = 1e-3;
  cfg.horizon = 0.05;
  cfg.record_trajectory = true;
  cfg.max_trajectory_points = 512;
  CableOccupation occ = simulate_cable_bm(g, cfg, rng);
  CHECK(!occ.trajectory.empty());
  CHECK(occ.trajectory.size() <= 512);
  for (const CablePoint& p : occ.trajectory) {
    if (p.edge >= 0) {
      CHECK(p.offset >= 0.0);
      CHECK(p.offset <= g.edges[p.edge].length);
    } else {
      CHECK(p.vertex >= 0);
      CHECK(p.vertex < g.n_vertices);
    }
  }
}

TEST_CASE("mean occupation density at the start vertex recovers the green value") {
  CableGraph g = read_graph_file(kGraphDir + "single_edge.txt");
  const int n = 10000;
  double s = 0.0, s2 = 0.0;
  for (int t = 0; t < n; ++t) {
    RngStream rng(914, "cable-green", static_cast<std::uint64_t>(t));
    CableBmConfig cfg;
    cfg.start = 1;
    cfg.step = 1.5e-3;
    CableOccupation occ = simulate_cable_bm(g, cfg, rng);
    double d = occ.vertex_density[1];
    s += d;
    s2 += d * d;
  }
  double m = s / n;
  double se = std::sqrt((s2 / n - m * m) / n);
  CHECK(std::abs(m - 3.0) <= 3.0 * se);
}

TEST_CASE("field dumps are reproducible byte for byte") {
  CableGraph g = read_graph_file(kGraphDir + "two_anchors.txt");
  OccupationField f = sample_field(g, 1.0, 4, 915);
  fs::path dir1 = fs::temp_directory_path() / "cablesoup_dump1";
  fs::path dir2 = fs::temp_directory_path() / "cablesoup_dump2";
  fs::remove_all(dir1);
  fs::remove_all(dir2);
  write_field_dump(f, g, dir1.string());
  write_field_dump(f, g, dir2.string());
  REQUIRE(fs::exists(dir1 / "manifest.json"));
  REQUIRE(fs::exists(dir1 / "vertices.csv"));
  for (const char* name : {"manifest.json", "vertices.csv", "edge_000.csv", "edge_001.csv"}) {
    std::ifstream a(dir1 / name), b(dir2 / name);
    REQUIRE(a);
    REQUIRE(b);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
    CHECK(!sa.empty());
  }
  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

TEST_CASE("sampled fields keep a crowd of strong points on every edge") {
  // Finite-resolution stand-in for the density of 1-quick points: at J = 16
  // the threshold-eta quick set must be non-empty on every edge for almost
  // every seed.
  CableGraph g = read_graph_file(kGraphDir + "loops5.txt");
  const int n_seeds = 200;
  int good = 0;
  for (int t = 0; t < n_seeds; ++t) {
    OccupationField f = sample_field(g, 1.0, 16, derive_seed(916, 3, t));
    bool all_edges = true;
    for (const DyadicPath& p : f.edge) {
      ModulusReport rep = modulus_scan(p, 2);
      if (quick_points(p, rep, 1.0, 0.1).empty()) {
        all_edges = false;
        break;
      }
    }
    if (all_edges) ++good;
  }
  CHECK(good >= 198);
}

#include "cablesoup/occupation_field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <utility>

#include "cablesoup/besq.hpp"
#include "cablesoup/errors.hpp"
#include "json.hpp"

namespace cablesoup {

namespace {

// 64-bit pool of fair coin flips; the lattice walks burn one bit per move.
struct BitPool {
  RngStream& rng;
  std::uint64_t bits = 0;
  int left = 0;

  explicit BitPool(RngStream& r) : rng(r) {}
  bool next() {
    if (left == 0) {
      bits = rng.next_u64();
      left = 64;
    }
    const bool b = bits & 1;
    bits >>= 1;
    --left;
    return b;
  }
};

// Edge profile conditional on the endpoint values: X(2x)/2 for X a BESQ-c
// bridge from 2*value_u to 2*value_v over time 2*length.  Endpoint grid
// values come out as value_u and value_v exactly (doubling and halving are
// exact in binary floating point).
DyadicPath edge_profile(double value_u, double value_v, double c, double length,
                        int levels, RngStream& rng) {
  const int ci = static_cast<int>(std::lround(c));
  DyadicPath x;
  if (std::abs(c - ci) < 1e-12 && ci >= 1 && ci <= 3) {
    x = besq_bridge_gaussian(2.0 * value_u, 2.0 * value_v, ci, 2.0 * length, levels, rng);
  } else {
    x = besq_bridge(2.0 * value_u, 2.0 * value_v, c, 2.0 * length, levels, rng);
  }
  DyadicPath p = DyadicPath::with_levels(length, levels);
  for (std::size_t i = 0; i < p.size(); ++i) p.values[i] = 0.5 * x.values[i];
  return p;
}

void fill_edges(const CableGraph& g, const VertexField& vf, double c, int levels,
                std::uint64_t seed, std::string_view purpose,
                std::vector<DyadicPath>& out) {
  out.resize(g.edges.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    try {
      const auto& edge = g.edges[e];
      RngStream rng(seed, purpose, e);
      DyadicPath p = edge_profile(vf.value[edge.u], vf.value[edge.v], c, edge.length,
                                  levels, rng);
      p.kind = "edge-profile";
      p.seed = seed;
      char buf[48];
      std::snprintf(buf, sizeof buf, "%s/%zu", std::string(purpose).c_str(), e);
      p.stream = buf;
      out[e] = std::move(p);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

OccupationField extend_to_edges(const CableGraph& g, const VertexField& vf, double c,
                                int levels, std::uint64_t seed) {
  if (c <= 0.0) throw InvalidIntensityError("intensity must be positive");
  if (static_cast<int>(vf.value.size()) != g.n_vertices) {
    throw InputError("vertex field size does not match the graph");
  }
  for (double x : vf.value) {
    if (!(x >= 0.0)) throw InputError("vertex field must be nonnegative");
  }
  OccupationField field;
  field.vertex = vf;
  field.intensity = c;
  field.levels = levels;
  field.seed = seed;
  fill_edges(g, vf, c, levels, seed, "edge", field.edge);
  return field;
}

OccupationField sample_field(const CableGraph& g, double c, int levels, std::uint64_t seed) {
  SoupConfig cfg;
  cfg.intensity = c;
  cfg.seed = seed;
  const VertexField vf = sample_vertex_field(g, cfg);
  return extend_to_edges(g, vf, c, levels, seed);
}

namespace {

// One crossing of an edge discretized into n cells: lattice walk entering at
// site 0, reflected there, absorbed at site n; time dt = dx^2 per move is
// binned at the interior sites.  Time near the vertices is carried by the
// vertex holding draws, so sites 0 and n accrue nothing.
void decorate_crossing(int n, double dt, std::vector<double>& time_at, BitPool& bits) {
  int pos = 0;
  while (pos != n) {
    if (pos == 0) {
      pos = 1;
      continue;
    }
    time_at[pos] += dt;
    pos += bits.next() ? 1 : -1;
  }
}

}  // namespace

LoopDecomposition decompose_against_loop(const CableGraph& g, const SoupConfig& cfg,
                                         int levels) {
  const LoopSoup soup = sample_loops(g, cfg);
  std::vector<char> in_window(g.n_vertices, cfg.window.empty() ? 1 : 0);
  for (int v : cfg.window) {
    if (v < 0 || v >= g.n_vertices) throw InputError("window vertex out of range");
    in_window[v] = 1;
  }

  const DiscreteLoop* chosen = nullptr;
  double chosen_diam = -1.0;
  for (const DiscreteLoop& loop : soup.loops) {
    bool meets = false;
    for (int v : loop.vertices) {
      if (in_window[v]) {
        meets = true;
        break;
      }
    }
    if (!meets) continue;
    const double diam = loop_diameter(g, loop);
    if (diam < cfg.diameter_floor) continue;
    if (chosen == nullptr || diam > chosen_diam ||
        (diam == chosen_diam && loop.vertices < chosen->vertices)) {
      chosen = &loop;
      chosen_diam = diam;
    }
  }
  if (chosen == nullptr) {
    throw EmptySoupError("no loop meets the window at this seed");
  }

  LoopDecomposition dec;
  dec.loop = *chosen;

  dec.part.vertex.value = loop_vertex_local_times(g, *chosen, cfg.seed);
  dec.part.vertex.intensity = cfg.intensity;
  dec.part.vertex.seed = cfg.seed;

  dec.rest.vertex.value.assign(g.n_vertices, 0.0);
  dec.rest.vertex.intensity = cfg.intensity;
  dec.rest.vertex.seed = cfg.seed;
  for (const DiscreteLoop& loop : soup.loops) {
    if (loop.index == chosen->index) continue;
    const std::vector<double> lt = loop_vertex_local_times(g, loop, cfg.seed);
    for (int v = 0; v < g.n_vertices; ++v) dec.rest.vertex.value[v] += lt[v];
  }
  if (cfg.intensity > 0.0) {
    for (int v : g.interior) {
      RngStream rng(cfg.seed, "trivial", static_cast<std::uint64_t>(v));
      dec.rest.vertex.value[v] += rng.gamma(0.5 * cfg.intensity, g.holding_mean(v));
    }
  }

  // rest: bridges between its own endpoint values on every edge.
  dec.rest.intensity = cfg.intensity;
  dec.rest.levels = levels;
  dec.rest.seed = cfg.seed;
  fill_edges(g, dec.rest.vertex, cfg.intensity, levels, cfg.seed, "rest-edge",
             dec.rest.edge);

  // part: decorate the edges the loop crosses.  The walk mesh is capped at
  // 2^10 cells; the binned density is upsampled linearly to the field grid
  // with the endpoint values pinned to the loop's vertex local times.
  const int mesh_levels = std::min(levels, 10);
  const std::size_t n_grid = (std::size_t{1} << levels) + 1;
  const int n_mesh = 1 << mesh_levels;
  std::vector<std::vector<double>> crossing_time(g.edges.size());
  RngStream decorate(cfg.seed, "decorate", chosen->index);
  BitPool bits(decorate);
  const std::size_t n_steps = chosen->vertices.size();
  for (std::size_t s = 0; s < n_steps; ++s) {
    const int u = chosen->vertices[s];
    const int v = chosen->vertices[(s + 1) % n_steps];
    // pick the edge instance among parallel edges, weighted by conductance
    double total = 0.0;
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      const auto& edge = g.edges[e];
      if ((edge.u == u && edge.v == v) || (edge.u == v && edge.v == u)) {
        total += 1.0 / edge.length;
      }
    }
    if (!(total > 0.0)) throw SingularSystemError("loop step without a connecting edge");
    double draw = decorate.uniform() * total;
    std::size_t pick = g.edges.size();
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      const auto& edge = g.edges[e];
      if ((edge.u == u && edge.v == v) || (edge.u == v && edge.v == u)) {
        draw -= 1.0 / edge.length;
        pick = e;
        if (draw <= 0.0) break;
      }
    }
    const auto& edge = g.edges[pick];
    const double dxm = edge.length / n_mesh;
    std::vector<double> walk_time(n_mesh + 1, 0.0);
    decorate_crossing(n_mesh, dxm * dxm, walk_time, bits);
    auto& acc = crossing_time[pick];
    if (acc.empty()) acc.assign(n_mesh + 1, 0.0);
    if (edge.u == u) {
      for (int k = 0; k <= n_mesh; ++k) acc[k] += walk_time[k];
    } else {
      for (int k = 0; k <= n_mesh; ++k) acc[k] += walk_time[n_mesh - k];
    }
  }

  dec.part.intensity = cfg.intensity;
  dec.part.levels = levels;
  dec.part.seed = cfg.seed;
  dec.part.edge.resize(g.edges.size());
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& edge = g.edges[e];
    DyadicPath p = DyadicPath::with_levels(edge.length, levels);
    p.kind = "edge-profile";
    p.seed = cfg.seed;
    char buf[48];
    std::snprintf(buf, sizeof buf, "decorate/%zu", e);
    p.stream = buf;
    if (!crossing_time[e].empty()) {
      const double dxm = edge.length / n_mesh;
      std::vector<double> density(n_mesh + 1);
      for (int k = 1; k < n_mesh; ++k) density[k] = crossing_time[e][k] / dxm;
      density[0] = dec.part.vertex.value[edge.u];
      density[n_mesh] = dec.part.vertex.value[edge.v];
      const int shift = levels - mesh_levels;
      const std::size_t mask = (std::size_t{1} << shift) - 1;
      for (std::size_t i = 0; i < n_grid; ++i) {
        const std::size_t k = i >> shift;
        const std::size_t rem = i & mask;
        if (rem == 0) {
          p.values[i] = density[k];
        } else {
          const double f = static_cast<double>(rem) / static_cast<double>(mask + 1);
          p.values[i] = density[k] + f * (density[k + 1] - density[k]);
        }
      }
    }
    // untouched edges stay zero in the interior; the endpoints still carry
    // the loop's vertex values so the profile matches the vertex field
    p.values.front() = dec.part.vertex.value[edge.u];
    p.values.back() = dec.part.vertex.value[edge.v];
    dec.part.edge[e] = std::move(p);
  }

  // whole := part + rest, so the decomposition identity is exact on the grid
  dec.whole.intensity = cfg.intensity;
  dec.whole.levels = levels;
  dec.whole.seed = cfg.seed;
  dec.whole.vertex.intensity = cfg.intensity;
  dec.whole.vertex.seed = cfg.seed;
  dec.whole.vertex.value.assign(g.n_vertices, 0.0);
  for (int v = 0; v < g.n_vertices; ++v) {
    dec.whole.vertex.value[v] = dec.part.vertex.value[v] + dec.rest.vertex.value[v];
  }
  dec.whole.edge.resize(g.edges.size());
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    DyadicPath p = dec.rest.edge[e];
    for (std::size_t i = 0; i < p.size(); ++i) p.values[i] += dec.part.edge[e].values[i];
    p.stream = "whole/" + std::to_string(e);
    dec.whole.edge[e] = std::move(p);
  }
  return dec;
}

CableOccupation simulate_cable_bm(const CableGraph& g, const CableBmConfig& cfg,
                                  RngStream& rng) {
  if (cfg.start < 0 || cfg.start >= g.n_vertices) throw InputError("start vertex out of range");
  if (g.edges.empty()) throw InputError("graph has no edges");
  double min_len = std::numeric_limits<double>::infinity();
  for (const auto& e : g.edges) min_len = std::min(min_len, e.length);
  if (!(cfg.step > 0.0) || cfg.step > 1e-3 * min_len) {
    throw StepTooCoarseError("step must be positive and at most 1e-3 of the shortest edge");
  }

  const std::size_t ne = g.edges.size();
  std::vector<int> cells(ne);
  std::vector<double> dx(ne), dt(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    cells[e] = static_cast<int>(std::ceil(g.edges[e].length / cfg.step));
    dx[e] = g.edges[e].length / cells[e];
    dt[e] = dx[e] * dx[e];
  }

  struct Incident {
    int edge;
    bool at_u;
  };
  std::vector<std::vector<Incident>> incident(g.n_vertices);
  for (std::size_t e = 0; e < ne; ++e) {
    incident[g.edges[e].u].push_back({static_cast<int>(e), true});
    incident[g.edges[e].v].push_back({static_cast<int>(e), false});
  }
  std::vector<double> hold(g.n_vertices, 0.0), bin(g.n_vertices, 0.0),
      inv_sum(g.n_vertices, 0.0);
  for (int v = 0; v < g.n_vertices; ++v) {
    double sum_dx = 0.0, sum_inv = 0.0;
    for (const auto& inc : incident[v]) {
      sum_dx += dx[inc.edge];
      sum_inv += 1.0 / dx[inc.edge];
    }
    if (sum_inv > 0.0) hold[v] = sum_dx / sum_inv;
    bin[v] = 0.5 * sum_dx;
    inv_sum[v] = sum_inv;
  }

  CableOccupation out;
  out.edge_dx.assign(dx.begin(), dx.end());
  out.edge_density.resize(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    out.edge_density[e].assign(std::max(0, cells[e] - 1), 0.0);
  }
  out.vertex_density.assign(g.n_vertices, 0.0);
  out.vertex_bin = bin;

  std::vector<std::vector<double>> edge_time(ne);
  for (std::size_t e = 0; e < ne; ++e) edge_time[e].assign(std::max(0, cells[e] - 1), 0.0);
  std::vector<double> vertex_time(g.n_vertices, 0.0);

  // trajectory recording with adaptive thinning: when full, drop every other
  // point and record half as often
  std::uint64_t stride = 1, event = 0;
  auto record = [&](double t, int edge, double offset, int vertex) {
    if (!cfg.record_trajectory) return;
    if (event++ % stride != 0) return;
    if (out.trajectory.size() >= cfg.max_trajectory_points && cfg.max_trajectory_points > 1) {
      std::vector<CablePoint> kept;
      kept.reserve(out.trajectory.size() / 2 + 1);
      for (std::size_t i = 0; i < out.trajectory.size(); i += 2) kept.push_back(out.trajectory[i]);
      out.trajectory = std::move(kept);
      stride *= 2;
    }
    out.trajectory.push_back({t, edge, offset, vertex});
  };

  BitPool bits(rng);
  bool at_vertex = true;
  int v = cfg.start, e = -1, k = 0;
  record(0.0, -1, 0.0, v);
  for (;;) {
    if (at_vertex) {
      if (g.is_boundary[v]) {
        out.killed = true;
        out.final_vertex = v;
        if (cfg.record_trajectory) out.trajectory.push_back({out.elapsed, -1, 0.0, v});
        break;
      }
      if (cfg.horizon > 0.0 && out.elapsed >= cfg.horizon) break;
      vertex_time[v] += hold[v];
      out.elapsed += hold[v];
      double draw = rng.uniform() * inv_sum[v];
      const Incident* go = &incident[v].back();
      for (const auto& inc : incident[v]) {
        draw -= 1.0 / dx[inc.edge];
        if (draw <= 0.0) {
          go = &inc;
          break;
        }
      }
      e = go->edge;
      k = go->at_u ? 1 : cells[e] - 1;
      at_vertex = false;
      record(out.elapsed, e, k * dx[e], -1);
    } else {
      if (cfg.horizon > 0.0 && out.elapsed >= cfg.horizon) break;
      double* time_row = edge_time[e].data();
      const double step_dt = dt[e];
      const int last = cells[e];
      // stay in the edge interior in a tight loop; vertex hits break out
      while (k > 0 && k < last) {
        time_row[k - 1] += step_dt;
        out.elapsed += step_dt;
        k += bits.next() ? 1 : -1;
        if (cfg.horizon > 0.0 && out.elapsed >= cfg.horizon) break;
        if (cfg.record_trajectory) record(out.elapsed, e, k * dx[e], -1);
      }
      if (k == 0 || k == last) {
        v = (k == 0) ? g.edges[e].u : g.edges[e].v;
        at_vertex = true;
        record(out.elapsed, -1, 0.0, v);
      } else {
        break;  // horizon reached mid-edge
      }
    }
  }

  for (std::size_t i = 0; i < ne; ++i) {
    for (std::size_t j = 0; j < edge_time[i].size(); ++j) {
      out.edge_density[i][j] = edge_time[i][j] / dx[i];
    }
  }
  for (int w = 0; w < g.n_vertices; ++w) {
    out.vertex_density[w] = bin[w] > 0.0 ? vertex_time[w] / bin[w] : 0.0;
  }
  if (!out.killed) out.final_vertex = at_vertex ? v : -1;
  return out;
}

void write_field_dump(const OccupationField& field, const CableGraph& g,
                      const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  {
    std::ofstream f(fs::path(dir) / "vertices.csv");
    if (!f) throw InputError("cannot write vertices.csv under " + dir);
    f << "vertex,value\n";
    for (int v = 0; v < static_cast<int>(field.vertex.value.size()); ++v) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", field.vertex.value[v]);
      f << v << "," << buf << "\n";
    }
  }

  nlohmann::ordered_json manifest;
  manifest["intensity"] = field.intensity;
  manifest["levels"] = field.levels;
  manifest["seed"] = field.seed;
  manifest["graph_hash"] = graph_hash(g);
  manifest["n_vertices"] = g.n_vertices;
  manifest["vertices_file"] = "vertices.csv";
  nlohmann::ordered_json edge_files = nlohmann::ordered_json::array();
  for (std::size_t e = 0; e < field.edge.size(); ++e) {
    char name[32];
    std::snprintf(name, sizeof name, "edge_%03zu.csv", e);
    write_csv(field.edge[e], (fs::path(dir) / name).string());
    nlohmann::ordered_json entry;
    entry["file"] = name;
    entry["u"] = g.edges[e].u;
    entry["v"] = g.edges[e].v;
    entry["length"] = g.edges[e].length;
    edge_files.push_back(entry);
  }
  manifest["edges"] = edge_files;
  std::ofstream f(fs::path(dir) / "manifest.json");
  if (!f) throw InputError("cannot write manifest.json under " + dir);
  f << manifest.dump(2) << "\n";
}

}  // namespace cablesoup

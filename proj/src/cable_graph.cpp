#include "cablesoup/cable_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <sstream>

#include "cablesoup/errors.hpp"
#include "cablesoup/rng.hpp"

namespace cablesoup {

double CableGraph::total_conductance(int v) const {
  double c = 0.0;
  for (const auto& [w, len] : adj[v]) {
    (void)w;
    c += 1.0 / len;
  }
  return c;
}

double CableGraph::holding_mean(int v) const { return 2.0 / total_conductance(v); }

CableGraph build_graph(const std::vector<CableGraph::Edge>& edges,
                       const std::vector<int>& boundary) {
  CableGraph g;
  int max_id = -1;
  for (const auto& e : edges) {
    if (e.u < 0 || e.v < 0) throw InputError("vertex ids must be non-negative");
    max_id = std::max(max_id, std::max(e.u, e.v));
  }
  for (int b : boundary) {
    if (b < 0) throw InputError("vertex ids must be non-negative");
    max_id = std::max(max_id, b);
  }
  if (max_id < 0) throw InputError("graph has no vertices");
  g.n_vertices = max_id + 1;
  g.is_boundary.assign(g.n_vertices, false);
  for (int b : boundary) g.is_boundary[b] = true;
  g.boundary.clear();
  for (int v = 0; v < g.n_vertices; ++v) {
    if (g.is_boundary[v]) g.boundary.push_back(v);
  }
  if (g.boundary.empty()) {
    throw NotTransientError("graph needs at least one boundary vertex");
  }

  g.adj.assign(g.n_vertices, {});
  for (const auto& e : edges) {
    if (e.u == e.v) {
      std::ostringstream msg;
      msg << "self loop at vertex " << e.u;
      throw SelfLoopError(msg.str());
    }
    if (!(e.length > 0.0)) {
      std::ostringstream msg;
      msg << "edge " << e.u << "-" << e.v << " has non-positive length";
      throw ZeroLengthError(msg.str());
    }
    g.edges.push_back(e);
    g.adj[e.u].emplace_back(e.v, e.length);
    g.adj[e.v].emplace_back(e.u, e.length);
  }

  g.interior_index.assign(g.n_vertices, -1);
  for (int v = 0; v < g.n_vertices; ++v) {
    if (!g.is_boundary[v]) {
      g.interior_index[v] = static_cast<int>(g.interior.size());
      g.interior.push_back(v);
    }
  }

  // Every interior vertex must reach the boundary.
  std::vector<bool> reached(g.n_vertices, false);
  std::deque<int> queue;
  for (int b : g.boundary) {
    reached[b] = true;
    queue.push_back(b);
  }
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    for (const auto& [w, len] : g.adj[v]) {
      (void)len;
      if (!reached[w]) {
        reached[w] = true;
        queue.push_back(w);
      }
    }
  }
  for (int v : g.interior) {
    if (!reached[v]) {
      std::ostringstream msg;
      msg << "interior vertex " << v << " cannot reach the boundary";
      throw NotTransientError(msg.str());
    }
    if (g.adj[v].empty()) {
      std::ostringstream msg;
      msg << "interior vertex " << v << " is isolated";
      throw NotTransientError(msg.str());
    }
  }
  return g;
}

CableGraph read_graph(std::istream& in) {
  std::vector<CableGraph::Edge> edges;
  std::vector<int> boundary;
  bool saw_boundary = false;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    std::string first;
    if (!(row >> first)) continue;
    if (first == "boundary") {
      saw_boundary = true;
      int id;
      while (row >> id) boundary.push_back(id);
      continue;
    }
    CableGraph::Edge e;
    try {
      e.u = std::stoi(first);
    } catch (const std::exception&) {
      throw InputError("bad graph line: " + line);
    }
    if (!(row >> e.v >> e.length)) throw InputError("bad edge line: " + line);
    edges.push_back(e);
  }
  if (!saw_boundary) throw InputError("graph file is missing the boundary line");
  return build_graph(edges, boundary);
}

CableGraph read_graph_file(const std::string& filename) {
  std::ifstream f(filename);
  if (!f) throw InputError("cannot open graph file " + filename);
  return read_graph(f);
}

void write_graph(const CableGraph& g, std::ostream& out) {
  out << "boundary";
  for (int b : g.boundary) out << " " << b;
  out << "\n";
  for (const auto& e : g.edges) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", e.length);
    out << e.u << " " << e.v << " " << buf << "\n";
  }
}

std::uint64_t graph_hash(const CableGraph& g) {
  std::ostringstream s;
  write_graph(g, s);
  std::string text = s.str();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

JumpChain jump_chain(const CableGraph& g) {
  int m = static_cast<int>(g.interior.size());
  JumpChain jc;
  jc.p = Eigen::MatrixXd::Zero(m, m);
  jc.kill.assign(m, 0.0);
  jc.hold_mean.assign(m, 0.0);
  for (int i = 0; i < m; ++i) {
    int v = g.interior[i];
    double c_v = g.total_conductance(v);
    jc.hold_mean[i] = 2.0 / c_v;
    for (const auto& [w, len] : g.adj[v]) {
      double q = (1.0 / len) / c_v;
      if (g.is_boundary[w]) {
        jc.kill[i] += q;
      } else {
        jc.p(i, g.interior_index[w]) += q;
      }
    }
  }

  // Spectral radius by power iteration on the symmetrized chain
  // S = D^{1/2} P D^{-1/2} (similar, so same spectrum; symmetric, so the
  // Rayleigh quotient converges cleanly).
  if (m > 0) {
    Eigen::VectorXd d(m);
    for (int i = 0; i < m; ++i) d(i) = std::sqrt(g.total_conductance(g.interior[i]));
    Eigen::MatrixXd s = jc.p;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) s(i, j) = jc.p(i, j) * d(i) / d(j);
    }
    Eigen::VectorXd x = Eigen::VectorXd::Constant(m, 1.0 / std::sqrt(double(m)));
    double rho = 0.0;
    for (int it = 0; it < 100000; ++it) {
      Eigen::VectorXd y = s * x;
      double norm = y.norm();
      if (norm == 0.0) {
        rho = 0.0;
        break;
      }
      y /= norm;
      double rho_new = y.dot(s * y);
      bool done = std::fabs(rho_new - rho) < 1e-10;
      rho = rho_new;
      x = y;
      if (done) break;
    }
    jc.spectral_radius = rho;
    if (!(rho < 1.0 - 1e-10)) {
      throw NotTransientError("jump chain spectral radius is not below 1");
    }
  }
  return jc;
}

GreenMatrix green_matrix(const CableGraph& g) {
  int m = static_cast<int>(g.interior.size());
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    int v = g.interior[i];
    lap(i, i) = g.total_conductance(v);
    for (const auto& [w, len] : g.adj[v]) {
      if (!g.is_boundary[w]) {
        lap(i, g.interior_index[w]) -= 1.0 / len;
      }
    }
  }
  GreenMatrix out;
  out.vertices = g.interior;
  Eigen::LLT<Eigen::MatrixXd> llt(lap);
  if (llt.info() != Eigen::Success) {
    throw SingularSystemError("Dirichlet Laplacian is not positive definite");
  }
  out.g = 2.0 * llt.solve(Eigen::MatrixXd::Identity(m, m));
  // The solve leaves ulp-level asymmetry; the matrix is symmetric by theory.
  out.g = (0.5 * (out.g + out.g.transpose())).eval();
  return out;
}

}  // namespace cablesoup

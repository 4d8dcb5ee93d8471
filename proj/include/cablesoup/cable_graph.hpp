#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace cablesoup {

// A finite metric graph with a distinguished absorbing boundary.  Edges carry
// positive lengths; Brownian motion on the graph is killed on the boundary,
// so the interior part must be transient (every interior vertex reaches the
// boundary).  Parallel edges are allowed, self loops are not.
struct CableGraph {
  struct Edge {
    int u = 0;
    int v = 0;
    double length = 0.0;
  };

  int n_vertices = 0;
  std::vector<Edge> edges;
  std::vector<bool> is_boundary;
  std::vector<int> boundary;            // sorted ids
  std::vector<int> interior;            // sorted ids
  std::vector<int> interior_index;      // vertex id -> interior row, -1 for boundary
  std::vector<std::vector<std::pair<int, double>>> adj;  // (neighbor, length)

  // C_v: sum of 1/length over all incident edges.
  double total_conductance(int v) const;
  // Mean of the exponential holding time per jump-chain visit, 2 / C_v.
  double holding_mean(int v) const;

  std::size_t edge_count() const { return edges.size(); }
};

CableGraph build_graph(const std::vector<CableGraph::Edge>& edges,
                       const std::vector<int>& boundary);

// Text format: '# comment' lines, one 'boundary id id ...' line, then one
// 'u v length' line per edge.
CableGraph read_graph(std::istream& in);
CableGraph read_graph_file(const std::string& filename);
void write_graph(const CableGraph& g, std::ostream& out);

// FNV-1a over the canonical serialization; stamped into field manifests.
std::uint64_t graph_hash(const CableGraph& g);

// Jump chain of the cable Brownian motion on the interior vertices:
// P(u -> v) proportional to 1/length(u, v), killed on the boundary.
struct JumpChain {
  Eigen::MatrixXd p;                // interior x interior, substochastic
  std::vector<double> kill;         // per interior vertex, escape probability
  std::vector<double> hold_mean;    // per interior vertex, 2 / C_v
  double spectral_radius = 0.0;     // of p, by power iteration
};

JumpChain jump_chain(const CableGraph& g);

// G = 2 L^{-1} with L the Dirichlet Laplacian with conductances 1/length.
// G(v, v) is the expected total local time at v for the cable Brownian
// motion started at v and killed on the boundary.
struct GreenMatrix {
  Eigen::MatrixXd g;            // interior x interior
  std::vector<int> vertices;    // row -> vertex id
};

GreenMatrix green_matrix(const CableGraph& g);

}  // namespace cablesoup

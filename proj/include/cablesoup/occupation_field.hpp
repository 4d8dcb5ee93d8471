#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cablesoup/cable_graph.hpp"
#include "cablesoup/dyadic_path.hpp"
#include "cablesoup/loop_soup.hpp"
#include "cablesoup/rng.hpp"

namespace cablesoup {

// The occupation field on the whole cable graph: values at the vertices plus
// a dyadic profile along every edge.  Every edge profile's endpoint values
// equal the corresponding vertex values exactly.
struct OccupationField {
  VertexField vertex;
  std::vector<DyadicPath> edge;  // one per g.edges, over [0, length]
  double intensity = 0.0;
  int levels = 0;
  std::uint64_t seed = 0;
};

// Fill every edge independently with the conditional law given the endpoint
// values: a squared Bessel bridge of dimension c.  In the natural time scale
// of the graph metric this is X(2x)/2 for X a BESQ-c bridge from 2*value(u)
// to 2*value(v) over time 2*length.  Integer c in {1,2,3} takes the Gaussian
// bridge construction, which is the same law.
OccupationField extend_to_edges(const CableGraph& g, const VertexField& vf, double c,
                                int levels, std::uint64_t seed);

OccupationField sample_field(const CableGraph& g, double c, int levels, std::uint64_t seed);

// Λ = Λ_n + ℓ_n against a distinguished loop: the largest-diameter loop
// meeting the window (ties by canonical order).  part carries the loop's own
// vertex local times and a decorated profile on the edges it crosses; rest
// carries the remaining loops plus its own edge bridges; whole is their
// pointwise sum, so the identity holds exactly on the grid.
struct LoopDecomposition {
  OccupationField whole;
  OccupationField part;
  OccupationField rest;
  DiscreteLoop loop;
};

LoopDecomposition decompose_against_loop(const CableGraph& g, const SoupConfig& cfg,
                                         int levels);

// Random-walk-scale simulation of the cable Brownian motion, killed on the
// boundary, with occupation binned per lattice site.
struct CableBmConfig {
  int start = 0;
  double step = 1e-3;       // lattice mesh target; must be <= 1e-3 * min edge
  double horizon = 0.0;     // 0: run to killing
  bool record_trajectory = false;
  std::size_t max_trajectory_points = 1 << 16;
};

struct CablePoint {
  double time = 0.0;
  int edge = -1;       // -1: at a vertex
  double offset = 0.0; // position along the edge from its u end
  int vertex = -1;
};

struct CableOccupation {
  std::vector<std::vector<double>> edge_density;  // per edge, interior sites
  std::vector<double> edge_dx;                    // mesh of each edge
  std::vector<double> vertex_density;             // per vertex id
  std::vector<double> vertex_bin;                 // bin width at each vertex
  double elapsed = 0.0;
  bool killed = false;
  int final_vertex = -1;
  std::vector<CablePoint> trajectory;
};

CableOccupation simulate_cable_bm(const CableGraph& g, const CableBmConfig& cfg,
                                  RngStream& rng);

// Dump: vertices.csv, edge_NNN.csv per edge, manifest.json carrying
// intensity, levels, seed and the graph hash.
void write_field_dump(const OccupationField& field, const CableGraph& g,
                      const std::string& dir);

}  // namespace cablesoup

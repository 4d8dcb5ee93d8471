#pragma once

#include <cstdint>
#include <vector>

#include "cablesoup/cable_graph.hpp"
#include "cablesoup/rng.hpp"

namespace cablesoup {

// Poisson soup of discrete loops of the jump chain, intensity c: the number
// of loops is Poisson((c/2) * mass) where mass = -log det(I - P) is the total
// loop measure.  Soups at different intensities are coupled monotonically:
// loop i exists at intensity c iff its cumulative Exp(1) arrival mark is
// below (c/2) * mass, and the loop's content depends only on (seed, i).
struct SoupConfig {
  double intensity = 1.0;     // c
  std::uint64_t seed = 0;
  int length_cap = 0;         // 0: derive from the spectral radius
  std::vector<int> window;    // vertices of interest; empty means all interior
  double diameter_floor = 0.0;
};

struct DiscreteLoop {
  std::vector<int> vertices;  // based loop, canonical (smallest) rotation
  std::uint64_t index = 0;    // arrival index in the soup stream
};

struct LoopSoup {
  std::vector<DiscreteLoop> loops;
  double mass = 0.0;
  double intensity = 0.0;
  std::uint64_t seed = 0;
};

struct VertexField {
  std::vector<double> value;  // per vertex id, zero on the boundary
  double intensity = 0.0;
  std::uint64_t seed = 0;
};

// Total loop measure, -sum log(1 - lambda_i) over the symmetrized spectrum.
double loop_measure_mass(const CableGraph& g);

// Loop measure of loops of each length 1..cap (tr(P^n)/n); cap = 0 derives
// the cap from the spectral radius (rho^cap < 1e-12) and checks the
// neglected tail is below 1e-9 (TruncationTooTightError otherwise).
std::vector<double> loop_length_masses(const CableGraph& g, int cap);

LoopSoup sample_loops(const CableGraph& g, const SoupConfig& cfg);

// Local times the loop's visits leave at each vertex: one Exp(2/C_v) draw
// per visit, from a stream keyed by (seed, loop index).
std::vector<double> loop_vertex_local_times(const CableGraph& g, const DiscreteLoop& loop,
                                            std::uint64_t seed);

// Occupation field at the vertices.  Integer intensity uses the exact
// Gaussian construction (sum of c squared copies of a centered Gaussian
// vector with covariance G, halved); other intensities take the loop route.
VertexField sample_vertex_field(const CableGraph& g, const SoupConfig& cfg);

// The two routes individually (they agree in law; tests compare them).
VertexField sample_vertex_field_gaussian(const CableGraph& g, int copies, std::uint64_t seed);
VertexField sample_vertex_field_loops(const CableGraph& g, const SoupConfig& cfg);

std::vector<int> canonical_rotation(const std::vector<int>& vertices);

// Metric diameter of the loop's visited vertex set (shortest-path distance
// through the graph, edge lengths as weights).
double loop_diameter(const CableGraph& g, const DiscreteLoop& loop);

}  // namespace cablesoup

#include "cablesoup/loop_soup.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <utility>

#include "cablesoup/errors.hpp"

namespace cablesoup {

namespace {

// Eigendecomposition of the symmetrized chain S = D^{1/2} P D^{-1/2},
// D = diag(C_v).  Powers of P come back as
//   (P^n)_{uv} = sum_i q(u,i) q(v,i) lam_i^n * sqrt(C_v) / sqrt(C_u).
struct Spectrum {
  Eigen::MatrixXd q;
  Eigen::VectorXd lam;
  Eigen::VectorXd sqrt_c;
  double rho = 0.0;
};

Spectrum chain_spectrum(const CableGraph& g, const JumpChain& jc) {
  const int m = static_cast<int>(g.interior.size());
  Spectrum sp;
  sp.sqrt_c.resize(m);
  for (int r = 0; r < m; ++r) {
    sp.sqrt_c[r] = std::sqrt(g.total_conductance(g.interior[r]));
  }
  Eigen::MatrixXd s(m, m);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < m; ++c) {
      s(r, c) = sp.sqrt_c[r] * jc.p(r, c) / sp.sqrt_c[c];
    }
  }
  s = 0.5 * (s + s.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  if (es.info() != Eigen::Success) {
    throw SingularSystemError("eigendecomposition of the jump chain failed");
  }
  sp.q = es.eigenvectors();
  sp.lam = es.eigenvalues();
  sp.rho = 0.0;
  for (int i = 0; i < m; ++i) sp.rho = std::max(sp.rho, std::abs(sp.lam[i]));
  if (sp.rho >= 1.0 - 1e-10) {
    throw NotTransientError("jump chain spectral radius reaches 1");
  }
  return sp;
}

double mass_from_spectrum(const Spectrum& sp) {
  double mass = 0.0;
  for (int i = 0; i < sp.lam.size(); ++i) mass -= std::log1p(-sp.lam[i]);
  return mass;
}

int derive_length_cap(double rho) {
  if (rho <= 0.0) return 2;
  const int n = static_cast<int>(std::ceil(std::log(1e-12) / std::log(rho)));
  return std::max(2, n);
}

// tr(P^n)/n for n = 1..cap (entry 0 unused).  The neglected tail
// sum_{n>cap} tr(P^n)/n is bounded by sum_i |lam_i|^{cap+1} /
// ((cap+1)(1-|lam_i|)).
std::vector<double> masses_from_spectrum(const Spectrum& sp, int cap) {
  const int m = static_cast<int>(sp.lam.size());
  std::vector<double> w(static_cast<std::size_t>(cap) + 1, 0.0);
  std::vector<double> pw(m);
  for (int i = 0; i < m; ++i) pw[i] = 1.0;
  for (int n = 1; n <= cap; ++n) {
    double tr = 0.0;
    for (int i = 0; i < m; ++i) {
      pw[i] *= sp.lam[i];
      tr += pw[i];
    }
    w[n] = std::max(0.0, tr / n);
  }
  double tail = 0.0;
  for (int i = 0; i < m; ++i) {
    const double a = std::abs(sp.lam[i]);
    tail += std::pow(a, cap + 1) / ((cap + 1) * (1.0 - a));
  }
  if (tail > 1e-9) {
    throw TruncationTooTightError("loop length cap leaves measure above 1e-9");
  }
  return w;
}

// Length n with probability proportional to tr(P^n)/n, start vertex with
// probability proportional to (P^n)_{ww}, then transitions conditioned on
// returning to the start after the remaining steps.
std::vector<int> sample_loop_vertices(const CableGraph& g, const Spectrum& sp,
                                      const std::vector<double>& cum, double total,
                                      RngStream& rng) {
  const int m = static_cast<int>(sp.lam.size());
  const double u = rng.uniform() * total;
  int n = static_cast<int>(std::lower_bound(cum.begin() + 1, cum.end(), u) - cum.begin());
  n = std::min(n, static_cast<int>(cum.size()) - 1);

  std::vector<double> weight(m);
  std::vector<double> lam_n(m);
  for (int i = 0; i < m; ++i) lam_n[i] = std::pow(sp.lam[i], n);
  for (int r = 0; r < m; ++r) {
    double d = 0.0;
    for (int i = 0; i < m; ++i) d += sp.q(r, i) * sp.q(r, i) * lam_n[i];
    weight[r] = std::max(0.0, d);
  }
  auto pick = [&rng](const std::vector<double>& w) {
    double tot = 0.0;
    for (double x : w) tot += x;
    if (!(tot > 0.0)) throw SingularSystemError("loop sampling weights vanished");
    double v = rng.uniform() * tot;
    for (std::size_t k = 0; k + 1 < w.size(); ++k) {
      v -= w[k];
      if (v <= 0.0) return static_cast<int>(k);
    }
    return static_cast<int>(w.size()) - 1;
  };
  const int w0 = pick(weight);

  std::vector<int> rows;
  rows.reserve(n);
  rows.push_back(w0);
  int cur = w0;
  for (int k = 1; k < n; ++k) {
    const int rem = n - k;
    std::vector<double> lam_r(m);
    for (int i = 0; i < m; ++i) lam_r[i] = std::pow(sp.lam[i], rem);
    const int gcur = g.interior[cur];
    std::fill(weight.begin(), weight.end(), 0.0);
    for (const auto& [nb, len] : g.adj[gcur]) {
      const int x = g.interior_index[nb];
      if (x < 0) continue;  // boundary: a loop never leaves the interior
      double ret = 0.0;
      for (int i = 0; i < m; ++i) ret += sp.q(x, i) * sp.q(w0, i) * lam_r[i];
      ret *= sp.sqrt_c[w0] / sp.sqrt_c[x];
      const double step = 1.0 / (len * g.total_conductance(gcur));
      weight[x] += step * std::max(0.0, ret);
    }
    cur = pick(weight);
    rows.push_back(cur);
  }

  std::vector<int> vertices(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) vertices[k] = g.interior[rows[k]];
  return canonical_rotation(vertices);
}

}  // namespace

std::vector<int> canonical_rotation(const std::vector<int>& vertices) {
  const std::size_t n = vertices.size();
  if (n <= 1) return vertices;
  std::size_t best = 0;
  for (std::size_t s = 1; s < n; ++s) {
    for (std::size_t k = 0; k < n; ++k) {
      const int a = vertices[(s + k) % n];
      const int b = vertices[(best + k) % n];
      if (a != b) {
        if (a < b) best = s;
        break;
      }
    }
  }
  std::vector<int> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = vertices[(best + k) % n];
  return out;
}

double loop_measure_mass(const CableGraph& g) {
  if (g.interior.empty()) return 0.0;
  const JumpChain jc = jump_chain(g);
  return mass_from_spectrum(chain_spectrum(g, jc));
}

std::vector<double> loop_length_masses(const CableGraph& g, int cap) {
  if (g.interior.empty()) return {0.0};
  const JumpChain jc = jump_chain(g);
  const Spectrum sp = chain_spectrum(g, jc);
  if (cap <= 0) cap = derive_length_cap(sp.rho);
  return masses_from_spectrum(sp, cap);
}

LoopSoup sample_loops(const CableGraph& g, const SoupConfig& cfg) {
  if (cfg.intensity < 0.0) throw InvalidIntensityError("soup intensity must be nonnegative");
  LoopSoup soup;
  soup.intensity = cfg.intensity;
  soup.seed = cfg.seed;
  if (g.interior.empty()) return soup;

  const JumpChain jc = jump_chain(g);
  const Spectrum sp = chain_spectrum(g, jc);
  soup.mass = mass_from_spectrum(sp);
  const int cap = cfg.length_cap > 0 ? cfg.length_cap : derive_length_cap(sp.rho);
  const std::vector<double> w = masses_from_spectrum(sp, cap);
  std::vector<double> cum(w.size(), 0.0);
  for (std::size_t n = 1; n < w.size(); ++n) cum[n] = cum[n - 1] + w[n];
  const double total = cum.back();
  if (!(total > 0.0)) return soup;

  const double budget = 0.5 * cfg.intensity * soup.mass;
  RngStream arrivals(cfg.seed, "soup-arrivals");
  double mark = 0.0;
  for (std::uint64_t i = 0;; ++i) {
    mark += arrivals.exponential();
    if (mark > budget) break;
    RngStream content(cfg.seed, "loop", i);
    DiscreteLoop loop;
    loop.index = i;
    loop.vertices = sample_loop_vertices(g, sp, cum, total, content);
    soup.loops.push_back(std::move(loop));
  }
  return soup;
}

std::vector<double> loop_vertex_local_times(const CableGraph& g, const DiscreteLoop& loop,
                                            std::uint64_t seed) {
  RngStream rng(seed, "holding", loop.index);
  std::vector<double> out(g.n_vertices, 0.0);
  for (int v : loop.vertices) out[v] += rng.exponential(g.holding_mean(v));
  return out;
}

VertexField sample_vertex_field_loops(const CableGraph& g, const SoupConfig& cfg) {
  if (cfg.intensity < 0.0) throw InvalidIntensityError("intensity must be nonnegative");
  VertexField field;
  field.intensity = cfg.intensity;
  field.seed = cfg.seed;
  field.value.assign(g.n_vertices, 0.0);
  const LoopSoup soup = sample_loops(g, cfg);
  for (const DiscreteLoop& loop : soup.loops) {
    const std::vector<double> lt = loop_vertex_local_times(g, loop, cfg.seed);
    for (int v = 0; v < g.n_vertices; ++v) field.value[v] += lt[v];
  }
  // Loops visiting a single vertex are absent from the discrete skeleton;
  // their field is an independent Gamma(c/2, 2/C_v) at each vertex (the
  // marginal then closes to Gamma(c/2, G(v,v)), which tests verify).
  if (cfg.intensity > 0.0) {
    for (int v : g.interior) {
      RngStream rng(cfg.seed, "trivial", static_cast<std::uint64_t>(v));
      field.value[v] += rng.gamma(0.5 * cfg.intensity, g.holding_mean(v));
    }
  }
  return field;
}

VertexField sample_vertex_field_gaussian(const CableGraph& g, int copies, std::uint64_t seed) {
  if (copies <= 0) throw InvalidIntensityError("intensity must be positive");
  VertexField field;
  field.intensity = copies;
  field.seed = seed;
  field.value.assign(g.n_vertices, 0.0);
  if (g.interior.empty()) return field;
  const GreenMatrix gm = green_matrix(g);
  Eigen::LLT<Eigen::MatrixXd> llt(gm.g);
  if (llt.info() != Eigen::Success) {
    throw SingularSystemError("Green matrix is not positive definite");
  }
  const Eigen::MatrixXd chol = llt.matrixL();
  const int m = static_cast<int>(g.interior.size());
  Eigen::VectorXd z(m);
  for (int i = 0; i < copies; ++i) {
    RngStream rng(seed, "gff", static_cast<std::uint64_t>(i));
    for (int r = 0; r < m; ++r) z[r] = rng.normal();
    const Eigen::VectorXd phi = chol * z;
    for (int r = 0; r < m; ++r) field.value[gm.vertices[r]] += 0.5 * phi[r] * phi[r];
  }
  return field;
}

VertexField sample_vertex_field(const CableGraph& g, const SoupConfig& cfg) {
  if (cfg.intensity < 0.0) throw InvalidIntensityError("intensity must be nonnegative");
  const double r = std::round(cfg.intensity);
  if (cfg.intensity > 0.0 && std::abs(cfg.intensity - r) < 1e-12) {
    VertexField field = sample_vertex_field_gaussian(g, static_cast<int>(r), cfg.seed);
    field.intensity = cfg.intensity;
    return field;
  }
  return sample_vertex_field_loops(g, cfg);
}

double loop_diameter(const CableGraph& g, const DiscreteLoop& loop) {
  std::vector<int> distinct = loop.vertices;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() <= 1) return 0.0;
  double best = 0.0;
  // Dijkstra from each visited vertex; graphs here are small.
  const double inf = std::numeric_limits<double>::infinity();
  for (int src : distinct) {
    std::vector<double> dist(g.n_vertices, inf);
    dist[src] = 0.0;
    std::priority_queue<std::pair<double, int>, std::vector<std::pair<double, int>>,
                        std::greater<>> heap;
    heap.emplace(0.0, src);
    while (!heap.empty()) {
      const auto [d, v] = heap.top();
      heap.pop();
      if (d > dist[v]) continue;
      for (const auto& [nb, len] : g.adj[v]) {
        if (d + len < dist[nb]) {
          dist[nb] = d + len;
          heap.emplace(dist[nb], nb);
        }
      }
    }
    for (int dst : distinct) best = std::max(best, dist[dst]);
  }
  return best;
}

}  // namespace cablesoup

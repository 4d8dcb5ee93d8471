#include "cablesoup/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"

#include "cablesoup/besq.hpp"
#include "cablesoup/brownian.hpp"
#include "cablesoup/burglar.hpp"
#include "cablesoup/cable_graph.hpp"
#include "cablesoup/dyadic_path.hpp"
#include "cablesoup/errors.hpp"
#include "cablesoup/loop_soup.hpp"
#include "cablesoup/modulus.hpp"
#include "cablesoup/occupation_field.hpp"
#include "cablesoup/report.hpp"
#include "cablesoup/rng.hpp"
#include "cablesoup/special.hpp"
#include "cablesoup/stats.hpp"

namespace fs = std::filesystem;

namespace cablesoup {
namespace {

using nlohmann::ordered_json;

std::string default_outdir() {
  const char* env = std::getenv("CABLESOUP_OUTDIR");
  return (env != nullptr && env[0] != '\0') ? std::string(env) : std::string(".");
}

// Replica loops below fill pre-sized slots, so results do not depend on the
// thread count.  The first exception wins and is rethrown on the main thread.
template <typename Body>
void parallel_replicas(std::size_t n, const Body& body) {
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t t = 0; t < n; ++t) {
    try {
      body(t);
    } catch (...) {
#pragma omp critical
      {
        if (!failure) failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
}

void emit_error_record(const std::string& outdir, const std::string& experiment,
                       const std::string& kind, const std::string& message) {
  ordered_json rec;
  rec["experiment"] = experiment;
  rec["error"] = kind;
  rec["message"] = message;
  std::fprintf(stderr, "%s\n", rec.dump().c_str());
  try {
    fs::create_directories(outdir);
    write_report(rec, (fs::path(outdir) / "error_report.json").string());
  } catch (...) {
    // Stderr already has the record; a broken output directory must not
    // mask the original failure.
  }
}

ordered_json mw_json(const MannWhitneyResult& mw) {
  ordered_json j;
  j["u"] = mw.u;
  j["z"] = mw.z;
  j["p_one_sided"] = mw.p_one_sided;
  return j;
}

ordered_json ks_json(const KsResult& ks) {
  ordered_json j;
  j["statistic"] = ks.statistic;
  j["p_value"] = ks.p_value;
  j["n"] = ks.n;
  return j;
}

// Option bags.  Every experiment gets its own seed; data files and report
// contents are a pure function of the bag, so a re-run reproduces them
// byte for byte (the report timestamp aside).

struct SampleFieldOpts {
  std::string graph;
  double c = 1.0;
  int levels = 16;
  std::uint64_t seed = 0;
};

struct SampleSoupOpts {
  std::string graph;
  double c = 1.0;
  int length_cap = 0;
  std::uint64_t seed = 0;
};

struct ModulusScanOpts {
  std::string input;
  int levels = 20;
  int j_min = 2;
  bool dump_r = false;
  std::uint64_t seed = 0;
};

struct DimensionOpts {
  double a = 0.6;
  int levels = 20;
  int replicas = 20;
  double eta = 0.1;
  double tol = 0.12;
  std::uint64_t seed = 0;
};

struct Lemma1Opts {
  double delta = 1.0;
  double x0 = 1.0;
  int levels = 20;
  int j_min = 2;
  int replicas = 200;
  double threshold = 1e-3;
  std::uint64_t seed = 0;
};

struct WarmupOpts {
  int levels = 20;
  int replicas = 100;
  int top_k = 10;
  double tau0 = 0.5;
  int j_min = 2;
  double threshold = 0.01;
  std::uint64_t seed = 0;
};

struct RayKnightOpts {
  double h = 1.0;
  double x = 0.5;
  double step = 1e-4;
  int replicas = 10000;
  double threshold = 0.01;
  std::uint64_t seed = 0;
};

struct IsomorphismOpts {
  std::string graph;
  std::vector<double> intensities = {1.0, 2.0, 3.0};
  int vertex = -1;
  int replicas = 10000;
  double threshold = 0.01;
  std::uint64_t seed = 0;
};

struct BurglarOpts {
  double h = 0.5;
  double l = 1.0;
  double step = 1e-4;
  double span = 1.0;
  int levels = 7;
  int j_min = 2;
  int replicas = 200;
  double threshold = 1e-3;
  std::uint64_t seed = 0;
};

int run_sample_field(const std::string& out, const SampleFieldOpts& o) {
  CableGraph g = read_graph_file(o.graph);
  OccupationField field = sample_field(g, o.c, o.levels, o.seed);
  fs::path dir = fs::path(out) / "field";
  write_field_dump(field, g, dir.string());

  double max_vertex = 0.0;
  for (double v : field.vertex.value) max_vertex = std::max(max_vertex, v);
  double max_edge = 0.0;
  for (const DyadicPath& p : field.edge)
    for (double v : p.values) max_edge = std::max(max_edge, v);

  ordered_json rep;
  rep["experiment"] = "sample-field";
  rep["config"]["graph"] = o.graph;
  rep["config"]["c"] = o.c;
  rep["config"]["levels"] = o.levels;
  rep["config"]["seed"] = o.seed;
  rep["config"]["out"] = out;
  rep["results"]["graph_hash"] = graph_hash(g);
  rep["results"]["n_vertices"] = g.n_vertices;
  rep["results"]["n_edges"] = g.edges.size();
  rep["results"]["max_vertex_value"] = max_vertex;
  rep["results"]["max_edge_value"] = max_edge;
  rep["results"]["field_dir"] = dir.string();
  write_report(rep, (fs::path(out) / "sample_field_report.json").string());
  return 0;
}

int run_sample_soup(const std::string& out, const SampleSoupOpts& o) {
  CableGraph g = read_graph_file(o.graph);
  SoupConfig cfg;
  cfg.intensity = o.c;
  cfg.seed = o.seed;
  cfg.length_cap = o.length_cap;
  LoopSoup soup = sample_loops(g, cfg);

  fs::create_directories(out);
  fs::path soup_path = fs::path(out) / "soup.jsonl";
  std::ofstream f(soup_path);
  if (!f) throw InputError("cannot open " + soup_path.string());
  ordered_json header;
  header["type"] = "soup-header";
  header["intensity"] = soup.intensity;
  header["seed"] = soup.seed;
  header["mass"] = soup.mass;
  header["graph_hash"] = graph_hash(g);
  header["n_loops"] = soup.loops.size();
  f << header.dump() << "\n";
  std::size_t longest = 0;
  for (const DiscreteLoop& loop : soup.loops) {
    std::vector<double> lt = loop_vertex_local_times(g, loop, o.seed);
    ordered_json rec;
    rec["index"] = loop.index;
    rec["vertices"] = loop.vertices;
    ordered_json times = ordered_json::object();
    for (std::size_t v = 0; v < lt.size(); ++v)
      if (lt[v] > 0.0) times[std::to_string(v)] = lt[v];
    rec["local_times"] = times;
    f << rec.dump() << "\n";
    longest = std::max(longest, loop.vertices.size());
  }
  f.close();

  ordered_json rep;
  rep["experiment"] = "sample-soup";
  rep["config"]["graph"] = o.graph;
  rep["config"]["c"] = o.c;
  rep["config"]["length_cap"] = o.length_cap;
  rep["config"]["seed"] = o.seed;
  rep["config"]["out"] = out;
  rep["results"]["mass"] = soup.mass;
  rep["results"]["n_loops"] = soup.loops.size();
  rep["results"]["longest_loop"] = longest;
  rep["results"]["soup_file"] = soup_path.string();
  write_report(rep, (fs::path(out) / "sample_soup_report.json").string());
  return 0;
}

int run_modulus_scan(const std::string& out, const ModulusScanOpts& o) {
  DyadicPath f;
  if (o.input.empty()) {
    RngStream rng(o.seed, "modulus-path");
    f = brownian_motion(0.0, 1.0, o.levels, rng);
  } else {
    f = read_path_csv(o.input);
  }
  ModulusReport rep = modulus_scan(f, o.j_min);
  std::array<double, 5> q = r_quantiles(rep);

  fs::create_directories(out);
  if (o.dump_r) {
    fs::path rpath = fs::path(out) / "modulus_r.csv";
    std::ofstream rf(rpath);
    if (!rf) throw InputError("cannot open " + rpath.string());
    rf << "position,r\n";
    char buf[64];
    for (std::size_t i = 0; i < rep.r.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", f.position(i), rep.r[i]);
      rf << buf;
    }
  }

  ordered_json j;
  j["experiment"] = "modulus-scan";
  j["config"]["input"] = o.input;
  j["config"]["levels"] = f.levels;
  j["config"]["j_min"] = o.j_min;
  j["config"]["seed"] = o.seed;
  j["config"]["dump_r"] = o.dump_r;
  j["config"]["out"] = out;
  j["results"]["kind"] = f.kind;
  j["results"]["n_scales"] = rep.scales.size();
  j["results"]["r_min"] = q[0];
  j["results"]["r_q25"] = q[1];
  j["results"]["r_median"] = q[2];
  j["results"]["r_q75"] = q[3];
  j["results"]["r_max"] = q[4];
  for (double a : {0.5, 1.0, 1.5}) {
    std::vector<std::size_t> pts = fast_points(rep, a, 0.1);
    j["results"]["fast_points"][std::to_string(a)] = pts.size();
  }
  write_report(j, (fs::path(out) / "modulus_scan_report.json").string());
  return 0;
}

int run_dimension(const std::string& out, const DimensionOpts& o) {
  if (o.replicas <= 0) throw InputError("replicas must be positive");
  std::vector<double> slopes(static_cast<std::size_t>(o.replicas));
  parallel_replicas(slopes.size(), [&](std::size_t t) {
    RngStream rng(o.seed, "dimension-path", t);
    DyadicPath path = brownian_motion(0.0, 1.0, o.levels, rng);
    DimensionEstimate est = dimension_estimate(path, o.a, o.eta);
    slopes[t] = est.slope;
  });
  double mean_slope = mean(slopes);
  double expected = 1.0 - o.a * o.a;
  bool pass = std::abs(mean_slope - expected) <= o.tol;

  ordered_json j;
  j["experiment"] = "dimension";
  j["config"]["a"] = o.a;
  j["config"]["levels"] = o.levels;
  j["config"]["replicas"] = o.replicas;
  j["config"]["eta"] = o.eta;
  j["config"]["tol"] = o.tol;
  j["config"]["seed"] = o.seed;
  j["config"]["out"] = out;
  j["results"]["mean_slope"] = mean_slope;
  j["results"]["expected_slope"] = expected;
  j["results"]["slope_sd"] =
      slopes.size() > 1 ? std::sqrt(sample_variance(slopes)) : 0.0;
  j["results"]["slopes"] = slopes;
  j["results"]["pass"] = pass;
  write_report(j, (fs::path(out) / "dimension_report.json").string());
  return pass ? 0 : 1;
}

int run_lemma1(const std::string& out, const Lemma1Opts& o) {
  auto draw = [&](std::uint64_t t) {
    RngStream r1(o.seed, "lemma1-f1", t);
    RngStream r2(o.seed, "lemma1-f2", t);
    DyadicPath f1 = besq_path(o.x0, o.delta, 1.0, o.levels, r1);
    DyadicPath f2 = besq_path(o.x0, o.delta, 1.0, o.levels, r2);
    return std::make_pair(std::move(f1), std::move(f2));
  };
  Lemma1Report rep =
      lemma1_test(draw, static_cast<std::size_t>(o.replicas), o.j_min, o.seed);
  bool pass = rep.mw.p_one_sided < o.threshold;

  ordered_json j;
  j["experiment"] = "lemma1";
  j["config"]["delta"] = o.delta;
  j["config"]["x0"] = o.x0;
  j["config"]["levels"] = o.levels;
  j["config"]["j_min"] = o.j_min;
  j["config"]["replicas"] = o.replicas;
  j["config"]["threshold"] = o.threshold;
  j["config"]["seed"] = o.seed;
  j["config"]["out"] = out;
  j["results"]["treatment_mean"] = mean(rep.treatment);
  j["results"]["control_mean"] = mean(rep.control);
  j["results"]["mann_whitney"] = mw_json(rep.mw);
  j["results"]["pass"] = pass;
  write_report(j, (fs::path(out) / "lemma1_report.json").string());
  return pass ? 0 : 1;
}

int run_warmup(const std::string& out, const WarmupOpts& o) {
  auto draw = [&](std::uint64_t t) {
    RngStream r1(o.seed, "warmup-b1", t);
    RngStream r2(o.seed, "warmup-b2", t);
    DyadicPath b1 = brownian_motion(0.0, 1.0, o.levels, r1);
    DyadicPath b2 = brownian_motion(0.0, 1.0, o.levels, r2);
    return std::make_pair(std::move(b1), std::move(b2));
  };
  WarmupReport rep = warmup_test(draw, static_cast<std::size_t>(o.replicas),
                                 o.j_min, static_cast<std::size_t>(o.top_k),
                                 o.tau0, o.seed);
  bool pass = rep.mw.p_one_sided < o.threshold;

  ordered_json j;
  j["experiment"] = "warmup";
  j["config"]["levels"] = o.levels;
  j["config"]["replicas"] = o.replicas;
  j["config"]["top_k"] = o.top_k;
  j["config"]["tau0"] = o.tau0;
  j["config"]["j_min"] = o.j_min;
  j["config"]["threshold"] = o.threshold;
  j["config"]["seed"] = o.seed;
  j["config"]["out"] = out;
  j["results"]["top_rate_mean"] = mean(rep.top_rate);
  j["results"]["random_rate_mean"] = mean(rep.random_rate);
  j["results"]["mann_whitney"] = mw_json(rep.mw);
  j["results"]["pass"] = pass;
  write_report(j, (fs::path(out) / "warmup_report.json").string());
  return pass ? 0 : 1;
}

int run_rayknight(const std::string& out, const RayKnightOpts& o) {
  if (o.replicas <= 0) throw InputError("replicas must be positive");
  std::vector<double> samples(static_cast<std::size_t>(o.replicas));
  parallel_replicas(samples.size(), [&](std::size_t t) {
    RngStream rng(o.seed, "rayknight", t);
    LocalTimeProfile prof = profile_at_inverse_local_time(o.h, o.step, rng);
    samples[t] = prof.value_at(o.x);
  });
  KsResult ks = ks_test(samples, [&](double v) {
    return besq_transition_cdf(o.h, 0.0, o.x, v);
  });
  bool pass = ks.p_value > o.threshold;

  ordered_json j;
  j["experiment"] = "rayknight";
  j["config"]["h"] = o.h;
  j["config"]["x"] = o.x;
  j["config"]["step"] = o.step;
  j["config"]["replicas"] = o.replicas;
  j["config"]["threshold"] = o.threshold;
  j["config"]["seed"] = o.seed;
  j["config"]["out"] = out;
  j["results"]["ks"] = ks_json(ks);
  j["results"]["sample_mean"] = mean(samples);
  j["results"]["pass"] = pass;
  write_report(j, (fs::path(out) / "rayknight_report.json").string());
  return pass ? 0 : 1;
}

int run_isomorphism(const std::string& out, const IsomorphismOpts& o) {
  if (o.replicas <= 0) throw InputError("replicas must be positive");
  CableGraph g = read_graph_file(o.graph);
  if (g.interior.empty()) throw InputError("graph has no interior vertex");
  int vertex = o.vertex >= 0 ? o.vertex : g.interior.front();
  if (vertex >= g.n_vertices || g.is_boundary[static_cast<std::size_t>(vertex)])
    throw InputError("vertex must be an interior vertex");
  GreenMatrix gm = green_matrix(g);
  int row = g.interior_index[static_cast<std::size_t>(vertex)];
  double gvv = gm.g(row, row);

  ordered_json j;
  j["experiment"] = "isomorphism";
  j["config"]["graph"] = o.graph;
  j["config"]["intensities"] = o.intensities;
  j["config"]["vertex"] = vertex;
  j["config"]["replicas"] = o.replicas;
  j["config"]["threshold"] = o.threshold;
  j["config"]["seed"] = o.seed;
  j["config"]["out"] = out;
  j["results"]["green_diagonal"] = gvv;

  bool all_pass = true;
  for (std::size_t ci = 0; ci < o.intensities.size(); ++ci) {
    double c = o.intensities[ci];
    std::vector<double> samples(static_cast<std::size_t>(o.replicas));
    parallel_replicas(samples.size(), [&](std::size_t t) {
      SoupConfig cfg;
      cfg.intensity = c;
      cfg.seed = derive_seed(o.seed, ci, t);
      VertexField field = sample_vertex_field_loops(g, cfg);
      samples[t] = field.value[static_cast<std::size_t>(vertex)];
    });
    KsResult ks = ks_test(
        samples, [&](double v) { return gamma_p(0.5 * c, v / gvv); });
    bool pass = ks.p_value > o.threshold;
    all_pass = all_pass && pass;
    ordered_json entry;
    entry["c"] = c;
    entry["ks"] = ks_json(ks);
    entry["sample_mean"] = mean(samples);
    entry["expected_mean"] = 0.5 * c * gvv;
    entry["pass"] = pass;
    j["results"]["per_intensity"].push_back(entry);
  }
  j["results"]["pass"] = all_pass;
  write_report(j, (fs::path(out) / "isomorphism_report.json").string());
  return all_pass ? 0 : 1;
}

int run_burglar(const std::string& out, const BurglarOpts& o) {
  Prop2Report rep =
      proposition2_statistic(o.h, o.l, o.step, o.span, o.levels, o.j_min,
                             static_cast<std::size_t>(o.replicas), o.seed);
  bool pass = rep.mw.p_one_sided < o.threshold;

  ordered_json j;
  j["experiment"] = "burglar";
  j["config"]["h"] = o.h;
  j["config"]["l"] = o.l;
  j["config"]["step"] = o.step;
  j["config"]["span"] = o.span;
  j["config"]["levels"] = o.levels;
  j["config"]["j_min"] = o.j_min;
  j["config"]["replicas"] = o.replicas;
  j["config"]["threshold"] = o.threshold;
  j["config"]["seed"] = o.seed;
  j["config"]["out"] = out;
  j["results"]["treatment_mean"] = mean(rep.treatment);
  j["results"]["control_mean"] = mean(rep.control);
  j["results"]["mann_whitney"] = mw_json(rep.mw);
  j["results"]["pass"] = pass;
  write_report(j, (fs::path(out) / "burglar_report.json").string());
  return pass ? 0 : 1;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"loop-soup occupation fields and modulus scans on cable graphs"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config");

  std::string out = default_outdir();
  int threads = 0;
  app.add_option("--out", out, "output directory for reports and data files");
  app.add_option("--threads", threads, "worker threads (0 = library default)");

  auto add_seed = [](CLI::App* sub, std::uint64_t& seed) {
    sub->add_option("--seed", seed, "RNG seed")->required();
  };

  SampleFieldOpts sf;
  CLI::App* sub_sf = app.add_subcommand(
      "sample-field", "sample an occupation field on a cable graph");
  sub_sf->add_option("--graph", sf.graph, "graph description file")
      ->required()
      ->check(CLI::ExistingFile);
  sub_sf->add_option("--c", sf.c, "soup intensity");
  sub_sf->add_option("--levels", sf.levels, "dyadic levels per edge profile");
  add_seed(sub_sf, sf.seed);

  SampleSoupOpts ss;
  CLI::App* sub_ss = app.add_subcommand(
      "sample-soup", "sample the discrete loop soup of a cable graph");
  sub_ss->add_option("--graph", ss.graph, "graph description file")
      ->required()
      ->check(CLI::ExistingFile);
  sub_ss->add_option("--c", ss.c, "soup intensity");
  sub_ss->add_option("--length-cap", ss.length_cap,
                     "loop length truncation (0 = derive from spectrum)");
  add_seed(sub_ss, ss.seed);

  ModulusScanOpts ms;
  CLI::App* sub_ms = app.add_subcommand(
      "modulus-scan", "multi-scale increment scan of a dyadic path");
  sub_ms->add_option("--input", ms.input, "path CSV (omit to sample Brownian)")
      ->check(CLI::ExistingFile);
  sub_ms->add_option("--levels", ms.levels, "levels for a sampled path");
  sub_ms->add_option("--j-min", ms.j_min, "coarsest dyadic scale");
  sub_ms->add_flag("--dump-r", ms.dump_r, "write per-point ratios to CSV");
  add_seed(sub_ms, ms.seed);

  DimensionOpts dim;
  CLI::App* sub_dim = app.add_subcommand(
      "dimension", "box-counting dimension of the level-a fast point set");
  sub_dim->add_option("--a", dim.a, "fast point level in (0,1)");
  sub_dim->add_option("--levels", dim.levels, "path levels");
  sub_dim->add_option("--replicas", dim.replicas, "independent paths");
  sub_dim->add_option("--eta", dim.eta, "threshold slack");
  sub_dim->add_option("--tol", dim.tol, "allowed |slope - (1 - a^2)|");
  add_seed(sub_dim, dim.seed);

  Lemma1Opts l1;
  CLI::App* sub_l1 = app.add_subcommand(
      "lemma1", "adding an independent field boosts the quick ratio at the "
                "maximiser of the sum");
  sub_l1->add_option("--delta", l1.delta, "squared Bessel dimension");
  sub_l1->add_option("--x0", l1.x0, "initial value of each path");
  sub_l1->add_option("--levels", l1.levels, "path levels");
  sub_l1->add_option("--j-min", l1.j_min, "coarsest dyadic scale");
  sub_l1->add_option("--replicas", l1.replicas, "independent pairs");
  sub_l1->add_option("--threshold", l1.threshold, "required one-sided p");
  add_seed(sub_l1, l1.seed);

  WarmupOpts wu;
  CLI::App* sub_wu = app.add_subcommand(
      "warmup", "near-maximisers of the summed scan pass a joint threshold "
                "more often than random points");
  sub_wu->add_option("--levels", wu.levels, "path levels");
  sub_wu->add_option("--replicas", wu.replicas, "independent pairs");
  sub_wu->add_option("--top-k", wu.top_k, "points taken from the top of the scan");
  sub_wu->add_option("--tau0", wu.tau0, "joint ratio threshold");
  sub_wu->add_option("--j-min", wu.j_min, "coarsest dyadic scale");
  sub_wu->add_option("--threshold", wu.threshold, "required one-sided p");
  add_seed(sub_wu, wu.seed);

  RayKnightOpts rk;
  CLI::App* sub_rk = app.add_subcommand(
      "rayknight", "local time profile at an inverse local time against the "
                   "squared Bessel transition law");
  sub_rk->add_option("--level", rk.h, "local time level at the origin");
  sub_rk->add_option("--x", rk.x, "site whose local time is tested");
  sub_rk->add_option("--step", rk.step, "walk time step");
  sub_rk->add_option("--replicas", rk.replicas, "independent walks");
  sub_rk->add_option("--threshold", rk.threshold, "required KS p");
  add_seed(sub_rk, rk.seed);

  IsomorphismOpts iso;
  CLI::App* sub_iso = app.add_subcommand(
      "isomorphism", "loop-soup vertex field against its Gamma marginal");
  sub_iso->add_option("--graph", iso.graph, "graph description file")
      ->required()
      ->check(CLI::ExistingFile);
  sub_iso->add_option("--c", iso.intensities, "soup intensities to test");
  sub_iso->add_option("--vertex", iso.vertex,
                      "interior vertex (-1 = first interior)");
  sub_iso->add_option("--replicas", iso.replicas, "fields per intensity");
  sub_iso->add_option("--threshold", iso.threshold, "required KS p");
  add_seed(sub_iso, iso.seed);

  BurglarOpts bg;
  CLI::App* sub_bg = app.add_subcommand(
      "burglar", "layered reflected-walk increments drive the quick ratio at "
                 "the maximiser of the total profile");
  sub_bg->add_option("--lower", bg.h, "lower local time level");
  sub_bg->add_option("--upper", bg.l, "upper local time level");
  sub_bg->add_option("--step", bg.step, "walk time step");
  sub_bg->add_option("--span", bg.span, "spatial window for the scan");
  sub_bg->add_option("--levels", bg.levels, "dyadic levels of the scan grid");
  sub_bg->add_option("--j-min", bg.j_min, "coarsest dyadic scale");
  sub_bg->add_option("--replicas", bg.replicas, "independent walks");
  sub_bg->add_option("--threshold", bg.threshold, "required one-sided p");
  add_seed(sub_bg, bg.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  std::string experiment = app.get_subcommands().front()->get_name();
  try {
    if (sub_sf->parsed()) return run_sample_field(out, sf);
    if (sub_ss->parsed()) return run_sample_soup(out, ss);
    if (sub_ms->parsed()) return run_modulus_scan(out, ms);
    if (sub_dim->parsed()) return run_dimension(out, dim);
    if (sub_l1->parsed()) return run_lemma1(out, l1);
    if (sub_wu->parsed()) return run_warmup(out, wu);
    if (sub_rk->parsed()) return run_rayknight(out, rk);
    if (sub_iso->parsed()) return run_isomorphism(out, iso);
    if (sub_bg->parsed()) return run_burglar(out, bg);
  } catch (const InputError& e) {
    emit_error_record(out, experiment, "input", e.what());
    return 2;
  } catch (const OutOfDomainError& e) {
    emit_error_record(out, experiment, "out-of-domain", e.what());
    return 2;
  } catch (const InvalidParamsError& e) {
    emit_error_record(out, experiment, "invalid-params", e.what());
    return 2;
  } catch (const InvalidIntensityError& e) {
    emit_error_record(out, experiment, "invalid-intensity", e.what());
    return 2;
  } catch (const Error& e) {
    emit_error_record(out, experiment, "runtime", e.what());
    return 1;
  } catch (const std::exception& e) {
    emit_error_record(out, experiment, "internal", e.what());
    return 1;
  }
  return 2;
}

}  // namespace cablesoup

// Timing harness for the multi-scale increment scan: the OpenMP kernel
// against the serial reference, plus a replica-throughput sweep.  Run
// manually; not part of the test suite.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cablesoup/brownian.hpp"
#include "cablesoup/dyadic_path.hpp"
#include "cablesoup/modulus.hpp"
#include "cablesoup/rng.hpp"

using namespace cablesoup;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

double bench_scan(const DyadicPath& f, int j_min, int reps, bool reference) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    ModulusReport rep =
        reference ? modulus_scan_reference(f, j_min) : modulus_scan(f, j_min);
    double dt = seconds_since(t0);
    if (dt < best) best = dt;
    if (rep.r.empty()) std::puts("empty scan?");
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  int levels = argc > 1 ? std::stoi(argv[1]) : 18;
  int reps = argc > 2 ? std::stoi(argv[2]) : 3;

#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (no OpenMP)\n");
#endif

  for (int j = levels - 4; j <= levels; ++j) {
    RngStream rng(7, "bench", static_cast<std::uint64_t>(j));
    DyadicPath f = brownian_motion(0.0, 1.0, j, rng);
    double serial = bench_scan(f, 2, reps, true);
    double parallel = bench_scan(f, 2, reps, false);
    std::printf("J=%2d  serial %8.4fs  parallel %8.4fs  speedup %.2fx\n", j,
                serial, parallel, serial / parallel);
  }

  // Replica sweep: many small scans, the shape the experiments actually use.
  {
    const int n_paths = 64;
    std::vector<DyadicPath> paths;
    paths.reserve(n_paths);
    for (int i = 0; i < n_paths; ++i) {
      RngStream rng(11, "bench-sweep", static_cast<std::uint64_t>(i));
      paths.push_back(brownian_motion(0.0, 1.0, 14, rng));
    }
    auto t0 = std::chrono::steady_clock::now();
    std::size_t total = 0;
    for (const DyadicPath& f : paths) total += modulus_scan(f, 2).r.size();
    double dt = seconds_since(t0);
    std::printf("replica sweep: %d scans at J=14 in %.4fs (%zu points)\n",
                n_paths, dt, total);
  }
  return 0;
}

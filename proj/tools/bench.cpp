// Timing harness: the OpenMP census kernels against the serial reference,
// plus graph generation throughput.

#include <chrono>
#include <cstdio>

#include "gmoe/census.hpp"
#include "gmoe/sampler.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace gmoe;

namespace {

double seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void bench_census(const Graph& g, const ClassRegistry& reg, int p,
                  std::int64_t samples) {
  const int n = g.max_label();
  auto t0 = std::chrono::steady_clock::now();
  const auto serial = sampled_census_serial(g, reg, p, n, samples, 7);
  const double ts = seconds(t0);
  t0 = std::chrono::steady_clock::now();
  const auto parallel = sampled_census(g, reg, p, n, samples, 7);
  const double tp = seconds(t0);
  bool equal = serial.class_values == parallel.class_values;
  std::printf("census n=%-6d p=%d J=%-8lld serial %8.3fs parallel %8.3fs speedup %5.2fx %s\n",
              n, p, static_cast<long long>(samples), ts, tp, ts / tp,
              equal ? "(identical)" : "(MISMATCH)");
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (no OpenMP)\n");
#endif
  ClassRegistry reg(6);

  Rng rng(42);
  auto t0 = std::chrono::steady_clock::now();
  const Graph small = sample_sbm(SbmSpec::four_block(80), rng);
  const Graph big = sample_sbm(SbmSpec::two_block(10000), rng);
  std::printf("generation: 80-node (%lld edges) and 10000-node (%lld edges) drawn in %.3fs\n",
              static_cast<long long>(small.edge_count()),
              static_cast<long long>(big.edge_count()), seconds(t0));

  bench_census(small, reg, 4, 200000);
  bench_census(small, reg, 5, 200000);
  bench_census(big, reg, 4, 200000);
  bench_census(big, reg, 5, 200000);

  t0 = std::chrono::steady_clock::now();
  constexpr int kDraws = 50;
  long long edges = 0;
  for (int k = 0; k < kDraws; ++k)
    edges += sample_sbm(SbmSpec::two_block(10000), rng).edge_count();
  std::printf("sbm throughput: %d 10000-node draws in %.3fs (avg %lld edges)\n",
              kDraws, seconds(t0), edges / kDraws);
  return 0;
}

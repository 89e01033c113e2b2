#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gmoe/graph.hpp"
#include "gmoe/registry.hpp"
#include "gmoe/rng.hpp"

namespace gmoe {

// One statistic vector: node fraction, the class frequencies of one order,
// and optional partial-graphlet counts. Statistics are addressed by a flat
// index: 0 = node stat, 1..C = classes, C+1.. = partials.
struct MomentVector {
  int order = 0;
  double node_stat = 0.0;
  std::vector<double> class_values;
  std::vector<double> partial_values;

  int stat_count() const {
    return 1 + static_cast<int>(class_values.size()) +
           static_cast<int>(partial_values.size());
  }
  double stat(int i) const;
  void set_stat(int i, double v);
  double class_sum() const;
};

// A pattern with entries 1 (edge), 0 (non-edge), -1 (ignored), zero diagonal,
// symmetric. The statistic it induces counts pattern embeddings per sampled
// subset, normalized like a class frequency.
struct PartialGraphlet {
  int order = 0;
  std::vector<std::int8_t> mask;  // order*order, row-major

  static PartialGraphlet star(int order);
  bool is_star() const;
  std::int8_t at(int i, int j) const {
    return mask[static_cast<std::size_t>(i) * order + j];
  }
  // Permutations of [order] preserving the mask.
  std::uint64_t stabilizer_size() const;
};

// All p-element index combinations of [0, len), lexicographic.
template <typename F>
void for_each_combination(int len, int p, F&& f) {
  if (p > len || p < 0) return;
  std::vector<int> idx(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (;;) {
    f(std::span<const int>(idx));
    int k = p - 1;
    while (k >= 0 && idx[static_cast<std::size_t>(k)] == len - p + k) --k;
    if (k < 0) return;
    ++idx[static_cast<std::size_t>(k)];
    for (int j = k + 1; j < p; ++j)
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

// C(n, p) as a double; exact while representable.
double binom(int n, int p);
// C(n_k, p) / C(n, p) without forming either count.
double binom_ratio(int n_k, int n, int p);

struct CensusConfig {
  std::int64_t exact_threshold = 200000;  // enumerate when C(n_k, p) fits
  std::int64_t samples = 100000;          // J for the sampled path
};

// Exact class frequencies: each present p-subset is classified and counts are
// normalized by C(n, p). The node stat is |V(g)| / n.
MomentVector exact_census(const Graph& g, const ClassRegistry& reg, int p, int n);

// Monte Carlo estimate from `samples` uniform p-subsets of the present
// vertices, scaled by C(n_k, p) / C(n, p). Deterministic given the seed and
// independent of thread count (fixed chunked substreams).
MomentVector sampled_census(const Graph& g, const ClassRegistry& reg, int p,
                            int n, std::int64_t samples, std::uint64_t seed);
// Single-thread reference for the kernel above; identical output by design.
MomentVector sampled_census_serial(const Graph& g, const ClassRegistry& reg,
                                   int p, int n, std::int64_t samples,
                                   std::uint64_t seed);

// Expected embedding count of the partial pattern per uniform subset,
// normalized by C(n, p) like the class statistics.
double partial_statistic_exact(const Graph& g, const PartialGraphlet& m, int n);
double partial_statistic(const Graph& g, const PartialGraphlet& m, int n,
                         std::int64_t samples, std::uint64_t seed);

// Census of one graph with the exact/sampled choice made by threshold, plus
// partial statistics.
MomentVector graph_census(const Graph& g, const ClassRegistry& reg, int p,
                          int n, const CensusConfig& cfg,
                          std::span<const PartialGraphlet> partials,
                          std::uint64_t seed);

// Mean census over a dataset; the per-graph target vector.
MomentVector dataset_targets(std::span<const Graph> graphs,
                             const ClassRegistry& reg, int p, int n,
                             const CensusConfig& cfg,
                             std::span<const PartialGraphlet> partials,
                             std::uint64_t seed);

}  // namespace gmoe

#include "gmoe/census.hpp"

#include <algorithm>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gmoe {
namespace {

constexpr std::int64_t kChunk = 4096;  // samples per RNG substream

void check_census_args(const Graph& g, const ClassRegistry& reg, int p, int n) {
  if (!reg.is_dense(p))
    throw ConfigError("census requires a dense class table for order " +
                      std::to_string(p));
  if (p > n)
    throw DataError("graphlet order " + std::to_string(p) +
                    " exceeds max label count " + std::to_string(n));
  if (g.max_label() > n)
    throw DataError("graph labels exceed the declared max label count");
}

// Embeddings of the mask into the induced pattern of w: arrangements matching
// every non-wildcard entry, divided by the mask's stabilizer.
std::int64_t embedding_count(const Graph& g, const PartialGraphlet& m,
                             std::span<const int> w, std::uint64_t stab) {
  const int p = m.order;
  if (m.is_star()) {
    // Position 0 is adjacent to all others; the rest are wildcards, so an
    // embedding is determined by the hub choice alone.
    std::int64_t hubs = 0;
    for (int h = 0; h < p; ++h) {
      int deg = 0;
      for (int j = 0; j < p; ++j)
        if (j != h && g.has_edge(w[h], w[j])) ++deg;
      if (deg == p - 1) ++hubs;
    }
    return hubs;
  }
  // General mask: count matching arrangements by backtracking.
  std::vector<int> pos(static_cast<std::size_t>(p), -1);
  std::vector<char> used(static_cast<std::size_t>(p), 0);
  std::int64_t arrangements = 0;
  auto rec = [&](auto&& self, int k) -> void {
    if (k == p) {
      ++arrangements;
      return;
    }
    for (int v = 0; v < p; ++v) {
      if (used[static_cast<std::size_t>(v)]) continue;
      bool ok = true;
      for (int a = 0; a < k && ok; ++a) {
        const std::int8_t want = m.at(a, k);
        if (want < 0) continue;
        const bool have = g.has_edge(w[pos[static_cast<std::size_t>(a)]], w[v]);
        ok = have == (want == 1);
      }
      if (!ok) continue;
      pos[static_cast<std::size_t>(k)] = v;
      used[static_cast<std::size_t>(v)] = 1;
      self(self, k + 1);
      used[static_cast<std::size_t>(v)] = 0;
    }
  };
  rec(rec, 0);
  return arrangements / static_cast<std::int64_t>(stab);
}

struct SampleCounts {
  std::vector<std::int64_t> classes;
};

// One fixed-size substream of the sampled census; integer counts make the
// reduction associative, so thread count never changes the result.
void census_chunk(const Graph& g, const std::vector<int>& verts,
                  const ClassRegistry& reg, int p, std::uint64_t seed,
                  std::int64_t count, std::vector<std::int64_t>& counts) {
  Rng rng(seed);
  const int n_k = static_cast<int>(verts.size());
  std::vector<int> w(static_cast<std::size_t>(p));
  for (std::int64_t s = 0; s < count; ++s) {
    const auto idx = floyd_sample(rng, n_k, p);
    for (int i = 0; i < p; ++i)
      w[static_cast<std::size_t>(i)] = verts[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
    ++counts[static_cast<std::size_t>(reg.classify(induced_code(g, w)))];
  }
}

MomentVector sampled_census_impl(const Graph& g, const ClassRegistry& reg,
                                 int p, int n, std::int64_t samples,
                                 std::uint64_t seed, bool parallel) {
  check_census_args(g, reg, p, n);
  if (samples < 1) throw ConfigError("sample count must be >= 1");
  MomentVector mv;
  mv.order = p;
  const int nclasses = reg.class_count(p);
  mv.class_values.assign(static_cast<std::size_t>(nclasses), 0.0);
  const auto verts = g.present_vertices();
  const int n_k = static_cast<int>(verts.size());
  mv.node_stat = static_cast<double>(n_k) / n;
  if (n_k < p) return mv;  // no p-subsets to draw

  const std::int64_t nchunks = (samples + kChunk - 1) / kChunk;
  std::vector<std::vector<std::int64_t>> per_chunk(
      static_cast<std::size_t>(nchunks),
      std::vector<std::int64_t>(static_cast<std::size_t>(nclasses), 0));

  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t c = 0; c < nchunks; ++c) {
      const std::int64_t count = std::min(kChunk, samples - c * kChunk);
      census_chunk(g, verts, reg, p, derive_seed(seed, static_cast<std::uint64_t>(c)),
                   count, per_chunk[static_cast<std::size_t>(c)]);
    }
  } else {
    for (std::int64_t c = 0; c < nchunks; ++c) {
      const std::int64_t count = std::min(kChunk, samples - c * kChunk);
      census_chunk(g, verts, reg, p, derive_seed(seed, static_cast<std::uint64_t>(c)),
                   count, per_chunk[static_cast<std::size_t>(c)]);
    }
  }

  const double scale = binom_ratio(n_k, n, p) / static_cast<double>(samples);
  for (const auto& counts : per_chunk)
    for (int f = 0; f < nclasses; ++f)
      mv.class_values[static_cast<std::size_t>(f)] +=
          static_cast<double>(counts[static_cast<std::size_t>(f)]);
  for (auto& v : mv.class_values) v *= scale;
  return mv;
}

}  // namespace

double MomentVector::stat(int i) const {
  if (i == 0) return node_stat;
  i -= 1;
  if (i < static_cast<int>(class_values.size()))
    return class_values[static_cast<std::size_t>(i)];
  i -= static_cast<int>(class_values.size());
  return partial_values.at(static_cast<std::size_t>(i));
}

void MomentVector::set_stat(int i, double v) {
  if (i == 0) {
    node_stat = v;
    return;
  }
  i -= 1;
  if (i < static_cast<int>(class_values.size())) {
    class_values[static_cast<std::size_t>(i)] = v;
    return;
  }
  i -= static_cast<int>(class_values.size());
  partial_values.at(static_cast<std::size_t>(i)) = v;
}

double MomentVector::class_sum() const {
  double s = 0.0;
  for (double v : class_values) s += v;
  return s;
}

PartialGraphlet PartialGraphlet::star(int order) {
  if (order < 2 || order > kMaxGraphletOrder)
    throw ConfigError("star order " + std::to_string(order) + " not supported");
  PartialGraphlet m;
  m.order = order;
  m.mask.assign(static_cast<std::size_t>(order) * order, -1);
  for (int i = 0; i < order; ++i) {
    m.mask[static_cast<std::size_t>(i) * order + i] = 0;
    if (i != 0) {
      m.mask[static_cast<std::size_t>(0) * order + i] = 1;
      m.mask[static_cast<std::size_t>(i) * order + 0] = 1;
    }
  }
  return m;
}

bool PartialGraphlet::is_star() const {
  for (int i = 0; i < order; ++i)
    for (int j = 0; j < order; ++j) {
      const std::int8_t v = at(i, j);
      if (i == j) {
        if (v != 0) return false;
      } else if (i == 0 || j == 0) {
        if (v != 1) return false;
      } else if (v != -1) {
        return false;
      }
    }
  return true;
}

std::uint64_t PartialGraphlet::stabilizer_size() const {
  const int p = order;
  std::vector<int> perm(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) perm[static_cast<std::size_t>(i)] = i;
  std::uint64_t count = 0;
  do {
    bool ok = true;
    for (int i = 0; i < p && ok; ++i)
      for (int j = 0; j < p && ok; ++j)
        ok = at(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]) == at(i, j);
    if (ok) ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return count;
}

double binom(int n, int p) {
  if (p < 0 || p > n) return 0.0;
  double r = 1.0;
  for (int i = 0; i < p; ++i) r = r * (n - i) / (i + 1);
  return r;
}

double binom_ratio(int n_k, int n, int p) {
  if (p > n_k) return 0.0;
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= static_cast<double>(n_k - i) / (n - i);
  return r;
}

MomentVector exact_census(const Graph& g, const ClassRegistry& reg, int p, int n) {
  check_census_args(g, reg, p, n);
  MomentVector mv;
  mv.order = p;
  const int nclasses = reg.class_count(p);
  mv.class_values.assign(static_cast<std::size_t>(nclasses), 0.0);
  const auto verts = g.present_vertices();
  mv.node_stat = static_cast<double>(verts.size()) / n;

  std::vector<std::int64_t> counts(static_cast<std::size_t>(nclasses), 0);
  std::vector<int> w(static_cast<std::size_t>(p));
  std::int64_t total = 0;
  for_each_combination(static_cast<int>(verts.size()), p, [&](std::span<const int> idx) {
    for (int i = 0; i < p; ++i)
      w[static_cast<std::size_t>(i)] = verts[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
    ++counts[static_cast<std::size_t>(reg.classify(induced_code(g, w)))];
    ++total;
  });
  if (total > 0) {
    // counts / C(n, p) = fraction within present subsets * C(n_k,p)/C(n,p)
    const double scale =
        binom_ratio(static_cast<int>(verts.size()), n, p) / static_cast<double>(total);
    for (int f = 0; f < nclasses; ++f)
      mv.class_values[static_cast<std::size_t>(f)] =
          static_cast<double>(counts[static_cast<std::size_t>(f)]) * scale;
  }
  return mv;
}

MomentVector sampled_census(const Graph& g, const ClassRegistry& reg, int p,
                            int n, std::int64_t samples, std::uint64_t seed) {
  return sampled_census_impl(g, reg, p, n, samples, seed, true);
}

MomentVector sampled_census_serial(const Graph& g, const ClassRegistry& reg,
                                   int p, int n, std::int64_t samples,
                                   std::uint64_t seed) {
  return sampled_census_impl(g, reg, p, n, samples, seed, false);
}

double partial_statistic_exact(const Graph& g, const PartialGraphlet& m, int n) {
  const int p = m.order;
  if (p > n) throw DataError("partial order exceeds max label count");
  const auto verts = g.present_vertices();
  if (static_cast<int>(verts.size()) < p) return 0.0;
  const std::uint64_t stab = m.stabilizer_size();
  std::int64_t total = 0;
  std::vector<int> w(static_cast<std::size_t>(p));
  for_each_combination(static_cast<int>(verts.size()), p, [&](std::span<const int> idx) {
    for (int i = 0; i < p; ++i)
      w[static_cast<std::size_t>(i)] = verts[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
    total += embedding_count(g, m, w, stab);
  });
  return static_cast<double>(total) /
         (binom(static_cast<int>(verts.size()), p) /
          binom_ratio(static_cast<int>(verts.size()), n, p));
}

double partial_statistic(const Graph& g, const PartialGraphlet& m, int n,
                         std::int64_t samples, std::uint64_t seed) {
  const int p = m.order;
  if (p > n) throw DataError("partial order exceeds max label count");
  if (samples < 1) throw ConfigError("sample count must be >= 1");
  const auto verts = g.present_vertices();
  const int n_k = static_cast<int>(verts.size());
  if (n_k < p) return 0.0;
  const std::uint64_t stab = m.stabilizer_size();

  const std::int64_t nchunks = (samples + kChunk - 1) / kChunk;
  std::vector<std::int64_t> sums(static_cast<std::size_t>(nchunks), 0);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t c = 0; c < nchunks; ++c) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    const std::int64_t count = std::min(kChunk, samples - c * kChunk);
    std::vector<int> w(static_cast<std::size_t>(p));
    std::int64_t acc = 0;
    for (std::int64_t s = 0; s < count; ++s) {
      const auto idx = floyd_sample(rng, n_k, p);
      for (int i = 0; i < p; ++i)
        w[static_cast<std::size_t>(i)] = verts[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
      acc += embedding_count(g, m, w, stab);
    }
    sums[static_cast<std::size_t>(c)] = acc;
  }
  std::int64_t total = 0;
  for (auto s : sums) total += s;
  return binom_ratio(n_k, n, p) * static_cast<double>(total) /
         static_cast<double>(samples);
}

MomentVector graph_census(const Graph& g, const ClassRegistry& reg, int p,
                          int n, const CensusConfig& cfg,
                          std::span<const PartialGraphlet> partials,
                          std::uint64_t seed) {
  const int n_k = g.vertex_count();
  const double exact_cost = binom(n_k, p);
  MomentVector mv =
      exact_cost <= static_cast<double>(cfg.exact_threshold)
          ? exact_census(g, reg, p, n)
          : sampled_census(g, reg, p, n, cfg.samples, derive_seed(seed, "census"));
  mv.partial_values.reserve(partials.size());
  for (std::size_t k = 0; k < partials.size(); ++k) {
    const auto& m = partials[k];
    const double cost = binom(n_k, m.order);
    mv.partial_values.push_back(
        cost <= static_cast<double>(cfg.exact_threshold)
            ? partial_statistic_exact(g, m, n)
            : partial_statistic(g, m, n, cfg.samples, derive_seed(seed, "partial", k)));
  }
  return mv;
}

MomentVector dataset_targets(std::span<const Graph> graphs,
                             const ClassRegistry& reg, int p, int n,
                             const CensusConfig& cfg,
                             std::span<const PartialGraphlet> partials,
                             std::uint64_t seed) {
  if (graphs.empty()) throw DataError("empty dataset");
  const std::int64_t count = static_cast<std::int64_t>(graphs.size());
  std::vector<MomentVector> per_graph(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t k = 0; k < count; ++k)
    per_graph[static_cast<std::size_t>(k)] =
        graph_census(graphs[static_cast<std::size_t>(k)], reg, p, n, cfg,
                     partials, derive_seed(seed, static_cast<std::uint64_t>(k)));

  MomentVector mean = per_graph.front();
  for (std::int64_t k = 1; k < count; ++k) {
    const auto& mv = per_graph[static_cast<std::size_t>(k)];
    mean.node_stat += mv.node_stat;
    for (std::size_t f = 0; f < mean.class_values.size(); ++f)
      mean.class_values[f] += mv.class_values[f];
    for (std::size_t f = 0; f < mean.partial_values.size(); ++f)
      mean.partial_values[f] += mv.partial_values[f];
  }
  const double inv = 1.0 / static_cast<double>(count);
  mean.node_stat *= inv;
  for (auto& v : mean.class_values) v *= inv;
  for (auto& v : mean.partial_values) v *= inv;
  return mean;
}

}  // namespace gmoe

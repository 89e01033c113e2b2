#include "gmoe/sampler.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace gmoe {
namespace {

int draw_category(Rng& rng, std::span<const double> probs) {
  const double u = rng.uniform01();
  double acc = 0.0;
  for (std::size_t c = 0; c < probs.size(); ++c) {
    acc += probs[c];
    if (u < acc) return static_cast<int>(c);
  }
  return static_cast<int>(probs.size()) - 1;
}

// Edges within one vertex group: Bernoulli(p) over the pair triangle,
// enumerated with geometric skips.
void add_within_edges(Graph& g, const std::vector<int>& members, double p,
                      Rng& rng) {
  const std::uint64_t m = members.size();
  if (m < 2) return;
  std::uint64_t row = 0, row_base = 0, next_base = m - 1;
  bernoulli_hits(rng, m * (m - 1) / 2, p, [&](std::uint64_t k) {
    while (k >= next_base) {
      row_base = next_base;
      ++row;
      next_base += m - 1 - row;
    }
    const std::uint64_t col = row + 1 + (k - row_base);
    g.add_edge(members[static_cast<std::size_t>(row)],
               members[static_cast<std::size_t>(col)]);
  });
}

void add_cross_edges(Graph& g, const std::vector<int>& a,
                     const std::vector<int>& b, double p, Rng& rng) {
  if (a.empty() || b.empty()) return;
  const std::uint64_t cols = b.size();
  bernoulli_hits(rng, a.size() * cols, p, [&](std::uint64_t k) {
    g.add_edge(a[static_cast<std::size_t>(k / cols)],
               b[static_cast<std::size_t>(k % cols)]);
  });
}

Graph relabel_uniform(const Graph& g, Rng& rng) {
  const auto perm = random_permutation(rng, g.max_label());
  return relabel(g, perm);
}

}  // namespace

void CommunityModel::validate() const {
  if (t < 1 || d < 1 || n < 1)
    throw ConfigError("community model needs t, d, n >= 1");
  if (static_cast<int>(z.size()) != t * d || static_cast<int>(s.size()) != t)
    throw ConfigError("community model shape mismatch");
  double total = 0.0;
  for (double v : s) {
    if (v < 0.0) throw ConfigError("community probabilities must be >= 0");
    total += v;
  }
  if (std::fabs(total - 1.0) > 1e-9)
    throw ConfigError("community probabilities must sum to 1");
}

CommunityModel community_model_from(const GeneratorParams& params,
                                    const LatentOutput& latent) {
  if (params.cfg.mode != GeneratorMode::community)
    throw ConfigError("generator is not in community mode");
  CommunityModel cm;
  cm.t = params.cfg.t;
  cm.d = params.cfg.d;
  cm.n = params.cfg.n;
  cm.z = latent.z;
  cm.s = softmax(params.logits());
  return cm;
}

SbmSpec SbmSpec::two_block(int nodes) {
  return SbmSpec{{0.5, 0.5}, {{0.3, 0.05}, {0.05, 0.3}}, nodes};
}

SbmSpec SbmSpec::four_block(int nodes) {
  return SbmSpec{{0.25, 0.25, 0.25, 0.25},
                 {{0.75, 0.1, 0.1, 0.1},
                  {0.1, 0.75, 0.1, 0.1},
                  {0.1, 0.1, 0.75, 0.1},
                  {0.1, 0.1, 0.1, 0.75}},
                 nodes};
}

void SbmSpec::validate() const {
  if (nodes < 1) throw ConfigError("sbm node count must be >= 1");
  if (pi.empty() || block.size() != pi.size())
    throw ConfigError("sbm block shapes inconsistent");
  double total = 0.0;
  for (double v : pi) total += v;
  if (std::fabs(total - 1.0) > 1e-9)
    throw ConfigError("sbm membership probabilities must sum to 1");
  for (std::size_t i = 0; i < block.size(); ++i) {
    if (block[i].size() != pi.size())
      throw ConfigError("sbm block matrix must be square");
    for (std::size_t j = 0; j < block.size(); ++j) {
      const double v = block[i][j];
      if (v < 0.0 || v > 1.0 || std::fabs(v - block[j][i]) > 1e-12)
        throw ConfigError("sbm block matrix must be symmetric with entries in [0,1]");
    }
  }
}

Graph realize(const LatentOutput& latent, const KernelSpec& kernel, Rng& rng) {
  const int n = static_cast<int>(latent.q.size());
  Graph g(n);
  std::vector<int> retained;
  for (int i = 0; i < n; ++i)
    if (rng.bernoulli(latent.q[static_cast<std::size_t>(i)])) {
      g.add_vertex(i);
      retained.push_back(i);
    }
  for (std::size_t a = 0; a < retained.size(); ++a)
    for (std::size_t b = a + 1; b < retained.size(); ++b) {
      const int i = retained[a], j = retained[b];
      if (rng.bernoulli(kernel_eval(kernel, latent.z_row(i), latent.z_row(j))))
        g.add_edge(i, j);
    }
  return relabel_uniform(g, rng);
}

Graph realize_community(const CommunityModel& cm, const KernelSpec& kernel,
                        Rng& rng) {
  cm.validate();
  Graph g(cm.n);
  std::vector<std::vector<int>> groups(static_cast<std::size_t>(cm.t));
  for (int i = 0; i < cm.n; ++i) {
    g.add_vertex(i);
    groups[static_cast<std::size_t>(draw_category(rng, cm.s))].push_back(i);
  }
  for (int a = 0; a < cm.t; ++a) {
    add_within_edges(g, groups[static_cast<std::size_t>(a)],
                     kernel_eval(kernel, cm.z_row(a), cm.z_row(a)), rng);
    for (int b = a + 1; b < cm.t; ++b)
      add_cross_edges(g, groups[static_cast<std::size_t>(a)],
                      groups[static_cast<std::size_t>(b)],
                      kernel_eval(kernel, cm.z_row(a), cm.z_row(b)), rng);
  }
  return relabel_uniform(g, rng);
}

Graph realize_adjacency(const LatentOutput& latent, Rng& rng) {
  if (latent.mode != GeneratorMode::adjacency)
    throw ConfigError("latent output is not adjacency-mode");
  // Recover n from the pair count.
  const std::size_t pairs = latent.edge_prob.size();
  int n = 1;
  while (static_cast<std::size_t>(n) * (n - 1) / 2 < pairs) ++n;
  if (static_cast<std::size_t>(n) * (n - 1) / 2 != pairs)
    throw ConfigError("edge probability vector has no valid node count");
  Graph g(n);
  std::size_t k = 0;
  for (int i = 0; i < n; ++i) {
    g.add_vertex(i);
    for (int j = i + 1; j < n; ++j, ++k)
      if (rng.bernoulli(latent.edge_prob[k])) g.add_edge(i, j);
  }
  return relabel_uniform(g, rng);
}

Graph sample_sbm(const SbmSpec& spec, Rng& rng) {
  spec.validate();
  Graph g(spec.nodes);
  const int t = static_cast<int>(spec.pi.size());
  std::vector<std::vector<int>> groups(static_cast<std::size_t>(t));
  for (int i = 0; i < spec.nodes; ++i) {
    g.add_vertex(i);
    groups[static_cast<std::size_t>(draw_category(rng, spec.pi))].push_back(i);
  }
  for (int a = 0; a < t; ++a) {
    add_within_edges(g, groups[static_cast<std::size_t>(a)],
                     spec.block[static_cast<std::size_t>(a)][static_cast<std::size_t>(a)], rng);
    for (int b = a + 1; b < t; ++b)
      add_cross_edges(g, groups[static_cast<std::size_t>(a)],
                      groups[static_cast<std::size_t>(b)],
                      spec.block[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)], rng);
  }
  return g;
}

Graph empty_graph(int n) {
  Graph g(n);
  for (int i = 0; i < n; ++i) g.add_vertex(i);
  return g;
}

Graph complete_graph(int n) {
  Graph g(n);
  for (int i = 0; i < n; ++i) g.add_vertex(i);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g.add_edge(i, j);
  return g;
}

Graph erdos_renyi(int n, double p, Rng& rng) {
  Graph g(n);
  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  for (int i = 0; i < n; ++i) g.add_vertex(i);
  add_within_edges(g, all, p, rng);
  return g;
}

}  // namespace gmoe

#pragma once

#include <vector>

#include "gmoe/generator.hpp"
#include "gmoe/graph.hpp"
#include "gmoe/kernels.hpp"
#include "gmoe/rng.hpp"

namespace gmoe {

// t community embeddings plus the membership distribution.
struct CommunityModel {
  int t = 0;
  int d = 0;
  int n = 0;                // node count of generated graphs
  std::vector<double> z;    // t x d, row-major
  std::vector<double> s;    // simplex of size t

  std::span<const double> z_row(int c) const {
    return {z.data() + static_cast<std::size_t>(c) * d, static_cast<std::size_t>(d)};
  }
  void validate() const;
};

CommunityModel community_model_from(const GeneratorParams& params,
                                    const LatentOutput& latent);

struct SbmSpec {
  std::vector<double> pi;                    // block membership probabilities
  std::vector<std::vector<double>> block;    // symmetric edge probabilities
  int nodes = 0;

  static SbmSpec two_block(int nodes = 80);
  static SbmSpec four_block(int nodes = 16);
  void validate() const;
};

// Node retention by q, independent edges by the kernel on the embeddings,
// then a uniform relabelling of [0, n).
Graph realize(const LatentOutput& latent, const KernelSpec& kernel, Rng& rng);

// Nodes draw communities i.i.d.; edges are Bernoulli on the community pair.
// All nodes retained; uniform relabelling applied.
Graph realize_community(const CommunityModel& cm, const KernelSpec& kernel,
                        Rng& rng);

// Adjacency-mode latent: every pair is included with its emitted probability,
// fixed size, uniform relabelling.
Graph realize_adjacency(const LatentOutput& latent, Rng& rng);

Graph sample_sbm(const SbmSpec& spec, Rng& rng);
Graph empty_graph(int n);
Graph complete_graph(int n);
Graph erdos_renyi(int n, double p, Rng& rng);

}  // namespace gmoe

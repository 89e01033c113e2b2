#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gmoe/error.hpp"
#include "gmoe/rng.hpp"

namespace gmoe {

// Fully connected net with two LeakyReLU(0.01) hidden layers and a linear
// output, on a caller-owned flat parameter vector. Layout: W1 (h1 x in), b1,
// W2 (h2 x h1), b2, W3 (out x h2), b3, all row-major.
struct MlpShape {
  int in = 0, h1 = 0, h2 = 0, out = 0;

  int param_count() const {
    return h1 * in + h1 + h2 * h1 + h2 + out * h2 + out;
  }
  int w1() const { return 0; }
  int b1() const { return h1 * in; }
  int w2() const { return b1() + h1; }
  int b2() const { return w2() + h2 * h1; }
  int w3() const { return b2() + h2; }
  int b3() const { return w3() + out * h2; }
};

struct MlpCache {
  std::vector<double> x, a1, y1, a2, y2, raw;
};

void mlp_forward(const MlpShape& s, std::span<const double> theta,
                 std::span<const double> x, MlpCache& cache);
// Accumulates d(loss)/d(theta) into grad given d(loss)/d(raw output).
void mlp_backward(const MlpShape& s, std::span<const double> theta,
                  const MlpCache& cache, std::span<const double> d_raw,
                  std::span<double> grad);

enum class GeneratorMode {
  latent,     // per-node retention probabilities q and embeddings z
  community,  // embeddings per community; membership logits as extra params
  adjacency,  // direct symmetric edge-probability matrix, fixed size
};

struct GeneratorConfig {
  GeneratorMode mode = GeneratorMode::latent;
  int input_dim = 10;
  int hidden1 = 10;
  int hidden2 = 10;
  int n = 0;  // node count of generated graphs
  int d = 0;  // embedding dimension (latent/community)
  int t = 0;  // community count (community mode)
  bool train_q = true;  // latent mode: false pins q to 1 for fixed-size data
  double eps_z = 1e-6;  // embedding norm floor
  double eps_y = 1e-6;  // adjacency-mode probability clamp

  int rows() const;        // embedding rows: n or t
  int output_dim() const;  // raw net output width
  int param_count() const;
  MlpShape mlp() const;
  void validate() const;
};

// All trainable parameters as one flat vector: the net, then (community mode)
// the t membership logits.
struct GeneratorParams {
  GeneratorConfig cfg;
  std::vector<double> theta;

  static GeneratorParams init(const GeneratorConfig& cfg, std::uint64_t seed);
  std::span<const double> logits() const;
  std::span<double> logits();
};

struct LatentOutput {
  GeneratorMode mode = GeneratorMode::latent;
  std::vector<double> q;          // n values (all 1 when pinned)
  std::vector<double> z;          // rows x d, row-major
  std::vector<double> edge_prob;  // adjacency mode: n(n-1)/2, pair-indexed
  MlpCache cache;
  int d = 0;

  std::span<const double> z_row(int i) const {
    return {z.data() + static_cast<std::size_t>(i) * d, static_cast<std::size_t>(d)};
  }
};

LatentOutput generator_forward(const GeneratorParams& params,
                               std::span<const double> omega);

// Upstream gradients with respect to the head outputs; any span may be empty.
struct LatentUpstream {
  std::span<const double> dq;
  std::span<const double> dz;
  std::span<const double> d_edge_prob;
  std::span<const double> d_logits;
};

// Accumulates d(loss)/d(theta) into grad (size params.theta.size()).
void generator_backward(const GeneratorParams& params, const LatentOutput& out,
                        const LatentUpstream& up, std::span<double> grad);

std::vector<double> sample_noise(Rng& rng, int input_dim);

// lambda * g(|theta|) with g zero inside radius kappa and squared distance
// beyond it; returns the value and its gradient.
double weight_penalty(std::span<const double> theta, double lambda, double kappa,
                      std::span<double> grad_out);

std::vector<double> softmax(std::span<const double> x);
// d(loss)/d(logits) from d(loss)/d(softmax outputs); accumulates into out.
void softmax_backward(std::span<const double> s, std::span<const double> ds,
                      std::span<double> out);

}  // namespace gmoe

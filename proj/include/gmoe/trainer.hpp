#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "gmoe/census.hpp"
#include "gmoe/generator.hpp"
#include "gmoe/kernels.hpp"
#include "gmoe/registry.hpp"
#include "gmoe/sampler.hpp"

namespace gmoe {

// The statistics being matched: the node fraction, every class of one order,
// and optional partial patterns. Flat indexing matches MomentVector.
struct StatisticSet {
  const ClassRegistry* registry = nullptr;
  int order = 0;
  std::vector<PartialGraphlet> partials;

  int count() const {
    return 1 + registry->class_count(order) + static_cast<int>(partials.size());
  }
};

// Value and gradients of one conditional-probability term, aligned with the
// subset it was evaluated on: dq[k] and dz[k*d + c] refer to node w[k].
struct EtaResult {
  double value = 0.0;
  std::vector<double> dq;
  std::vector<double> dz;
  // adjacency mode: (pair index into LatentOutput::edge_prob, gradient)
  std::vector<std::pair<std::int64_t, double>> dedge;
};

// class_size * prod_i q_i * prod_{i<j} phi^A (1-phi)^(1-A) over the subset w,
// with gradients in q (factor omitted, never divided) and z.
EtaResult eta(const LatentOutput& latent, const KernelSpec& kernel,
              std::span<const int> w, EdgeCode a, double class_size,
              bool want_grad = true);

// Node-fraction term: q_i with unit gradient.
EtaResult eta_node(const LatentOutput& latent, int node);

// Expected star-pattern embedding count over the subset w:
// prod_i q_i * sum_h prod_{j != h} phi(z_h, z_j).
EtaResult eta_partial_star(const LatentOutput& latent, const KernelSpec& kernel,
                           std::span<const int> w, bool want_grad = true);

// Adjacency-mode analogue of eta, reading pair probabilities directly.
EtaResult eta_adjacency(const LatentOutput& latent, std::span<const int> w,
                        EdgeCode a, double class_size, bool want_grad = true);

struct CommunityEtaResult {
  double value = 0.0;
  std::vector<double> dz;  // t x d
  std::vector<double> ds;  // t
};

// Community-model term: class_size * sum over community assignments of the
// membership product times the pattern probability, for a fixed class
// representative. Exact in the assignment sum; throws when t^p exceeds budget.
CommunityEtaResult eta_community(const CommunityModel& cm,
                                 const KernelSpec& kernel, EdgeCode a,
                                 double class_size, std::uint64_t budget,
                                 bool want_grad = true);

enum class WeightMode { identity, inverse_frequency };

std::vector<double> make_weights(const MomentVector& targets, WeightMode mode,
                                 double floor_delta = 1e-4);

struct TrainSchedule {
  // Step size per phase, strictly decreasing.
  std::vector<double> gammas = {1e-2, 3e-3, 1e-3};
  // Phase targets as fractions of the initial objective estimate...
  std::vector<double> u_fracs = {0.2, 0.08, 0.04};
  // ...or absolute values, which take precedence when nonempty.
  std::vector<double> u_abs;
};

struct TrainConfig {
  int order = 4;
  WeightMode weight_mode = WeightMode::identity;
  double weight_floor = 1e-4;
  int pair_batch = 128;   // subset pairs per step
  int noise_batch = 16;   // noise pairs per step
  int draws_per_step = 1; // statistic draws per step
  TrainSchedule schedule;
  double penalty_lambda = 0.0;
  double penalty_kappa = 1.0;
  std::uint64_t seed = 1;
  std::int64_t eval_every = 50;
  int eval_samples = 2048;
  std::int64_t max_iters = 200000;
  std::uint64_t community_budget = std::uint64_t{1} << 20;
};

// Model-side estimate of every statistic from `samples` latent draws.
MomentVector expected_moments(const GeneratorParams& params,
                              const KernelSpec& kernel, const StatisticSet& stats,
                              int samples, Rng& rng,
                              std::uint64_t community_budget = std::uint64_t{1} << 20);

// Weighted squared deviation of the model-side estimate from the targets.
double estimate_objective(const GeneratorParams& params, const KernelSpec& kernel,
                          const StatisticSet& stats, const MomentVector& targets,
                          std::span<const double> weights, int samples, Rng& rng,
                          std::uint64_t community_budget = std::uint64_t{1} << 20);

// Brute-force objective for small n: subset and pattern sums are enumerated
// exactly, only the latent noise is Monte Carlo. Diagnostics and test oracle.
double objective_exact(const GeneratorParams& params, const KernelSpec& kernel,
                       const StatisticSet& stats, const MomentVector& targets,
                       std::span<const double> weights, int noise_draws, Rng& rng);

// One unbiased minibatch estimate of the objective: a statistic is drawn
// proportional to its weight, two independent pattern representatives and
// minibatches of noise/subset pairs are drawn, and the centered product is
// averaged and scaled by the weight total.
double stochastic_objective(const GeneratorParams& params, const KernelSpec& kernel,
                            const StatisticSet& stats, const MomentVector& targets,
                            std::span<const double> weights, int pair_batch,
                            int noise_batch, Rng& rng,
                            std::uint64_t community_budget = std::uint64_t{1} << 20);

// One update: accumulates the summed product-rule gradient over the minibatch
// (plus the weight penalty) and steps against it. Returns the same estimate
// as stochastic_objective for the drawn minibatch.
double sgd_step(GeneratorParams& params, const KernelSpec& kernel,
                const StatisticSet& stats, const MomentVector& targets,
                std::span<const double> weights, const TrainConfig& cfg,
                double gamma, Rng& rng);

struct TraceRow {
  std::int64_t iteration = 0;
  double estimated_u = 0.0;
  int phase = 0;
  double wall_seconds = 0.0;
};

struct TrainResult {
  GeneratorParams params;
  std::vector<TraceRow> trace;
  bool reached_final_phase = false;
  double final_objective = 0.0;
  std::int64_t iterations = 0;
};

// Step-down training: run at gammas[k] until the evaluated objective first
// drops below threshold k, then move to the next phase; stop after the last
// phase or at max_iters (then the best-seen parameters are returned and the
// flag is left false).
TrainResult train(GeneratorParams params, const KernelSpec& kernel,
                  const StatisticSet& stats, const MomentVector& targets,
                  const TrainConfig& cfg,
                  const std::function<void(const TraceRow&)>& on_trace = {});

}  // namespace gmoe

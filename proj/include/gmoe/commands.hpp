#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gmoe/graph.hpp"

namespace gmoe {

// Everything a run needs, fed by CLI flags / config file. Strings keep the
// external spellings; validation happens when a command runs.
struct ExperimentConfig {
  // dataset: "tu:<dir>:<name>" | "edgelist:<path>" | "synthetic:empty" |
  //          "synthetic:sbm2" | "synthetic:sbm4"
  std::string dataset;
  int synthetic_count = 200;  // graphs drawn for synthetic sources
  int nodes = 0;              // synthetic node count (0 = source default)

  std::string kernel = "DP4";  // kind + optional training order, e.g. "RBF5"
  int poly_degree = 2;
  int order = 0;  // overrides the order suffix when nonzero
  double eps_phi = 1e-6;
  double eps_z = 1e-6;

  int embed_dim = 10;
  int hidden = 10;
  int input_dim = 10;
  int community = 0;  // t > 0 switches to the community model
  bool adjacency = false;
  std::string pin_q = "auto";  // auto | on | off
  std::vector<int> star_orders;

  std::string weight_mode = "identity";  // identity | inverse
  double weight_floor = 1e-4;
  int pair_batch = 128;
  int noise_batch = 16;
  int draws_per_step = 1;
  std::vector<double> gammas = {1e-2, 3e-3, 1e-3};
  std::vector<double> u_fracs = {0.2, 0.08, 0.04};
  std::vector<double> u_abs;
  double penalty_lambda = 0.0;
  double penalty_kappa = 1.0;
  std::int64_t max_iters = 200000;
  std::int64_t eval_every = 50;
  int eval_samples = 2048;

  std::int64_t census_samples = 100000;
  std::int64_t exact_threshold = 200000;

  std::uint64_t seed = 1;
  int threads = 0;
  std::string out_dir = ".";
  std::string checkpoint_format = "json";  // json | binary
  bool per_graph_census = false;

  std::string checkpoint;      // input checkpoint (generate/eval)
  int generate_count = 100;
  std::string generate_format = "edgelist";  // edgelist | tu
  std::string generated;       // pre-generated sample for eval

  int probe_order = 0;  // 0 = training order + 1
  bool run_probe = true;
  bool run_mmd = false;
  double mmd_sigma = 1.0;
  int eval_gen_count = 400;

  int registry_max_order = 6;
  int registry_dense_order = 6;
  std::string registry_out = "registry.bin";

  std::string canonical() const;  // key=value rendering for hashing
};

struct LoadedDataset {
  std::vector<Graph> graphs;
  int max_nodes = 1;
  bool fixed_size = true;
};

LoadedDataset load_dataset(const ExperimentConfig& cfg);

int cmd_census(const ExperimentConfig& cfg);
int cmd_train(const ExperimentConfig& cfg);
int cmd_generate(const ExperimentConfig& cfg);
int cmd_eval(const ExperimentConfig& cfg);
int cmd_registry_dump(const ExperimentConfig& cfg);

// Maps thrown errors onto the documented exit codes (2/3/4).
int run_command(const std::string& name, const ExperimentConfig& cfg);

}  // namespace gmoe

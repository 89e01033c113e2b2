// Command-line front end: census, train, generate, eval, registry-dump.
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
// failure.

#include <CLI11.hpp>

#include "gmoe/commands.hpp"

namespace {

void add_common(CLI::App* sub, gmoe::ExperimentConfig& cfg) {
  sub->set_config("--config");
  sub->add_option("--seed", cfg.seed, "RNG seed")->envname("GMOE_SEED");
  sub->add_option("--threads", cfg.threads, "worker cap (0 = default)")
      ->envname("GMOE_THREADS");
  sub->add_option("--out-dir", cfg.out_dir, "artifact directory")
      ->envname("GMOE_OUT_DIR");
}

void add_dataset(CLI::App* sub, gmoe::ExperimentConfig& cfg) {
  sub->add_option("--dataset", cfg.dataset,
                  "tu:<dir>:<name> | edgelist:<path> | synthetic:empty | "
                  "synthetic:sbm2 | synthetic:sbm4")
      ->required();
  sub->add_option("--count", cfg.synthetic_count, "synthetic dataset size");
  sub->add_option("--nodes", cfg.nodes, "synthetic node count (0 = default)");
}

void add_model(CLI::App* sub, gmoe::ExperimentConfig& cfg) {
  sub->add_option("--kernel", cfg.kernel, "kernel label, e.g. DP4 or RBF5");
  sub->add_option("--order", cfg.order, "training graphlet order override");
  sub->add_option("--poly-degree", cfg.poly_degree, "polynomial kernel degree");
  sub->add_option("--eps-phi", cfg.eps_phi, "probability clamp margin");
  sub->add_option("--eps-z", cfg.eps_z, "embedding norm floor");
  sub->add_option("--d", cfg.embed_dim, "embedding dimension");
  sub->add_option("--hidden", cfg.hidden, "hidden layer width");
  sub->add_option("--input-dim", cfg.input_dim, "noise input dimension");
  sub->add_option("--community", cfg.community, "community count (0 = per-node model)");
  sub->add_flag("--adjacency", cfg.adjacency, "direct adjacency-matrix head");
  sub->add_option("--pin-q", cfg.pin_q, "auto|on|off");
  sub->add_option("--star-orders", cfg.star_orders, "star partial orders");
}

void add_census_opts(CLI::App* sub, gmoe::ExperimentConfig& cfg) {
  sub->add_option("--census-samples", cfg.census_samples, "subsets per sampled census");
  sub->add_option("--exact-threshold", cfg.exact_threshold,
                  "enumerate when C(n,p) is at most this");
}

void add_train_opts(CLI::App* sub, gmoe::ExperimentConfig& cfg) {
  sub->add_option("--weight-mode", cfg.weight_mode, "identity|inverse");
  sub->add_option("--weight-floor", cfg.weight_floor, "inverse-weight floor");
  sub->add_option("--pair-batch", cfg.pair_batch, "subset pairs per step");
  sub->add_option("--noise-batch", cfg.noise_batch, "noise pairs per step");
  sub->add_option("--draws-per-step", cfg.draws_per_step, "statistic draws per step");
  sub->add_option("--gammas", cfg.gammas, "step size per phase");
  sub->add_option("--u-fracs", cfg.u_fracs, "phase targets as initial-objective fractions");
  sub->add_option("--u-abs", cfg.u_abs, "absolute phase targets (overrides fractions)");
  sub->add_option("--penalty-lambda", cfg.penalty_lambda, "weight penalty strength");
  sub->add_option("--penalty-kappa", cfg.penalty_kappa, "weight penalty radius");
  sub->add_option("--max-iters", cfg.max_iters, "iteration cap");
  sub->add_option("--eval-every", cfg.eval_every, "objective evaluation cadence");
  sub->add_option("--eval-samples", cfg.eval_samples, "latent draws per evaluation");
  sub->add_option("--checkpoint-format", cfg.checkpoint_format, "json|binary");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graphlet-moment graph generator"};
  app.require_subcommand(1);
  gmoe::ExperimentConfig cfg;

  auto* census = app.add_subcommand("census", "dataset statistics to targets.csv");
  add_common(census, cfg);
  add_dataset(census, cfg);
  add_model(census, cfg);
  add_census_opts(census, cfg);
  census->add_flag("--per-graph", cfg.per_graph_census, "also write census.jsonl");

  auto* train = app.add_subcommand("train", "fit a generator to a dataset");
  add_common(train, cfg);
  add_dataset(train, cfg);
  add_model(train, cfg);
  add_census_opts(train, cfg);
  add_train_opts(train, cfg);

  auto* gen = app.add_subcommand("generate", "sample graphs from a checkpoint");
  add_common(gen, cfg);
  gen->add_option("--checkpoint", cfg.checkpoint, "trained checkpoint")->required();
  gen->add_option("--graphs", cfg.generate_count, "number of graphs");
  gen->add_option("--format", cfg.generate_format, "edgelist|tu");

  auto* ev = app.add_subcommand("eval", "compare a model or sample to a dataset");
  add_common(ev, cfg);
  add_dataset(ev, cfg);
  add_model(ev, cfg);
  add_census_opts(ev, cfg);
  ev->add_option("--checkpoint", cfg.checkpoint, "trained checkpoint to sample from");
  ev->add_option("--generated", cfg.generated, "pre-generated edge-list sample");
  ev->add_option("--eval-graphs", cfg.eval_gen_count, "generated sample size");
  ev->add_option("--probe-order", cfg.probe_order, "probe census order (0 = order+1)");
  ev->add_flag("--no-probe", [&cfg](std::int64_t) { cfg.run_probe = false; },
               "skip the discriminator probe");
  ev->add_flag("--mmd", cfg.run_mmd, "also compute the MMD statistics");
  ev->add_option("--mmd-sigma", cfg.mmd_sigma, "Gaussian kernel bandwidth");

  auto* rd = app.add_subcommand("registry-dump", "write the class tables to a file");
  add_common(rd, cfg);
  rd->add_option("--max-order", cfg.registry_max_order, "largest order");
  rd->add_option("--dense-order", cfg.registry_dense_order, "largest dense order");
  rd->add_option("--file", cfg.registry_out, "output name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return gmoe::run_command(app.get_subcommands().front()->get_name(), cfg);
}

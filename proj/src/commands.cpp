#include "gmoe/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "gmoe/artifacts.hpp"
#include "gmoe/census.hpp"
#include "gmoe/dataset_io.hpp"
#include "gmoe/eval.hpp"
#include "gmoe/sampler.hpp"
#include "gmoe/trainer.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gmoe {
namespace {

namespace fs = std::filesystem;

void apply_threads(const ExperimentConfig& cfg) {
#ifdef _OPENMP
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#else
  (void)cfg;
#endif
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

KernelSpec make_kernel(const ExperimentConfig& cfg, int* order_out) {
  const ParsedKernel pk = parse_kernel_label(cfg.kernel);
  KernelSpec k;
  k.kind = pk.kind;
  k.degree = cfg.poly_degree;
  k.eps_phi = cfg.eps_phi;
  k.eps_z = cfg.eps_z;
  int order = cfg.order > 0 ? cfg.order : pk.order;
  if (order < 2)
    throw ConfigError("no training order given (use e.g. kernel=DP4 or order=4)");
  if (order_out) *order_out = order;
  return k;
}

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  return (fs::path(cfg.out_dir) / name).string();
}

RunStamp make_stamp(const ExperimentConfig& cfg) {
  RunStamp stamp;
  stamp.config_hash = config_hash(cfg.canonical());
  stamp.seed = cfg.seed;
  return stamp;
}

std::vector<PartialGraphlet> make_partials(const ExperimentConfig& cfg) {
  std::vector<PartialGraphlet> out;
  for (int p : cfg.star_orders) out.push_back(PartialGraphlet::star(p));
  return out;
}

int required_registry_order(const ExperimentConfig& cfg, int train_order) {
  int need = std::max(train_order, 3);
  if (cfg.probe_order > 0) need = std::max(need, cfg.probe_order);
  else need = std::max(need, train_order + 1);
  return std::min(need, 6);  // census needs dense tables
}

std::vector<Graph> generate_sample(const Checkpoint& cp, int count,
                                   std::uint64_t seed) {
  std::vector<Graph> out(static_cast<std::size_t>(count));
  const std::int64_t total = count;
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t k = 0; k < total; ++k) {
    Rng rng(derive_seed(seed, "gen", static_cast<std::uint64_t>(k)));
    const auto omega = sample_noise(rng, cp.params.cfg.input_dim);
    const LatentOutput lat = generator_forward(cp.params, omega);
    switch (cp.params.cfg.mode) {
      case GeneratorMode::latent:
        out[static_cast<std::size_t>(k)] = realize(lat, cp.kernel, rng);
        break;
      case GeneratorMode::community:
        out[static_cast<std::size_t>(k)] =
            realize_community(community_model_from(cp.params, lat), cp.kernel, rng);
        break;
      case GeneratorMode::adjacency:
        out[static_cast<std::size_t>(k)] = realize_adjacency(lat, rng);
        break;
    }
  }
  return out;
}

}  // namespace

std::string ExperimentConfig::canonical() const {
  std::ostringstream ss;
  ss << "dataset=" << dataset << ";count=" << synthetic_count
     << ";nodes=" << nodes << ";kernel=" << kernel << ";poly=" << poly_degree
     << ";order=" << order << ";eps_phi=" << eps_phi << ";eps_z=" << eps_z
     << ";d=" << embed_dim << ";hidden=" << hidden << ";input=" << input_dim
     << ";community=" << community << ";adjacency=" << adjacency
     << ";pin_q=" << pin_q << ";stars=";
  for (int s : star_orders) ss << s << "+";
  ss << ";weights=" << weight_mode << ";floor=" << weight_floor
     << ";L=" << pair_batch << ";M=" << noise_batch << ";draws=" << draws_per_step
     << ";gammas=";
  for (double g : gammas) ss << g << "+";
  ss << ";u_fracs=";
  for (double u : u_fracs) ss << u << "+";
  ss << ";u_abs=";
  for (double u : u_abs) ss << u << "+";
  ss << ";lambda=" << penalty_lambda << ";kappa=" << penalty_kappa
     << ";max_iters=" << max_iters << ";eval_every=" << eval_every
     << ";eval_samples=" << eval_samples << ";J=" << census_samples
     << ";exact=" << exact_threshold << ";seed=" << seed;
  return ss.str();
}

LoadedDataset load_dataset(const ExperimentConfig& cfg) {
  LoadedDataset ds;
  const auto parts = split(cfg.dataset, ':');
  const std::string& kind = parts[0];

  if (kind == "tu") {
    if (parts.size() != 3)
      throw ConfigError("dataset 'tu' needs the form tu:<dir>:<name>");
    ds.graphs = load_tu_dataset(parts[1], parts[2]);
  } else if (kind == "edgelist") {
    if (parts.size() != 2)
      throw ConfigError("dataset 'edgelist' needs the form edgelist:<path>");
    ds.graphs = load_edgelist(parts[1]);
  } else if (kind == "synthetic") {
    if (parts.size() != 2)
      throw ConfigError("dataset 'synthetic' needs a variant, e.g. synthetic:sbm4");
    if (cfg.synthetic_count < 1)
      throw ConfigError("synthetic dataset needs count >= 1");
    Rng rng(derive_seed(cfg.seed, "data"));
    if (parts[1] == "empty") {
      const int n = cfg.nodes > 0 ? cfg.nodes : 10;
      ds.graphs.assign(static_cast<std::size_t>(cfg.synthetic_count), empty_graph(n));
    } else if (parts[1] == "sbm2" || parts[1] == "sbm4") {
      const SbmSpec spec = parts[1] == "sbm2"
                               ? SbmSpec::two_block(cfg.nodes > 0 ? cfg.nodes : 80)
                               : SbmSpec::four_block(cfg.nodes > 0 ? cfg.nodes : 16);
      ds.graphs.reserve(static_cast<std::size_t>(cfg.synthetic_count));
      for (int k = 0; k < cfg.synthetic_count; ++k)
        ds.graphs.push_back(sample_sbm(spec, rng));
    } else {
      throw ConfigError("unknown synthetic dataset '" + parts[1] + "'");
    }
  } else {
    throw ConfigError("unknown dataset kind '" + kind + "'");
  }

  if (ds.graphs.empty()) throw DataError("dataset is empty");
  ds.max_nodes = max_vertex_count(ds.graphs);
  ds.fixed_size = std::all_of(ds.graphs.begin(), ds.graphs.end(), [&](const Graph& g) {
    return g.vertex_count() == ds.max_nodes;
  });
  return ds;
}

int cmd_census(const ExperimentConfig& cfg) {
  apply_threads(cfg);
  int order = 0;
  make_kernel(cfg, &order);  // validates the label and yields the order
  const auto ds = load_dataset(cfg);
  const auto partials = make_partials(cfg);
  ClassRegistry reg(std::max(order, 3));
  const CensusConfig ccfg{cfg.exact_threshold, cfg.census_samples};
  const RunStamp stamp = make_stamp(cfg);

  const auto targets = dataset_targets(ds.graphs, reg, order, ds.max_nodes, ccfg,
                                       partials, derive_seed(cfg.seed, "targets"));
  write_targets_csv(out_path(cfg, "targets.csv"), targets, reg, partials, stamp);

  if (cfg.per_graph_census) {
    std::vector<MomentVector> rows;
    rows.reserve(ds.graphs.size());
    for (std::size_t k = 0; k < ds.graphs.size(); ++k)
      rows.push_back(graph_census(ds.graphs[k], reg, order, ds.max_nodes, ccfg,
                                  partials, derive_seed(cfg.seed, k)));
    write_census_jsonl(out_path(cfg, "census.jsonl"), rows, stamp);
  }
  std::cout << "census: " << ds.graphs.size() << " graphs, max nodes "
            << ds.max_nodes << ", order " << order << "\n";
  return 0;
}

int cmd_train(const ExperimentConfig& cfg) {
  apply_threads(cfg);
  int order = 0;
  KernelSpec kernel = make_kernel(cfg, &order);
  const auto ds = load_dataset(cfg);
  const auto partials = make_partials(cfg);
  ClassRegistry reg(required_registry_order(cfg, order));
  const CensusConfig ccfg{cfg.exact_threshold, cfg.census_samples};
  const RunStamp stamp = make_stamp(cfg);

  const auto targets = dataset_targets(ds.graphs, reg, order, ds.max_nodes, ccfg,
                                       partials, derive_seed(cfg.seed, "targets"));

  GeneratorConfig gcfg;
  gcfg.input_dim = cfg.input_dim;
  gcfg.hidden1 = cfg.hidden;
  gcfg.hidden2 = cfg.hidden;
  gcfg.n = ds.max_nodes;
  gcfg.d = cfg.embed_dim;
  gcfg.eps_z = cfg.eps_z;
  if (cfg.community > 0) {
    gcfg.mode = GeneratorMode::community;
    gcfg.t = cfg.community;
  } else if (cfg.adjacency) {
    gcfg.mode = GeneratorMode::adjacency;
    if (!ds.fixed_size)
      throw ConfigError("the adjacency-matrix variant requires fixed-size graphs");
  } else {
    gcfg.mode = GeneratorMode::latent;
    if (cfg.pin_q == "on") gcfg.train_q = false;
    else if (cfg.pin_q == "off") gcfg.train_q = true;
    else if (cfg.pin_q == "auto") gcfg.train_q = !ds.fixed_size;
    else throw ConfigError("pin_q must be auto, on, or off");
  }

  GeneratorParams params = GeneratorParams::init(gcfg, derive_seed(cfg.seed, "init"));

  StatisticSet stats{&reg, order, partials};
  TrainConfig tcfg;
  tcfg.order = order;
  if (cfg.weight_mode == "identity") tcfg.weight_mode = WeightMode::identity;
  else if (cfg.weight_mode == "inverse") tcfg.weight_mode = WeightMode::inverse_frequency;
  else throw ConfigError("weight_mode must be identity or inverse");
  tcfg.weight_floor = cfg.weight_floor;
  tcfg.pair_batch = cfg.pair_batch;
  tcfg.noise_batch = cfg.noise_batch;
  tcfg.draws_per_step = cfg.draws_per_step;
  tcfg.schedule.gammas = cfg.gammas;
  tcfg.schedule.u_fracs = cfg.u_fracs;
  tcfg.schedule.u_abs = cfg.u_abs;
  tcfg.penalty_lambda = cfg.penalty_lambda;
  tcfg.penalty_kappa = cfg.penalty_kappa;
  tcfg.seed = cfg.seed;
  tcfg.eval_every = cfg.eval_every;
  tcfg.eval_samples = cfg.eval_samples;
  tcfg.max_iters = cfg.max_iters;

  const TrainResult result = train(std::move(params), kernel, stats, targets, tcfg);

  Checkpoint cp{result.params, kernel, order, cfg.star_orders, stamp};
  save_checkpoint(out_path(cfg, "checkpoint." +
                                    std::string(cfg.checkpoint_format == "binary" ? "bin" : "json")),
                  cp, cfg.checkpoint_format == "binary");
  write_trace_csv(out_path(cfg, "trace.csv"), result.trace, stamp);
  std::cout << "train: " << result.iterations << " iterations, final objective "
            << result.final_objective
            << (result.reached_final_phase ? "" : " (max iterations reached)")
            << "\n";
  return 0;
}

int cmd_generate(const ExperimentConfig& cfg) {
  apply_threads(cfg);
  if (cfg.checkpoint.empty()) throw ConfigError("generate needs checkpoint=<path>");
  if (cfg.generate_count < 1) throw ConfigError("generate count must be >= 1");
  const Checkpoint cp = load_checkpoint(cfg.checkpoint);
  const auto sample = generate_sample(cp, cfg.generate_count, derive_seed(cfg.seed, "sample"));
  if (cfg.generate_format == "edgelist") {
    write_edgelist(out_path(cfg, "generated.txt"), sample);
  } else if (cfg.generate_format == "tu") {
    fs::create_directories(cfg.out_dir);
    write_tu_dataset(cfg.out_dir, "generated", sample);
  } else {
    throw ConfigError("generate format must be edgelist or tu");
  }
  std::cout << "generate: " << sample.size() << " graphs\n";
  return 0;
}

int cmd_eval(const ExperimentConfig& cfg) {
  apply_threads(cfg);
  if (cfg.checkpoint.empty() && cfg.generated.empty())
    throw ConfigError("eval needs checkpoint=<path> or generated=<path>");
  const auto ds = load_dataset(cfg);
  const RunStamp stamp = make_stamp(cfg);

  int order = 0;
  KernelSpec kernel = make_kernel(cfg, &order);
  std::vector<PartialGraphlet> partials = make_partials(cfg);
  std::vector<Graph> sample;
  if (!cfg.checkpoint.empty()) {
    const Checkpoint cp = load_checkpoint(cfg.checkpoint);
    kernel = cp.kernel;
    order = cp.train_order;
    partials.clear();
    for (int p : cp.star_orders) partials.push_back(PartialGraphlet::star(p));
    sample = generate_sample(cp, cfg.eval_gen_count, derive_seed(cfg.seed, "eval-gen"));
  } else {
    sample = load_edgelist(cfg.generated);
  }

  const int probe_order = cfg.probe_order > 0 ? cfg.probe_order
                                              : std::min(order + 1, 6);
  ClassRegistry reg(std::max({order, probe_order, 4}));
  const CensusConfig ccfg{cfg.exact_threshold, cfg.census_samples};

  const int n = std::max(max_vertex_count(ds.graphs), max_vertex_count(sample));
  const auto targets = dataset_targets(ds.graphs, reg, order, n, ccfg, partials,
                                       derive_seed(cfg.seed, "targets"));

  EvalReport report;
  report.seed = cfg.seed;
  report.gen_sample_size = static_cast<int>(sample.size());
  report.real_sample_size = static_cast<int>(ds.graphs.size());
  std::tie(report.total_difference, report.max_difference) =
      graphlet_difference(sample, targets, reg, order, n, ccfg, partials,
                          derive_seed(cfg.seed, "gen-census"),
                          &report.per_stat_difference);

  if (cfg.run_probe) {
    ProbeOptions popt;
    popt.order = probe_order;
    popt.census_samples = std::min<std::int64_t>(cfg.census_samples, 20000);
    popt.exact_threshold = cfg.exact_threshold;
    report.classifier_rate = discriminator_probe(ds.graphs, sample, reg, popt,
                                                 derive_seed(cfg.seed, "probe"));
  }
  if (cfg.run_mmd) {
    report.mmd_degree = mmd(ds.graphs, sample, MmdStatistic::degree, cfg.mmd_sigma,
                            reg, ccfg, derive_seed(cfg.seed, "mmd-deg"));
    report.mmd_clustering = mmd(ds.graphs, sample, MmdStatistic::clustering,
                                cfg.mmd_sigma, reg, ccfg, derive_seed(cfg.seed, "mmd-clu"));
    report.mmd_orbit = mmd(ds.graphs, sample, MmdStatistic::orbit, cfg.mmd_sigma,
                           reg, ccfg, derive_seed(cfg.seed, "mmd-orb"));
  }

  write_report_json(out_path(cfg, "report.json"), report, stamp);
  write_report_csv(out_path(cfg, "report.csv"), report, stamp);

  int bins = 1;
  for (const auto& g : ds.graphs)
    for (auto d : g.degrees()) bins = std::max(bins, static_cast<int>(d) + 1);
  for (const auto& g : sample)
    for (auto d : g.degrees()) bins = std::max(bins, static_cast<int>(d) + 1);
  write_histogram_csv(out_path(cfg, "degree_hist.csv"),
                      degree_histogram(ds.graphs, bins), "real",
                      degree_histogram(sample, bins), "generated", stamp);

  std::cout << "eval: total difference " << report.total_difference
            << ", max " << report.max_difference;
  if (report.classifier_rate >= 0.0)
    std::cout << ", probe accuracy " << report.classifier_rate;
  std::cout << "\n";
  return 0;
}

int cmd_registry_dump(const ExperimentConfig& cfg) {
  apply_threads(cfg);
  ClassRegistry reg(cfg.registry_max_order, cfg.registry_dense_order);
  fs::create_directories(cfg.out_dir);
  const std::string path = (fs::path(cfg.out_dir) / cfg.registry_out).string();
  reg.dump(path);
  std::cout << "registry-dump: wrote " << path << "\n";
  return 0;
}

int run_command(const std::string& name, const ExperimentConfig& cfg) {
  try {
    if (name == "census") return cmd_census(cfg);
    if (name == "train") return cmd_train(cfg);
    if (name == "generate") return cmd_generate(cfg);
    if (name == "eval") return cmd_eval(cfg);
    if (name == "registry-dump") return cmd_registry_dump(cfg);
    std::cerr << "unknown command '" << name << "'\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace gmoe

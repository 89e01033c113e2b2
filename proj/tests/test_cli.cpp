#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gmoe/census.hpp"
#include "gmoe/commands.hpp"
#include "gmoe/dataset_io.hpp"

using namespace gmoe;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("gmoe_cli_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
  static int counter;
};
int TempDir::counter = 0;

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// trace rows with the wall-clock column dropped
std::string trace_without_wall(const fs::path& p) {
  std::ifstream is(p);
  std::string line, out;
  while (std::getline(is, line)) {
    const auto last = line.rfind(',');
    out += line.substr(0, last);
    out += '\n';
  }
  return out;
}

ExperimentConfig empty_train_config(const std::string& out_dir) {
  ExperimentConfig cfg;
  cfg.dataset = "synthetic:empty";
  cfg.synthetic_count = 16;
  cfg.nodes = 8;
  cfg.kernel = "RBF3";
  cfg.pin_q = "auto";
  cfg.max_iters = 300;
  cfg.eval_every = 25;
  cfg.u_abs = {1e-5, 1e-7, 1e-9};
  cfg.eval_samples = 512;
  cfg.seed = 5;
  cfg.out_dir = out_dir;
  return cfg;
}

}  // namespace

TEST_CASE("census command writes the empty-class target") {
  TempDir dir;
  ExperimentConfig cfg;
  cfg.dataset = "synthetic:empty";
  cfg.synthetic_count = 4;
  cfg.nodes = 10;
  cfg.kernel = "RBF3";
  cfg.out_dir = dir.str();
  cfg.per_graph_census = true;
  CHECK(run_command("census", cfg) == 0);

  const auto csv = slurp(dir.path / "targets.csv");
  CHECK(csv.find("node,-1,,1\n") != std::string::npos);
  // the all-zero canonical code is the empty class at value 1
  CHECK(csv.find(",00000000,1\n") != std::string::npos);
  CHECK(fs::exists(dir.path / "census.jsonl"));
}

TEST_CASE("census output is byte-identical across reruns with one seed") {
  TempDir a, b;
  ExperimentConfig cfg;
  cfg.dataset = "synthetic:sbm4";
  cfg.synthetic_count = 12;
  cfg.kernel = "DP4";
  cfg.seed = 923;
  cfg.out_dir = a.str();
  CHECK(run_command("census", cfg) == 0);
  cfg.out_dir = b.str();
  CHECK(run_command("census", cfg) == 0);
  CHECK(slurp(a.path / "targets.csv") == slurp(b.path / "targets.csv"));

  // a different seed draws a different dataset
  cfg.seed = 924;
  TempDir c;
  cfg.out_dir = c.str();
  CHECK(run_command("census", cfg) == 0);
  CHECK(slurp(a.path / "targets.csv") != slurp(c.path / "targets.csv"));
}

TEST_CASE("train writes a checkpoint and a trace; both deterministic") {
  TempDir a, b;
  auto cfg = empty_train_config(a.str());
  CHECK(run_command("train", cfg) == 0);
  REQUIRE(fs::exists(a.path / "checkpoint.json"));
  REQUIRE(fs::exists(a.path / "trace.csv"));

  cfg.out_dir = b.str();
  CHECK(run_command("train", cfg) == 0);
  CHECK(slurp(a.path / "checkpoint.json") == slurp(b.path / "checkpoint.json"));
  CHECK(trace_without_wall(a.path / "trace.csv") ==
        trace_without_wall(b.path / "trace.csv"));
}

TEST_CASE("generate then load round-trips through the census pipeline") {
  TempDir dir;
  auto cfg = empty_train_config(dir.str());
  REQUIRE(run_command("train", cfg) == 0);

  cfg.checkpoint = (dir.path / "checkpoint.json").string();
  cfg.generate_count = 40;
  CHECK(run_command("generate", cfg) == 0);
  const auto sample = load_edgelist((dir.path / "generated.txt").string());
  REQUIRE(static_cast<int>(sample.size()) == 40);

  // structure survives the text format: censuses agree with the in-memory
  // sample regenerated from the same seed
  ClassRegistry reg(3);
  const auto written = dataset_targets(sample, reg, 3, 8, CensusConfig{}, {}, 3);
  CHECK(written.node_stat == doctest::Approx(1.0));
  // a trained empty-graph model emits (almost) only empty graphs
  CHECK(written.class_values[static_cast<std::size_t>(reg.classify(EdgeCode{3, 0}))] ==
        doctest::Approx(1.0).epsilon(1e-3));

  // tu output format round-trips as well
  cfg.generate_format = "tu";
  CHECK(run_command("generate", cfg) == 0);
  const auto tu = load_tu_dataset(dir.str(), "generated");
  CHECK(tu.size() == 40);
}

TEST_CASE("eval produces a report against the training data") {
  TempDir dir;
  auto cfg = empty_train_config(dir.str());
  REQUIRE(run_command("train", cfg) == 0);
  cfg.checkpoint = (dir.path / "checkpoint.json").string();
  cfg.eval_gen_count = 60;
  cfg.run_mmd = true;
  cfg.probe_order = 4;
  CHECK(run_command("eval", cfg) == 0);
  REQUIRE(fs::exists(dir.path / "report.json"));
  REQUIRE(fs::exists(dir.path / "report.csv"));
  REQUIRE(fs::exists(dir.path / "degree_hist.csv"));
  const auto json = slurp(dir.path / "report.json");
  CHECK(json.find("total_difference") != std::string::npos);
  CHECK(json.find("classifier_rate") != std::string::npos);
}

TEST_CASE("registry-dump writes a loadable file") {
  TempDir dir;
  ExperimentConfig cfg;
  cfg.out_dir = dir.str();
  cfg.registry_max_order = 5;
  cfg.registry_dense_order = 5;
  CHECK(run_command("registry-dump", cfg) == 0);
  const auto reg = ClassRegistry::load((dir.path / "registry.bin").string());
  CHECK(reg.class_count(5) == 34);
}

TEST_CASE("config errors exit with code 2") {
  ExperimentConfig cfg;
  cfg.dataset = "nonsense:here";
  cfg.kernel = "DP4";
  CHECK(run_command("census", cfg) == 2);
  cfg.dataset = "synthetic:empty";
  cfg.kernel = "DP";  // no order anywhere
  cfg.order = 0;
  CHECK(run_command("census", cfg) == 2);
  cfg.kernel = "DP4";
  cfg.u_abs = {1.0, 2.0};  // not decreasing
  CHECK(run_command("train", cfg) == 2);
  CHECK(run_command("no-such-command", cfg) == 2);
}

TEST_CASE("data errors exit with code 3") {
  TempDir dir;
  ExperimentConfig cfg;
  cfg.dataset = "tu:" + dir.str() + ":missing";
  cfg.kernel = "DP4";
  cfg.out_dir = dir.str();
  CHECK(run_command("census", cfg) == 3);

  cfg.dataset = "synthetic:empty";
  cfg.checkpoint = (dir.path / "no_checkpoint.json").string();
  CHECK(run_command("generate", cfg) == 3);
}

TEST_CASE("synthetic dataset sources honour node overrides") {
  ExperimentConfig cfg;
  cfg.dataset = "synthetic:sbm2";
  cfg.synthetic_count = 3;
  cfg.nodes = 24;
  const auto ds = load_dataset(cfg);
  CHECK(ds.graphs.size() == 3);
  CHECK(ds.max_nodes == 24);
  CHECK(ds.fixed_size);

  cfg.dataset = "synthetic:empty";
  cfg.nodes = 0;
  const auto empty = load_dataset(cfg);
  CHECK(empty.max_nodes == 10);  // source default
}

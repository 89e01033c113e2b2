#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "gmoe/artifacts.hpp"
#include "gmoe/census.hpp"
#include "gmoe/dataset_io.hpp"
#include "gmoe/sampler.hpp"

using namespace gmoe;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("gmoe_io_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
  static int counter;
};
int TempDir::counter = 0;

void put(const fs::path& p, const std::string& text) {
  std::ofstream os(p);
  os << text;
}

}  // namespace

TEST_CASE("tu loader: two-node single-edge toy") {
  TempDir dir;
  put(dir.path / "toy_A.txt", "1, 2\n2, 1\n");
  put(dir.path / "toy_graph_indicator.txt", "1\n1\n");
  const auto graphs = load_tu_dataset(dir.str(), "toy");
  REQUIRE(graphs.size() == 1);
  CHECK(graphs[0].vertex_count() == 2);
  CHECK(graphs[0].edge_count() == 1);  // reciprocal lines merge
  CHECK(graphs[0].has_edge(0, 1));
}

TEST_CASE("tu loader: separators, multiple graphs, isolated nodes") {
  TempDir dir;
  put(dir.path / "two_A.txt", "1 2\n2,1\n4, 5\n");
  put(dir.path / "two_graph_indicator.txt", "1\n1\n1\n2\n2\n");
  const auto graphs = load_tu_dataset(dir.str(), "two");
  REQUIRE(graphs.size() == 2);
  CHECK(graphs[0].vertex_count() == 3);  // node 3 is isolated but present
  CHECK(graphs[0].edge_count() == 1);
  CHECK(graphs[1].vertex_count() == 2);
  CHECK(graphs[1].has_edge(0, 1));
}

TEST_CASE("tu loader: parse errors carry line numbers") {
  TempDir dir;
  put(dir.path / "bad_A.txt", "1, 2\nnonsense\n");
  put(dir.path / "bad_graph_indicator.txt", "1\n1\n");
  try {
    load_tu_dataset(dir.str(), "bad");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
}

TEST_CASE("tu loader: an edge crossing graphs is rejected") {
  TempDir dir;
  put(dir.path / "cross_A.txt", "1, 3\n");
  put(dir.path / "cross_graph_indicator.txt", "1\n1\n2\n");
  CHECK_THROWS_AS(load_tu_dataset(dir.str(), "cross"), DataError);
}

TEST_CASE("tu loader: missing files") {
  TempDir dir;
  CHECK_THROWS_AS(load_tu_dataset(dir.str(), "absent"), DataError);
}

TEST_CASE("tu writer round-trips structure") {
  TempDir dir;
  Rng rng(3);
  std::vector<Graph> graphs;
  for (int k = 0; k < 8; ++k) graphs.push_back(erdos_renyi(9, 0.4, rng));
  write_tu_dataset(dir.str(), "rt", graphs);
  const auto loaded = load_tu_dataset(dir.str(), "rt");
  REQUIRE(loaded.size() == graphs.size());
  ClassRegistry reg(3);
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    CHECK(loaded[k].vertex_count() == graphs[k].vertex_count());
    CHECK(loaded[k].edge_count() == graphs[k].edge_count());
    const auto a = exact_census(graphs[k], reg, 3, 9);
    const auto b = exact_census(loaded[k], reg, 3, 9);
    CHECK(a.class_values == b.class_values);
  }
}

TEST_CASE("edge-list writer/loader round-trips, including edgeless graphs") {
  TempDir dir;
  Rng rng(5);
  std::vector<Graph> graphs;
  graphs.push_back(empty_graph(7));
  for (int k = 0; k < 6; ++k) graphs.push_back(erdos_renyi(11, 0.35, rng));
  // a graph with absent labels: the writer compacts them
  Graph holes(9);
  holes.add_edge(2, 6);
  holes.add_edge(6, 8);
  graphs.push_back(holes);

  const std::string path = (dir.path / "sample.txt").string();
  write_edgelist(path, graphs);
  const auto loaded = load_edgelist(path);
  REQUIRE(loaded.size() == graphs.size());
  ClassRegistry reg(3);
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    CHECK(loaded[k].vertex_count() == graphs[k].vertex_count());
    CHECK(loaded[k].edge_count() == graphs[k].edge_count());
    const int n = std::max(graphs[k].max_label(), 3);
    const auto a = exact_census(graphs[k], reg, 3, n);
    const auto b = exact_census(loaded[k], reg, 3, n);
    CHECK(a.class_values == b.class_values);
  }
}

TEST_CASE("edge-list loader rejects malformed input") {
  TempDir dir;
  const std::string path = (dir.path / "bad.txt").string();
  put(path, "# graph 0 nodes=3\n1 2\n0 1\n");
  CHECK_THROWS_AS(load_edgelist(path), DataError);  // labels are 1-indexed
  put(path, "1 2 3\n");
  CHECK_THROWS_AS(load_edgelist(path), DataError);
  put(path, "");
  CHECK_THROWS_AS(load_edgelist(path), DataError);
}

TEST_CASE("checkpoints round-trip in both formats") {
  TempDir dir;
  GeneratorConfig cfg;
  cfg.input_dim = 5;
  cfg.hidden1 = 6;
  cfg.hidden2 = 6;
  cfg.n = 7;
  cfg.d = 3;
  Checkpoint cp;
  cp.params = GeneratorParams::init(cfg, 11);
  cp.kernel = KernelSpec{KernelKind::scaled_rbf_reciprocal, 3, 1e-5, 1e-7};
  cp.train_order = 4;
  cp.star_orders = {6, 8};
  cp.stamp.config_hash = config_hash("test");
  cp.stamp.seed = 99;

  for (const bool binary : {false, true}) {
    const std::string path =
        (dir.path / (binary ? "cp.bin" : "cp.json")).string();
    save_checkpoint(path, cp, binary);
    const auto loaded = load_checkpoint(path);
    CHECK(loaded.params.theta == cp.params.theta);
    CHECK(loaded.params.cfg.n == cfg.n);
    CHECK(loaded.params.cfg.d == cfg.d);
    CHECK(loaded.params.cfg.train_q == cfg.train_q);
    CHECK(loaded.kernel.kind == cp.kernel.kind);
    CHECK(loaded.kernel.degree == cp.kernel.degree);
    CHECK(loaded.kernel.eps_phi == cp.kernel.eps_phi);
    CHECK(loaded.train_order == 4);
    CHECK(loaded.star_orders == cp.star_orders);
    CHECK(loaded.stamp.seed == 99);
  }
}

TEST_CASE("checkpoint loader rejects corrupted files") {
  TempDir dir;
  const std::string path = (dir.path / "junk.json").string();
  put(path, "{\"format\": \"something-else\"}");
  CHECK_THROWS_AS(load_checkpoint(path), DataError);
  put(path, "not json at all");
  CHECK_THROWS_AS(load_checkpoint(path), DataError);
  CHECK_THROWS_AS(load_checkpoint((dir.path / "missing.json").string()), DataError);
}

TEST_CASE("community checkpoints keep the logits") {
  TempDir dir;
  GeneratorConfig cfg;
  cfg.mode = GeneratorMode::community;
  cfg.input_dim = 4;
  cfg.hidden1 = 5;
  cfg.hidden2 = 5;
  cfg.n = 100;
  cfg.d = 3;
  cfg.t = 2;
  Checkpoint cp;
  cp.params = GeneratorParams::init(cfg, 13);
  cp.params.logits()[0] = 0.25;
  cp.params.logits()[1] = -0.75;
  cp.kernel = KernelSpec{KernelKind::scaled_rbf_reciprocal, 2, 1e-6, 1e-6};
  cp.train_order = 5;
  const std::string path = (dir.path / "community.json").string();
  save_checkpoint(path, cp, false);
  const auto loaded = load_checkpoint(path);
  CHECK(loaded.params.cfg.t == 2);
  CHECK(loaded.params.logits()[0] == 0.25);
  CHECK(loaded.params.logits()[1] == -0.75);
}

TEST_CASE("targets csv lists every statistic with its identity") {
  TempDir dir;
  ClassRegistry reg(3);
  MomentVector t;
  t.order = 3;
  t.node_stat = 1.0;
  t.class_values = {0.25, 0.5, 0.125, 0.125};
  t.partial_values = {2.5};
  const std::vector<PartialGraphlet> partials{PartialGraphlet::star(6)};
  RunStamp stamp;
  stamp.config_hash = "abc";
  stamp.seed = 7;
  const std::string path = (dir.path / "targets.csv").string();
  write_targets_csv(path, t, reg, partials, stamp);

  std::ifstream is(path);
  std::string line;
  std::getline(is, line);
  CHECK(line.find("config=abc") != std::string::npos);
  std::getline(is, line);
  CHECK(line == "stat,class_id,canonical_code_hex,value");
  int rows = 0;
  while (std::getline(is, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 6);  // node + 4 classes + 1 partial
}

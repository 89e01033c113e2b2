#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gmoe/eval.hpp"
#include "gmoe/sampler.hpp"

using namespace gmoe;

namespace {

// Order-3 class expectations of an Erdos-Renyi draw: each class with e edges
// and orbit size k has probability k q^e (1-q)^(3-e) per triple.
MomentVector er3_targets(const ClassRegistry& reg, double q) {
  MomentVector t;
  t.order = 3;
  t.node_stat = 1.0;
  t.class_values.assign(static_cast<std::size_t>(reg.class_count(3)), 0.0);
  for (const auto& cls : reg.classes(3)) {
    const int e = cls.canonical.edge_count();
    t.class_values[static_cast<std::size_t>(cls.class_id)] =
        static_cast<double>(cls.size) * std::pow(q, e) * std::pow(1.0 - q, 3 - e);
  }
  return t;
}

}  // namespace

TEST_CASE("graphlet difference of a sample against its own census is zero") {
  ClassRegistry reg(3);
  Rng rng(3);
  std::vector<Graph> sample;
  for (int k = 0; k < 20; ++k) sample.push_back(erdos_renyi(10, 0.4, rng));
  const CensusConfig cfg;
  const auto targets = dataset_targets(sample, reg, 3, 10, cfg, {}, 42);
  std::vector<double> per_stat;
  const auto [total, worst] =
      graphlet_difference(sample, targets, reg, 3, 10, cfg, {}, 42, &per_stat);
  CHECK(total == 0.0);
  CHECK(worst == 0.0);
  // decomposition: the total is exactly the sum of the per-stat differences
  double acc = 0.0;
  for (double d : per_stat) acc += d;
  CHECK(acc == total);
}

TEST_CASE("empty-graph sample against the empty target is exactly zero") {
  ClassRegistry reg(3);
  std::vector<Graph> sample(50, empty_graph(10));
  MomentVector targets;
  targets.order = 3;
  targets.node_stat = 1.0;
  targets.class_values.assign(static_cast<std::size_t>(reg.class_count(3)), 0.0);
  targets.class_values[static_cast<std::size_t>(reg.classify(EdgeCode{3, 0}))] = 1.0;
  const auto [total, worst] =
      graphlet_difference(sample, targets, reg, 3, 10, CensusConfig{}, {}, 1);
  CHECK(total <= 1e-12);
  CHECK(worst <= 1e-12);
  CHECK_THROWS_AS(
      graphlet_difference({}, targets, reg, 3, 10, CensusConfig{}, {}, 1),
      DataError);
}

TEST_CASE("shifted Erdos-Renyi difference matches the closed form") {
  ClassRegistry reg(3);
  Rng rng(7);
  std::vector<Graph> sample;
  for (int k = 0; k < 4000; ++k) sample.push_back(erdos_renyi(8, 0.5, rng));
  const auto targets = er3_targets(reg, 0.6);
  const auto half = er3_targets(reg, 0.5);
  double analytic = 0.0;
  for (int f = 0; f < targets.stat_count(); ++f)
    analytic += std::fabs(half.stat(f) - targets.stat(f));
  const auto [total, worst] =
      graphlet_difference(sample, targets, reg, 3, 8, CensusConfig{}, {}, 11);
  CHECK(total == doctest::Approx(analytic).epsilon(0.05));
  CHECK(worst <= total);
}

TEST_CASE("mmd of identical multisets vanishes") {
  ClassRegistry reg(4);
  Rng rng(13);
  std::vector<Graph> sample;
  for (int k = 0; k < 30; ++k) sample.push_back(erdos_renyi(12, 0.3, rng));
  const CensusConfig cfg;
  for (auto stat : {MmdStatistic::degree, MmdStatistic::clustering, MmdStatistic::orbit}) {
    const double v = mmd(sample, sample, stat, 1.0, reg, cfg, 5);
    CHECK(std::fabs(v) <= 1e-12);
  }
}

TEST_CASE("mmd separates degenerate constant samples at the two-point value") {
  ClassRegistry reg(4);
  const CensusConfig cfg;
  std::vector<Graph> empties(25, empty_graph(10));
  std::vector<Graph> fulls(25, complete_graph(10));
  const double sigma = 1.0;
  auto expect = [&](double d) { return 2.0 * (1.0 - std::exp(-d * d / (2.0 * sigma * sigma))); };
  // degree histograms are point masses at 0 and n-1: total variation 1
  CHECK(mmd(empties, fulls, MmdStatistic::degree, sigma, reg, cfg, 3) ==
        doctest::Approx(expect(1.0)).epsilon(1e-9));
  // clustering: triangle frequency 0 vs 1, Euclidean distance 1
  CHECK(mmd(empties, fulls, MmdStatistic::clustering, sigma, reg, cfg, 3) ==
        doctest::Approx(expect(1.0)).epsilon(1e-9));
  // order-4 frequencies are opposite unit vectors: distance sqrt(2)
  CHECK(mmd(empties, fulls, MmdStatistic::orbit, sigma, reg, cfg, 3) ==
        doctest::Approx(expect(std::sqrt(2.0))).epsilon(1e-9));
}

TEST_CASE("mmd is symmetric and nearly nonnegative") {
  ClassRegistry reg(4);
  const CensusConfig cfg;
  Rng rng(17);
  std::vector<Graph> a, b;
  for (int k = 0; k < 25; ++k) a.push_back(erdos_renyi(10, 0.3, rng));
  for (int k = 0; k < 20; ++k) b.push_back(erdos_renyi(10, 0.5, rng));
  for (auto stat : {MmdStatistic::degree, MmdStatistic::clustering, MmdStatistic::orbit}) {
    const double ab = mmd(a, b, stat, 1.0, reg, cfg, 7);
    const double ba = mmd(b, a, stat, 1.0, reg, cfg, 7);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
    CHECK(ab >= -1e-12);
  }
}

TEST_CASE("half-split mmd sits far below a degenerate comparison") {
  ClassRegistry reg(4);
  const CensusConfig cfg;
  Rng rng(19);
  const auto spec = SbmSpec::four_block(16);
  std::vector<Graph> data;
  for (int k = 0; k < 200; ++k) data.push_back(sample_sbm(spec, rng));
  const std::vector<Graph> half1(data.begin(), data.begin() + 100);
  const std::vector<Graph> half2(data.begin() + 100, data.end());
  std::vector<Graph> degenerate(100, complete_graph(16));
  for (auto stat : {MmdStatistic::degree, MmdStatistic::clustering, MmdStatistic::orbit}) {
    const double self_split = mmd(half1, half2, stat, 1.0, reg, cfg, 23);
    const double apart = mmd(data, degenerate, stat, 1.0, reg, cfg, 23);
    CHECK(apart >= 10.0 * std::max(self_split, 0.0));
  }
}

TEST_CASE("probe without distributional signal hovers at chance") {
  ClassRegistry reg(4);
  Rng rng(29);
  std::vector<Graph> a, b;
  for (int k = 0; k < 180; ++k) a.push_back(erdos_renyi(12, 0.35, rng));
  for (int k = 0; k < 180; ++k) b.push_back(erdos_renyi(12, 0.35, rng));
  ProbeOptions opt;
  opt.order = 3;
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  const double acc = discriminator_probe_median(a, b, reg, opt, seeds);
  CHECK(acc >= 0.45);
  CHECK(acc <= 0.55);
}

TEST_CASE("probe separates empty from complete graphs perfectly") {
  ClassRegistry reg(4);
  std::vector<Graph> empties(40, empty_graph(10));
  std::vector<Graph> fulls(40, complete_graph(10));
  ProbeOptions opt;
  opt.order = 3;
  CHECK(discriminator_probe(empties, fulls, reg, opt, 11) == doctest::Approx(1.0));
}

TEST_CASE("probe calibration: same-distribution classes stay near chance across seeds") {
  ClassRegistry reg(4);
  Rng rng(31);
  const auto spec = SbmSpec::four_block(12);
  std::vector<Graph> a, b;
  for (int k = 0; k < 180; ++k) a.push_back(sample_sbm(spec, rng));
  for (int k = 0; k < 180; ++k) b.push_back(sample_sbm(spec, rng));
  ProbeOptions opt;
  opt.order = 3;
  int in_band = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const double acc = discriminator_probe(a, b, reg, opt, seed);
    if (acc >= 0.4 && acc <= 0.6) ++in_band;
  }
  CHECK(in_band >= 9);
}

TEST_CASE("probe input validation") {
  ClassRegistry reg(4);
  std::vector<Graph> few(5, empty_graph(6));
  std::vector<Graph> enough(12, empty_graph(6));
  ProbeOptions opt;
  opt.order = 3;
  CHECK_THROWS_AS(discriminator_probe(few, enough, reg, opt, 1), DataError);
}

TEST_CASE("degree histogram averages per graph") {
  std::vector<Graph> sample{complete_graph(4), empty_graph(4)};
  const auto hist = degree_histogram(sample, 4);
  CHECK(hist[0] == doctest::Approx(2.0));  // four degree-0 nodes over two graphs
  CHECK(hist[3] == doctest::Approx(2.0));  // four degree-3 nodes over two graphs
  CHECK(hist[1] == 0.0);
}

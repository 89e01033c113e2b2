#include "gmoe/eval.hpp"

#include <algorithm>
#include <cmath>

#include "gmoe/generator.hpp"
#include "gmoe/trainer.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gmoe {
namespace {

double tv_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
  return 0.5 * s;
}

double euclid(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

// Per-graph feature rows for one statistic. Frequencies are intrinsic: the
// census is normalized by the graph's own node count.
std::vector<std::vector<double>> features(std::span<const Graph> sample,
                                          MmdStatistic stat, int bins,
                                          const ClassRegistry& reg,
                                          const CensusConfig& cfg,
                                          std::uint64_t seed) {
  const std::int64_t count = static_cast<std::int64_t>(sample.size());
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t k = 0; k < count; ++k) {
    const Graph& g = sample[static_cast<std::size_t>(k)];
    auto& row = rows[static_cast<std::size_t>(k)];
    switch (stat) {
      case MmdStatistic::degree: {
        row.assign(static_cast<std::size_t>(bins), 0.0);
        const auto deg = g.degrees();
        int present = 0;
        for (int v = 0; v < g.max_label(); ++v)
          if (g.has_vertex(v)) {
            ++present;
            row[static_cast<std::size_t>(std::min<std::int64_t>(deg[static_cast<std::size_t>(v)], bins - 1))] += 1.0;
          }
        if (present > 0)
          for (auto& x : row) x /= present;
        break;
      }
      case MmdStatistic::clustering: {
        const int nk = std::max(g.vertex_count(), 3);
        const auto mv =
            graph_census(g, reg, 3, nk, cfg, {}, derive_seed(seed, static_cast<std::uint64_t>(k)));
        // Triangle class: the order-3 class with all three edges.
        const int tri = reg.classify(EdgeCode{3, 0b111});
        row.assign(1, mv.class_values[static_cast<std::size_t>(tri)]);
        break;
      }
      case MmdStatistic::orbit: {
        const int nk = std::max(g.vertex_count(), 4);
        const auto mv =
            graph_census(g, reg, 4, nk, cfg, {}, derive_seed(seed, static_cast<std::uint64_t>(k)));
        row = mv.class_values;
        break;
      }
    }
  }
  return rows;
}

double gaussian_mmd(const std::vector<std::vector<double>>& fa,
                    const std::vector<std::vector<double>>& fb, bool tv,
                    double sigma) {
  auto kernel_mean = [&](const std::vector<std::vector<double>>& x,
                         const std::vector<std::vector<double>>& y) {
    double acc = 0.0;
    for (const auto& xi : x)
      for (const auto& yj : y) {
        const double d = tv ? tv_distance(xi, yj) : euclid(xi, yj);
        acc += std::exp(-d * d / (2.0 * sigma * sigma));
      }
    return acc / (static_cast<double>(x.size()) * static_cast<double>(y.size()));
  };
  return kernel_mean(fa, fa) + kernel_mean(fb, fb) - 2.0 * kernel_mean(fa, fb);
}

}  // namespace

std::pair<double, double> graphlet_difference(
    std::span<const Graph> gen, const MomentVector& targets,
    const ClassRegistry& reg, int p, int n, const CensusConfig& cfg,
    std::span<const PartialGraphlet> partials, std::uint64_t seed,
    std::vector<double>* per_stat) {
  if (gen.empty()) throw DataError("empty generated sample");
  const MomentVector mv = dataset_targets(gen, reg, p, n, cfg, partials, seed);
  if (mv.stat_count() != targets.stat_count())
    throw ConfigError("generated census does not match target layout");
  double total = 0.0, worst = 0.0;
  if (per_stat) per_stat->assign(static_cast<std::size_t>(mv.stat_count()), 0.0);
  for (int f = 0; f < mv.stat_count(); ++f) {
    const double d = std::fabs(mv.stat(f) - targets.stat(f));
    if (per_stat) (*per_stat)[static_cast<std::size_t>(f)] = d;
    total += d;
    worst = std::max(worst, d);
  }
  return {total, worst};
}

double mmd(std::span<const Graph> a, std::span<const Graph> b,
           MmdStatistic stat, double sigma, const ClassRegistry& reg,
           const CensusConfig& cfg, std::uint64_t seed) {
  if (a.empty() || b.empty()) throw DataError("mmd requires nonempty samples");
  int bins = 1;
  if (stat == MmdStatistic::degree) {
    std::int64_t max_deg = 0;
    for (const auto& g : a)
      for (auto d : g.degrees()) max_deg = std::max(max_deg, d);
    for (const auto& g : b)
      for (auto d : g.degrees()) max_deg = std::max(max_deg, d);
    bins = static_cast<int>(max_deg) + 1;
  }
  const auto fa = features(a, stat, bins, reg, cfg, derive_seed(seed, "a"));
  const auto fb = features(b, stat, bins, reg, cfg, derive_seed(seed, "b"));
  return gaussian_mmd(fa, fb, stat == MmdStatistic::degree, sigma);
}

double discriminator_probe(std::span<const Graph> real_graphs,
                           std::span<const Graph> gen_graphs,
                           const ClassRegistry& reg, const ProbeOptions& opt,
                           std::uint64_t seed) {
  if (real_graphs.size() < 10 || gen_graphs.size() < 10)
    throw DataError("probe needs at least 10 graphs per class");

  int n = 0;
  for (const auto& g : real_graphs) n = std::max(n, g.vertex_count());
  for (const auto& g : gen_graphs) n = std::max(n, g.vertex_count());
  n = std::max(n, opt.order);

  CensusConfig ccfg{opt.exact_threshold, opt.census_samples};
  const std::int64_t total =
      static_cast<std::int64_t>(real_graphs.size() + gen_graphs.size());
  std::vector<std::vector<double>> feat(static_cast<std::size_t>(total));
  std::vector<double> label(static_cast<std::size_t>(total), 0.0);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t k = 0; k < total; ++k) {
    const bool is_real = k < static_cast<std::int64_t>(real_graphs.size());
    const Graph& g = is_real
                         ? real_graphs[static_cast<std::size_t>(k)]
                         : gen_graphs[static_cast<std::size_t>(k - static_cast<std::int64_t>(real_graphs.size()))];
    const auto mv = graph_census(g, reg, opt.order, n, ccfg, {},
                                 derive_seed(seed, "feat", static_cast<std::uint64_t>(k)));
    auto& row = feat[static_cast<std::size_t>(k)];
    row.reserve(static_cast<std::size_t>(mv.stat_count()));
    for (int f = 0; f < mv.stat_count(); ++f) row.push_back(mv.stat(f));
    label[static_cast<std::size_t>(k)] = is_real ? 1.0 : 0.0;
  }

  // Split each class train/test, then standardize on the training rows.
  Rng rng(derive_seed(seed, "probe"));
  std::vector<int> train_idx, test_idx;
  auto split_class = [&](std::int64_t lo, std::int64_t hi) {
    std::vector<int> idx;
    for (std::int64_t k = lo; k < hi; ++k) idx.push_back(static_cast<int>(k));
    for (std::size_t i = idx.size(); i > 1; --i)
      std::swap(idx[i - 1], idx[rng.below(i)]);
    const std::size_t ntrain =
        static_cast<std::size_t>(opt.train_frac * static_cast<double>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i)
      (i < ntrain ? train_idx : test_idx).push_back(idx[i]);
  };
  split_class(0, static_cast<std::int64_t>(real_graphs.size()));
  split_class(static_cast<std::int64_t>(real_graphs.size()), total);
  if (train_idx.empty() || test_idx.empty())
    throw DataError("probe split produced an empty set");

  const std::size_t dim = feat.front().size();
  std::vector<double> mean(dim, 0.0), sd(dim, 0.0);
  for (int k : train_idx)
    for (std::size_t c = 0; c < dim; ++c) mean[c] += feat[static_cast<std::size_t>(k)][c];
  for (auto& v : mean) v /= static_cast<double>(train_idx.size());
  for (int k : train_idx)
    for (std::size_t c = 0; c < dim; ++c) {
      const double d = feat[static_cast<std::size_t>(k)][c] - mean[c];
      sd[c] += d * d;
    }
  for (auto& v : sd) v = std::sqrt(v / static_cast<double>(train_idx.size()));
  for (auto& row : feat)
    for (std::size_t c = 0; c < dim; ++c)
      row[c] = sd[c] > 1e-12 ? (row[c] - mean[c]) / sd[c] : 0.0;

  const MlpShape shape{static_cast<int>(dim), opt.hidden, opt.hidden, 1};
  std::vector<double> theta(static_cast<std::size_t>(shape.param_count()), 0.0);
  auto fill = [&](int off, int rows, int cols) {
    const double a = std::sqrt(6.0 / (rows + cols));
    for (int i = 0; i < rows * cols; ++i)
      theta[static_cast<std::size_t>(off + i)] = a * (2.0 * rng.uniform01() - 1.0);
  };
  fill(shape.w1(), shape.h1, shape.in);
  fill(shape.w2(), shape.h2, shape.h1);
  fill(shape.w3(), shape.out, shape.h2);

  std::vector<double> grad(theta.size());
  MlpCache cache;
  std::vector<int> order(train_idx);
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.below(i)]);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(opt.batch)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(opt.batch));
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i = start; i < stop; ++i) {
        const int k = order[i];
        mlp_forward(shape, theta, feat[static_cast<std::size_t>(k)], cache);
        const double pred = 1.0 / (1.0 + std::exp(-cache.raw[0]));
        const double d_raw = pred - label[static_cast<std::size_t>(k)];
        mlp_backward(shape, theta, cache, std::span<const double>(&d_raw, 1), grad);
      }
      const double step = opt.learning_rate / static_cast<double>(stop - start);
      for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= step * grad[i];
    }
  }

  int correct = 0;
  for (int k : test_idx) {
    mlp_forward(shape, theta, feat[static_cast<std::size_t>(k)], cache);
    const bool says_real = cache.raw[0] > 0.0;
    if (says_real == (label[static_cast<std::size_t>(k)] > 0.5)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test_idx.size());
}

double discriminator_probe_median(std::span<const Graph> real_graphs,
                                  std::span<const Graph> gen_graphs,
                                  const ClassRegistry& reg,
                                  const ProbeOptions& opt,
                                  std::span<const std::uint64_t> seeds) {
  std::vector<double> acc;
  acc.reserve(seeds.size());
  for (auto s : seeds)
    acc.push_back(discriminator_probe(real_graphs, gen_graphs, reg, opt, s));
  std::sort(acc.begin(), acc.end());
  const std::size_t n = acc.size();
  return n % 2 == 1 ? acc[n / 2] : 0.5 * (acc[n / 2 - 1] + acc[n / 2]);
}

std::vector<double> degree_histogram(std::span<const Graph> sample, int bins) {
  std::vector<double> hist(static_cast<std::size_t>(bins), 0.0);
  for (const auto& g : sample) {
    const auto deg = g.degrees();
    for (int v = 0; v < g.max_label(); ++v)
      if (g.has_vertex(v))
        hist[static_cast<std::size_t>(std::min<std::int64_t>(deg[static_cast<std::size_t>(v)], bins - 1))] += 1.0;
  }
  if (!sample.empty())
    for (auto& v : hist) v /= static_cast<double>(sample.size());
  return hist;
}

}  // namespace gmoe

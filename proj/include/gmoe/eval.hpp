#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gmoe/census.hpp"
#include "gmoe/graph.hpp"
#include "gmoe/registry.hpp"

namespace gmoe {

struct EvalReport {
  double total_difference = 0.0;
  double max_difference = 0.0;
  std::vector<double> per_stat_difference;
  double mmd_degree = -1.0;      // negative when not computed
  double mmd_clustering = -1.0;
  double mmd_orbit = -1.0;
  double classifier_rate = -1.0;
  int gen_sample_size = 0;
  int real_sample_size = 0;
  std::uint64_t seed = 0;
};

// Mean census of the generated sample against the target vector; returns
// (total absolute difference, largest single difference) over all statistics.
std::pair<double, double> graphlet_difference(
    std::span<const Graph> gen, const MomentVector& targets,
    const ClassRegistry& reg, int p, int n, const CensusConfig& cfg,
    std::span<const PartialGraphlet> partials, std::uint64_t seed,
    std::vector<double>* per_stat = nullptr);

enum class MmdStatistic { degree, clustering, orbit };

// Squared maximum mean discrepancy between per-graph features under a
// Gaussian kernel: normalized degree histograms compared by total variation,
// the triangle frequency and the order-4 class frequency vector by Euclidean
// distance. Graph-intrinsic frequencies (each graph normalized by its own
// subset count).
double mmd(std::span<const Graph> a, std::span<const Graph> b,
           MmdStatistic stat, double sigma, const ClassRegistry& reg,
           const CensusConfig& cfg, std::uint64_t seed);

struct ProbeOptions {
  int order = 5;                 // census order of the features
  double train_frac = 0.7;
  int hidden = 32;
  int epochs = 200;
  int batch = 16;
  double learning_rate = 0.05;
  std::int64_t census_samples = 20000;
  std::int64_t exact_threshold = 200000;
};

// Held-out accuracy of a two-hidden-layer feed-forward classifier on census
// features; 0.5 means the samples are indistinguishable.
double discriminator_probe(std::span<const Graph> real_graphs,
                           std::span<const Graph> gen_graphs,
                           const ClassRegistry& reg, const ProbeOptions& opt,
                           std::uint64_t seed);

// Median accuracy across seeds.
double discriminator_probe_median(std::span<const Graph> real_graphs,
                                  std::span<const Graph> gen_graphs,
                                  const ClassRegistry& reg,
                                  const ProbeOptions& opt,
                                  std::span<const std::uint64_t> seeds);

// Degree histogram of a sample (bin = degree, value = mean count per graph).
std::vector<double> degree_histogram(std::span<const Graph> sample, int bins);

}  // namespace gmoe

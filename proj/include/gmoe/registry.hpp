#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "gmoe/graph.hpp"

namespace gmoe {

struct GraphletClass {
  int order = 0;
  int class_id = 0;
  EdgeCode canonical;      // minimum code over all vertex permutations
  std::uint64_t size = 0;  // number of distinct adjacency patterns in the class
};

std::uint64_t factorial(int n);

// Number of permutations fixing the pattern, by backtracking restricted to
// degree-signature blocks.
std::uint64_t automorphism_count(EdgeCode code);

// Minimum code over all vertex permutations, searched within blocks of equal
// (degree, sorted neighbor degrees) signature.
EdgeCode canonical_min_code(EdgeCode code);

// Isomorphism classes of graphs on p nodes for p = 2..max_order. Orders up to
// max_dense_order get a full code -> class table built eagerly by orbit
// enumeration; larger orders are classified on demand through canonical
// forms, with ids assigned in discovery order and cached under a lock.
class ClassRegistry {
 public:
  static constexpr int kMaxSupportedOrder = kMaxGraphletOrder;

  explicit ClassRegistry(int max_order, int max_dense_order = 6);

  int max_order() const { return max_order_; }
  int max_dense_order() const { return max_dense_order_; }
  bool is_dense(int p) const { return p >= 2 && p <= max_dense_order_; }

  // Dense orders only.
  int class_count(int p) const;
  const std::vector<GraphletClass>& classes(int p) const;

  int classify(EdgeCode code) const;
  GraphletClass class_info(int p, int class_id) const;
  EdgeCode canonical_code(EdgeCode code) const;

  void dump(const std::string& path) const;
  static ClassRegistry load(const std::string& path);

  ClassRegistry(const ClassRegistry&) = delete;
  ClassRegistry& operator=(const ClassRegistry&) = delete;
  ClassRegistry(ClassRegistry&&) = default;
  ClassRegistry& operator=(ClassRegistry&&) = default;

 private:
  ClassRegistry() = default;
  void build_dense(int p);
  void check_order(int p) const;

  int max_order_ = 0;
  int max_dense_order_ = 0;
  // Indexed by order; empty below 2 and above max_dense_order.
  std::array<std::vector<std::uint16_t>, kMaxSupportedOrder + 1> table_;
  std::array<std::vector<GraphletClass>, kMaxSupportedOrder + 1> classes_;

  struct LazyState {
    std::mutex mutex;
    std::array<std::unordered_map<std::uint32_t, int>, kMaxSupportedOrder + 1> ids;
    std::array<std::vector<GraphletClass>, kMaxSupportedOrder + 1> classes;
  };
  std::unique_ptr<LazyState> lazy_ = std::make_unique<LazyState>();
};

}  // namespace gmoe

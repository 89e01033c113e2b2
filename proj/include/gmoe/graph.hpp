#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <span>
#include <vector>

#include "gmoe/error.hpp"

namespace gmoe {

constexpr int kMaxGraphletOrder = 8;

constexpr int pair_count(int p) { return p * (p - 1) / 2; }

// Bit position of pair (i, j), 0 <= i < j < p, in row-major upper-triangle
// order: (0,1), (0,2), ..., (0,p-1), (1,2), ...
constexpr int pair_index(int p, int i, int j) {
  return i * (2 * p - i - 1) / 2 + (j - i - 1);
}

// Adjacency pattern of an order-p graph packed into the low pair_count(p)
// bits of a word, upper triangle row-major. The interchange format for
// graphlet identities: bit k of `bits` is pair k in the order above.
struct EdgeCode {
  int order = 0;
  std::uint32_t bits = 0;

  bool edge(int i, int j) const {
    if (i == j) return false;
    if (i > j) std::swap(i, j);
    return (bits >> pair_index(order, i, j)) & 1u;
  }
  void set_edge(int i, int j) {
    if (i > j) std::swap(i, j);
    bits |= 1u << pair_index(order, i, j);
  }
  int edge_count() const { return std::popcount(bits); }
  auto operator<=>(const EdgeCode&) const = default;
};

// Relabel the pattern: vertex i becomes perm[i].
EdgeCode permute_code(EdgeCode code, std::span<const int> perm);

// A graph on labels [0, n) with an explicit vertex subset. Absent labels keep
// all-zero adjacency rows. Edges are stored as a packed upper-triangle bitset.
class Graph {
 public:
  Graph() = default;
  explicit Graph(int max_label);

  int max_label() const { return n_; }
  bool has_vertex(int v) const {
    return (present_[static_cast<std::size_t>(v) >> 6] >> (v & 63)) & 1u;
  }
  void add_vertex(int v);
  bool has_edge(int u, int v) const {
    if (u == v) return false;
    if (u > v) std::swap(u, v);
    const std::size_t b = tri_index(u, v);
    return (adj_[b >> 6] >> (b & 63)) & 1u;
  }
  void add_edge(int u, int v);  // inserts both endpoints into the vertex set

  int vertex_count() const;
  std::int64_t edge_count() const;
  std::vector<int> present_vertices() const;
  std::vector<std::int64_t> degrees() const;  // indexed by label

  // f(i, j) for every edge, i < j, in row-major order.
  template <typename F>
  void for_each_edge(F&& f) const {
    if (n_ < 2) return;
    int row = 0;
    std::size_t row_base = 0, next_base = static_cast<std::size_t>(n_ - 1);
    const std::size_t total = tri_size(n_);
    for (std::size_t w = 0; w < adj_.size(); ++w) {
      std::uint64_t word = adj_[w];
      while (word != 0) {
        const std::size_t pos = (w << 6) + std::countr_zero(word);
        word &= word - 1;
        if (pos >= total) return;
        while (pos >= next_base) {
          row_base = next_base;
          ++row;
          next_base += static_cast<std::size_t>(n_ - 1 - row);
        }
        f(row, row + 1 + static_cast<int>(pos - row_base));
      }
    }
  }

  bool operator==(const Graph&) const = default;

 private:
  static std::size_t tri_size(int n) {
    return static_cast<std::size_t>(n) * (n - 1) / 2;
  }
  std::size_t tri_index(int i, int j) const {  // i < j
    return static_cast<std::size_t>(i) * (2 * n_ - i - 1) / 2 + (j - i - 1);
  }

  int n_ = 0;
  std::vector<std::uint64_t> present_;
  std::vector<std::uint64_t> adj_;
};

// The relabelled graph: vertex i maps to perm[i]. perm must be a bijection
// on [0, n).
Graph relabel(const Graph& g, std::span<const int> perm);

// Adjacency pattern induced by the ordered subset w: bit (a, b) of the result
// is the edge indicator between w[a] and w[b]. Every element of w must be
// present in g.
EdgeCode induced_code(const Graph& g, std::span<const int> w);

}  // namespace gmoe

#include "gmoe/graph.hpp"

#include <string>

namespace gmoe {

EdgeCode permute_code(EdgeCode code, std::span<const int> perm) {
  EdgeCode out{code.order, 0};
  for (int i = 0; i < code.order; ++i)
    for (int j = i + 1; j < code.order; ++j)
      if (code.edge(i, j)) out.set_edge(perm[i], perm[j]);
  return out;
}

Graph::Graph(int max_label) : n_(max_label) {
  if (max_label < 1) throw ConfigError("graph max_label must be >= 1");
  present_.assign((static_cast<std::size_t>(n_) + 63) / 64, 0);
  adj_.assign((tri_size(n_) + 63) / 64, 0);
}

void Graph::add_vertex(int v) {
  if (v < 0 || v >= n_)
    throw ConfigError("vertex label " + std::to_string(v) + " out of range");
  present_[static_cast<std::size_t>(v) >> 6] |= 1ull << (v & 63);
}

void Graph::add_edge(int u, int v) {
  if (u == v) throw ConfigError("self-loops are not representable");
  add_vertex(u);
  add_vertex(v);
  if (u > v) std::swap(u, v);
  const std::size_t b = tri_index(u, v);
  adj_[b >> 6] |= 1ull << (b & 63);
}

int Graph::vertex_count() const {
  int c = 0;
  for (auto w : present_) c += std::popcount(w);
  return c;
}

std::int64_t Graph::edge_count() const {
  std::int64_t c = 0;
  for (auto w : adj_) c += std::popcount(w);
  return c;
}

std::vector<int> Graph::present_vertices() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(vertex_count()));
  for (std::size_t w = 0; w < present_.size(); ++w) {
    std::uint64_t word = present_[w];
    while (word != 0) {
      out.push_back(static_cast<int>((w << 6) + std::countr_zero(word)));
      word &= word - 1;
    }
  }
  return out;
}

std::vector<std::int64_t> Graph::degrees() const {
  std::vector<std::int64_t> deg(static_cast<std::size_t>(n_), 0);
  for_each_edge([&](int i, int j) {
    ++deg[static_cast<std::size_t>(i)];
    ++deg[static_cast<std::size_t>(j)];
  });
  return deg;
}

Graph relabel(const Graph& g, std::span<const int> perm) {
  const int n = g.max_label();
  if (static_cast<int>(perm.size()) != n)
    throw ConfigError("permutation size does not match graph max_label");
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (int v : perm) {
    if (v < 0 || v >= n || seen[static_cast<std::size_t>(v)])
      throw ConfigError("relabel requires a bijection on [0, n)");
    seen[static_cast<std::size_t>(v)] = 1;
  }
  Graph out(n);
  for (int v : g.present_vertices()) out.add_vertex(perm[v]);
  g.for_each_edge([&](int i, int j) { out.add_edge(perm[i], perm[j]); });
  return out;
}

EdgeCode induced_code(const Graph& g, std::span<const int> w) {
  const int p = static_cast<int>(w.size());
  if (p < 1 || p > kMaxGraphletOrder)
    throw ConfigError("induced subset order " + std::to_string(p) +
                      " not supported");
  for (int v : w)
    if (v < 0 || v >= g.max_label() || !g.has_vertex(v))
      throw DataError("missing vertex " + std::to_string(v) +
                      " in induced subset");
  EdgeCode code{p, 0};
  for (int a = 0; a < p; ++a)
    for (int b = a + 1; b < p; ++b)
      if (g.has_edge(w[a], w[b])) code.set_edge(a, b);
  return code;
}

}  // namespace gmoe

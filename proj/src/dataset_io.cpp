#include "gmoe/dataset_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace gmoe {
namespace {

// Parse "a, b" / "a b" / "a,b".
void parse_pair(const std::string& line, long& a, long& b) {
  std::string cleaned = line;
  std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
  std::istringstream ss(cleaned);
  if (!(ss >> a) || !(ss >> b)) throw DataError("expected two integers");
  std::string rest;
  if (ss >> rest) throw DataError("trailing tokens");
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

std::vector<Graph> load_tu_dataset(const std::string& dir,
                                   const std::string& name) {
  const std::string ind_path = dir + "/" + name + "_graph_indicator.txt";
  const std::string adj_path = dir + "/" + name + "_A.txt";

  std::ifstream ind(ind_path);
  if (!ind) throw DataError("cannot open " + ind_path);
  std::vector<long> node_graph;  // node -> graph id (1-indexed)
  std::string line;
  long line_no = 0;
  long max_graph = 0;
  while (std::getline(ind, line)) {
    ++line_no;
    if (blank(line)) continue;
    long gid = 0;
    try {
      std::size_t pos = 0;
      gid = std::stol(line, &pos);
      while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
      if (pos != line.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw DataError(ind_path + ":" + std::to_string(line_no) + ": bad graph id");
    }
    if (gid < 1) throw DataError(ind_path + ":" + std::to_string(line_no) + ": graph ids are 1-indexed");
    node_graph.push_back(gid);
    max_graph = std::max(max_graph, gid);
  }
  if (node_graph.empty()) throw DataError(ind_path + ": no nodes");

  // Per-graph size and local index of each global node.
  std::vector<int> sizes(static_cast<std::size_t>(max_graph), 0);
  std::vector<int> local(node_graph.size(), 0);
  for (std::size_t v = 0; v < node_graph.size(); ++v) {
    auto& s = sizes[static_cast<std::size_t>(node_graph[v] - 1)];
    local[v] = s++;
  }
  std::vector<Graph> graphs;
  graphs.reserve(static_cast<std::size_t>(max_graph));
  for (long g = 0; g < max_graph; ++g) {
    const int n = std::max(sizes[static_cast<std::size_t>(g)], 1);
    Graph gr(n);
    for (int v = 0; v < sizes[static_cast<std::size_t>(g)]; ++v) gr.add_vertex(v);
    graphs.push_back(std::move(gr));
  }

  std::ifstream adj(adj_path);
  if (!adj) throw DataError("cannot open " + adj_path);
  line_no = 0;
  while (std::getline(adj, line)) {
    ++line_no;
    if (blank(line)) continue;
    long a = 0, b = 0;
    try {
      parse_pair(line, a, b);
    } catch (const DataError& e) {
      throw DataError(adj_path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (a < 1 || b < 1 || a > static_cast<long>(node_graph.size()) ||
        b > static_cast<long>(node_graph.size()))
      throw DataError(adj_path + ":" + std::to_string(line_no) + ": node id out of range");
    if (a == b) continue;  // self-loops dropped
    const long ga = node_graph[static_cast<std::size_t>(a - 1)];
    const long gb = node_graph[static_cast<std::size_t>(b - 1)];
    if (ga != gb)
      throw DataError(adj_path + ":" + std::to_string(line_no) +
                      ": edge crosses graphs " + std::to_string(ga) + " and " +
                      std::to_string(gb));
    graphs[static_cast<std::size_t>(ga - 1)].add_edge(local[static_cast<std::size_t>(a - 1)],
                                                      local[static_cast<std::size_t>(b - 1)]);
  }
  return graphs;
}

void write_tu_dataset(const std::string& dir, const std::string& name,
                      const std::vector<Graph>& graphs) {
  std::ofstream adj(dir + "/" + name + "_A.txt");
  std::ofstream ind(dir + "/" + name + "_graph_indicator.txt");
  std::ofstream lab(dir + "/" + name + "_graph_labels.txt");
  if (!adj || !ind || !lab) throw DataError("cannot write dataset files in " + dir);
  long offset = 0;
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    const auto verts = graphs[k].present_vertices();
    std::vector<long> global(static_cast<std::size_t>(graphs[k].max_label()), 0);
    for (std::size_t i = 0; i < verts.size(); ++i) {
      global[static_cast<std::size_t>(verts[i])] = offset + static_cast<long>(i) + 1;
      ind << (k + 1) << "\n";
    }
    graphs[k].for_each_edge([&](int u, int v) {
      adj << global[static_cast<std::size_t>(u)] << ", " << global[static_cast<std::size_t>(v)] << "\n";
      adj << global[static_cast<std::size_t>(v)] << ", " << global[static_cast<std::size_t>(u)] << "\n";
    });
    lab << 1 << "\n";
    offset += static_cast<long>(verts.size());
  }
}

void write_edgelist(const std::string& path, const std::vector<Graph>& graphs) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open " + path + " for writing");
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    const auto verts = graphs[k].present_vertices();
    std::vector<long> rank(static_cast<std::size_t>(graphs[k].max_label()), 0);
    for (std::size_t i = 0; i < verts.size(); ++i)
      rank[static_cast<std::size_t>(verts[i])] = static_cast<long>(i) + 1;
    if (k > 0) os << "\n";
    os << "# graph " << k << " nodes=" << verts.size() << "\n";
    graphs[k].for_each_edge([&](int u, int v) {
      os << rank[static_cast<std::size_t>(u)] << " " << rank[static_cast<std::size_t>(v)] << "\n";
    });
  }
  if (!os) throw DataError("failed to write " + path);
}

std::vector<Graph> load_edgelist(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open " + path);
  std::vector<Graph> graphs;
  std::vector<std::pair<long, long>> edges;
  long declared_nodes = -1;
  bool in_block = false;

  auto flush = [&] {
    if (!in_block) return;
    long max_label = declared_nodes;
    for (const auto& [a, b] : edges) max_label = std::max({max_label, a, b});
    Graph g(static_cast<int>(std::max(max_label, 1L)));
    for (long v = 0; v < std::max(declared_nodes, 0L); ++v)
      g.add_vertex(static_cast<int>(v));
    for (const auto& [a, b] : edges)
      g.add_edge(static_cast<int>(a - 1), static_cast<int>(b - 1));
    graphs.push_back(std::move(g));
    edges.clear();
    declared_nodes = -1;
    in_block = false;
  };

  std::string line;
  long line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (blank(line)) {
      flush();
      continue;
    }
    if (line[0] == '#') {
      const auto pos = line.find("nodes=");
      if (pos != std::string::npos) {
        if (in_block) flush();
        in_block = true;
        try {
          declared_nodes = std::stol(line.substr(pos + 6));
        } catch (const std::exception&) {
          throw DataError(path + ":" + std::to_string(line_no) + ": bad node count");
        }
      }
      continue;
    }
    long a = 0, b = 0;
    try {
      parse_pair(line, a, b);
    } catch (const DataError& e) {
      throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (a < 1 || b < 1)
      throw DataError(path + ":" + std::to_string(line_no) + ": labels are 1-indexed");
    in_block = true;
    edges.emplace_back(a, b);
  }
  flush();
  if (graphs.empty()) throw DataError(path + ": no graphs");
  return graphs;
}

int max_vertex_count(const std::vector<Graph>& graphs) {
  int n = 1;
  for (const auto& g : graphs) n = std::max(n, g.vertex_count());
  return n;
}

}  // namespace gmoe

#pragma once

#include <string>
#include <vector>

#include "gmoe/graph.hpp"

namespace gmoe {

// Benchmark-collection layout: <name>_A.txt holds global 1-indexed "i, j"
// edge pairs, <name>_graph_indicator.txt maps each node to its graph id.
// Node labels are compacted per graph; reciprocal and duplicate edges merge.
std::vector<Graph> load_tu_dataset(const std::string& dir,
                                   const std::string& name);

void write_tu_dataset(const std::string& dir, const std::string& name,
                      const std::vector<Graph>& graphs);

// Edge-list exchange format: one "u v" pair per line (1-indexed), graphs
// separated by blank lines, each block preceded by "# graph <k> nodes=<n>".
void write_edgelist(const std::string& path, const std::vector<Graph>& graphs);
std::vector<Graph> load_edgelist(const std::string& path);

int max_vertex_count(const std::vector<Graph>& graphs);

}  // namespace gmoe

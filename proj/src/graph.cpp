#include "stinla/graph.hpp"

#include <algorithm>

namespace stinla {

void GraphSpec::validate() const {
  if (n_nodes < 1) throw InvalidGraph("graph must have at least one node");
  if (Index(adjacency.size()) != n_nodes) throw InvalidGraph("adjacency list size does not match n_nodes");
  for (Index i = 0; i < n_nodes; ++i) {
    for (Index j : adjacency[i]) {
      if (j < 0 || j >= n_nodes) throw InvalidGraph("neighbor index out of range at node " + std::to_string(i + 1));
      if (j == i) throw InvalidGraph("self-loop at node " + std::to_string(i + 1));
      const auto& back = adjacency[j];
      if (!std::binary_search(back.begin(), back.end(), i))
        throw InvalidGraph("asymmetric adjacency between nodes " + std::to_string(i + 1) + " and " +
                           std::to_string(j + 1));
    }
    if (!std::is_sorted(adjacency[i].begin(), adjacency[i].end()))
      throw InvalidGraph("neighbor list not sorted at node " + std::to_string(i + 1));
    if (std::adjacent_find(adjacency[i].begin(), adjacency[i].end()) != adjacency[i].end())
      throw InvalidGraph("duplicate neighbor at node " + std::to_string(i + 1));
  }
}

std::vector<std::vector<Index>> GraphSpec::connected_components() const {
  std::vector<int> label(n_nodes, -1);
  std::vector<std::vector<Index>> components;
  std::vector<Index> stack;
  for (Index start = 0; start < n_nodes; ++start) {
    if (label[start] >= 0) continue;
    const int id = int(components.size());
    components.emplace_back();
    stack.push_back(start);
    label[start] = id;
    while (!stack.empty()) {
      const Index node = stack.back();
      stack.pop_back();
      components[id].push_back(node);
      for (Index nb : adjacency[node]) {
        if (label[nb] < 0) {
          label[nb] = id;
          stack.push_back(nb);
        }
      }
    }
    std::sort(components[id].begin(), components[id].end());
  }
  return components;
}

GraphSpec path_graph(Index n_nodes) {
  GraphSpec g;
  g.n_nodes = n_nodes;
  g.adjacency.resize(n_nodes);
  for (Index i = 0; i + 1 < n_nodes; ++i) {
    g.adjacency[i].push_back(i + 1);
    g.adjacency[i + 1].push_back(i);
  }
  for (auto& list : g.adjacency) std::sort(list.begin(), list.end());
  return g;
}

}  // namespace stinla

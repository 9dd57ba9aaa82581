#pragma once

#include <vector>

#include "stinla/types.hpp"

namespace stinla {

/// Undirected neighborhood graph for the Besag model. Nodes are 0-based
/// internally; the file format and CLI use 1-based indices.
struct GraphSpec {
  Index n_nodes = 0;
  std::vector<std::vector<Index>> adjacency;  // sorted neighbor lists

  // throws InvalidGraph on asymmetry, self-loops, or out-of-range indices
  void validate() const;
  std::vector<std::vector<Index>> connected_components() const;
};

GraphSpec path_graph(Index n_nodes);

}  // namespace stinla

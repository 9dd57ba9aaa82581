#pragma once

#include "stinla/likelihood.hpp"
#include "stinla/oracle.hpp"

namespace stinla {

struct SimulationSpec {
  Index n = 0;
  Index m = 0;
  InteractionType interaction;
  // true precisions for (alpha, gamma, delta, phi, eps)
  Vector precisions = (Vector(5) << 1.0, 250.0, 1.0, 250.0, 1.0).finished();
  double intercept = 1.0;
  GraphSpec graph;  // generated lattice when left empty
  Vector expected;  // per-cell E, defaults to 1
  std::uint64_t seed = 0;

  void validate() const;
};

/// Connected near-square lattice on m nodes; leftover nodes are chained off
/// the last grid node. Deterministic in m.
GraphSpec generate_lattice_graph(Index m);

struct SimulatedDataset {
  CountData data;    // one row per (i, j) cell, time-major
  Vector truth;      // latent truth in the canonical layout
  LatentLayout layout;
};

/// Draws every effect from its scaled, constrained prior, assembles the
/// linear predictor and Poisson counts. Deterministic in the seed.
SimulatedDataset simulate_dataset(const SimulationSpec& spec);

}  // namespace stinla

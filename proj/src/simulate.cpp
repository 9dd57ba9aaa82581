#include "stinla/simulate.hpp"

#include <cmath>

#include "stinla/rng.hpp"

namespace stinla {

void SimulationSpec::validate() const {
  if (interaction.temporal_order != 1 && interaction.temporal_order != 2)
    throw InvalidSize("temporal order must be 1 or 2");
  if (n <= interaction.temporal_order) throw InvalidSize("need n > temporal order");
  if (m < 2) throw InvalidSize("need m >= 2");
  if (precisions.size() != 5 || (precisions.array() <= 0).any())
    throw InvalidData("need 5 positive true precisions");
  if (expected.size() != 0 && (expected.size() != n * m || (expected.array() <= 0).any()))
    throw InvalidData("expected counts must be n*m positive values");
}

GraphSpec generate_lattice_graph(Index m) {
  if (m < 2) throw InvalidSize("lattice graph needs m >= 2");
  const Index rows = Index(std::floor(std::sqrt(double(m))));
  const Index cols = m / rows;
  const Index in_grid = rows * cols;

  GraphSpec g;
  g.n_nodes = m;
  g.adjacency.resize(m);
  auto connect = [&](Index a, Index b) {
    g.adjacency[a].push_back(b);
    g.adjacency[b].push_back(a);
  };
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) {
      const Index node = r * cols + c;
      if (c + 1 < cols) connect(node, node + 1);
      if (r + 1 < rows) connect(node, node + cols);
    }
  for (Index extra = in_grid; extra < m; ++extra) connect(extra - 1, extra);
  for (auto& list : g.adjacency) std::sort(list.begin(), list.end());
  g.validate();
  return g;
}

SimulatedDataset simulate_dataset(const SimulationSpec& spec) {
  spec.validate();
  const Index n = spec.n, m = spec.m;
  const GraphSpec graph = spec.graph.n_nodes > 0 ? spec.graph : generate_lattice_graph(m);
  if (graph.n_nodes != m) throw InvalidGraph("graph size does not match m");

  const int l = spec.interaction.temporal_order;
  const StructureMatrix rw = scale_structure(build_rw(n, l));
  const StructureMatrix besag = scale_structure(build_besag(graph));
  StructureMatrix interaction;
  switch (spec.interaction.kind) {
    case InteractionKind::I: interaction = build_iid(n * m); break;
    case InteractionKind::II: interaction = kronecker_structure(rw, build_iid(m)); break;
    case InteractionKind::III: interaction = kronecker_structure(build_iid(n), besag); break;
    case InteractionKind::IV: interaction = kronecker_structure(rw, besag); break;
  }

  const RngStream root(spec.seed, 0);
  auto draw_block = [&](const StructureMatrix& structure, double tau, std::uint64_t tag) {
    return Vector(sample_constrained_igmrf(structure, tau, 1, root.derive(tag)).row(0));
  };
  const Vector alpha = draw_block(rw, spec.precisions(0), 1);
  const Vector gamma = draw_block(build_iid(n), spec.precisions(1), 2);
  const Vector delta = draw_block(besag, spec.precisions(2), 3);
  const Vector phi = draw_block(build_iid(m), spec.precisions(3), 4);
  const Vector eps = draw_block(interaction, spec.precisions(4), 5);

  SimulatedDataset out;
  Index offset = 0;
  auto push = [&](const std::string& name, const Vector& value) {
    out.layout.blocks.push_back({name, offset, value.size()});
    offset += value.size();
  };
  push("mu", Vector::Constant(1, spec.intercept));
  push("alpha", alpha);
  push("gamma", gamma);
  push("delta", delta);
  push("phi", phi);
  push("eps", eps);
  out.layout.total = offset;

  out.truth.resize(offset);
  out.truth(0) = spec.intercept;
  out.truth.segment(out.layout.find("alpha").offset, n) = alpha;
  out.truth.segment(out.layout.find("gamma").offset, n) = gamma;
  out.truth.segment(out.layout.find("delta").offset, m) = delta;
  out.truth.segment(out.layout.find("phi").offset, m) = phi;
  out.truth.segment(out.layout.find("eps").offset, n * m) = eps;

  const Index d = n * m;
  out.data.y.resize(d);
  out.data.expected = spec.expected.size() ? spec.expected : Vector::Ones(d);
  out.data.obs.resize(size_t(d));
  const std::uint64_t count_seed = root.derive(6);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j) {
      const Index row = i * m + j;
      out.data.obs[size_t(row)] = {i + 1, j + 1};
      const double eta = spec.intercept + alpha(i) + gamma(i) + delta(j) + phi(j) + eps(row);
      if (eta > 700.0) throw NumericalFailure("simulate_dataset: exp overflow in the linear predictor");
      RngStream rng(count_seed, std::uint64_t(row));
      out.data.y(row) = double(rng.poisson(out.data.expected(row) * std::exp(eta)));
    }
  out.data.validate();
  return out;
}

}  // namespace stinla

#include "stinla/structure.hpp"

#include <cmath>

namespace stinla {

InteractionKind interaction_kind_from_int(int value) {
  switch (value) {
    case 1: return InteractionKind::I;
    case 2: return InteractionKind::II;
    case 3: return InteractionKind::III;
    case 4: return InteractionKind::IV;
    default: throw InvalidData("interaction type must be 1..4");
  }
}

int interaction_kind_to_int(InteractionKind kind) {
  switch (kind) {
    case InteractionKind::I: return 1;
    case InteractionKind::II: return 2;
    case InteractionKind::III: return 3;
    case InteractionKind::IV: return 4;
  }
  return 0;
}

StructureMatrix build_rw(Index n, int order) {
  if (order != 1 && order != 2) throw InvalidSize("random walk order must be 1 or 2");
  if (n <= order) throw InvalidSize("random walk needs n > order");
  Matrix diff = Matrix::Zero(n - order, n);
  for (Index i = 0; i < n - order; ++i) {
    if (order == 1) {
      diff(i, i) = -1.0;
      diff(i, i + 1) = 1.0;
    } else {
      diff(i, i) = 1.0;
      diff(i, i + 1) = -2.0;
      diff(i, i + 2) = 1.0;
    }
  }
  return {SymMatrix(diff.transpose() * diff), order, false};
}

StructureMatrix build_besag(const GraphSpec& graph) {
  graph.validate();
  const Index m = graph.n_nodes;
  Matrix r = Matrix::Zero(m, m);
  for (Index i = 0; i < m; ++i) {
    if (graph.adjacency[i].empty())
      throw InvalidGraph("isolated node " + std::to_string(i + 1) + " not supported by the Besag model");
    r(i, i) = double(graph.adjacency[i].size());
    for (Index j : graph.adjacency[i]) r(i, j) = -1.0;
  }
  const Index components = Index(graph.connected_components().size());
  return {SymMatrix(r), components, false};
}

StructureMatrix build_iid(Index n) {
  if (n < 1) throw InvalidSize("iid block needs n >= 1");
  return {SymMatrix(Matrix::Identity(n, n)), 0, true};
}

StructureMatrix kronecker_structure(const StructureMatrix& a, const StructureMatrix& b) {
  const Index na = a.matrix.dim(), nb = b.matrix.dim();
  Matrix out(na * nb, na * nb);
  for (Index i = 0; i < na; ++i)
    for (Index j = 0; j < na; ++j) out.block(i * nb, j * nb, nb, nb) = a.matrix(i, j) * b.matrix.mat();
  const Index rank = (na - a.nullity) * (nb - b.nullity);
  return {SymMatrix(out), na * nb - rank, a.scaled && b.scaled};
}

namespace {

// connected components of the matrix viewed as a graph on nonzero off-diagonals
std::vector<std::vector<Index>> matrix_components(const Matrix& m) {
  GraphSpec g;
  g.n_nodes = m.rows();
  g.adjacency.resize(m.rows());
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      if (i != j && m(i, j) != 0.0) g.adjacency[i].push_back(j);
  return g.connected_components();
}

}  // namespace

StructureMatrix scale_structure(const StructureMatrix& r) {
  const Index dim = r.matrix.dim();
  const auto components = matrix_components(r.matrix.mat());
  Matrix out = r.matrix.mat();
  Index total_null = 0;
  for (const auto& nodes : components) {
    const Index c = Index(nodes.size());
    Matrix sub(c, c);
    for (Index i = 0; i < c; ++i)
      for (Index j = 0; j < c; ++j) sub(i, j) = r.matrix(nodes[i], nodes[j]);
    const EigenDecomp decomp = eigendecompose(SymMatrix(sub));
    const Index local_null = count_null_eigenvalues(decomp.eigenvalues, 1e-9);
    if (local_null >= c) throw InvalidGraph("scale_structure: component with no positive eigenvalue");
    total_null += local_null;
    const auto range = decomp.eigenvectors.rightCols(c - local_null);
    const Vector inv = decomp.eigenvalues.tail(c - local_null).cwiseInverse();
    const Vector marginal_var = (range * inv.asDiagonal() * range.transpose()).diagonal();
    const double ref_var = std::exp(marginal_var.array().log().mean());
    for (Index i = 0; i < c; ++i)
      for (Index j = 0; j < c; ++j) out(nodes[i], nodes[j]) *= ref_var;
  }
  if (total_null != r.nullity)
    throw RankMismatch("scale_structure: component nullities sum to " + std::to_string(total_null) +
                       ", declared " + std::to_string(r.nullity));
  (void)dim;
  return {SymMatrix(out), r.nullity, true};
}

Index constraint_count(const InteractionType& type, Index n, Index m, Index n_components) {
  const Index l = type.temporal_order;
  if (n <= l || m < 1 || n_components < 1) throw InvalidSize("constraint_count: need n > l, m >= 1");
  const Index c = n_components;
  switch (type.kind) {
    case InteractionKind::I: return l + c;
    case InteractionKind::II: return l * m + l + c;
    case InteractionKind::III: return n * c + l + c;
    case InteractionKind::IV: return (n - l) * c + l * m + l - 1;
  }
  throw InvalidData("unknown interaction type");
}

}  // namespace stinla

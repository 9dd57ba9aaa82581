#pragma once

#include "stinla/dense.hpp"
#include "stinla/graph.hpp"

namespace stinla {

/// Precision structure R of a Gaussian effect (Q = tau * R) together with its
/// analytic rank deficiency and whether marginal variances were scaled to a
/// unit geometric mean.
struct StructureMatrix {
  SymMatrix matrix;
  Index nullity = 0;
  bool scaled = false;

  RankInfo rank_info() const { return RankInfo{nullity, 1e-9}; }
};

enum class InteractionKind { I, II, III, IV };

struct InteractionType {
  InteractionKind kind = InteractionKind::I;
  int temporal_order = 1;  // l in {1,2}
};

InteractionKind interaction_kind_from_int(int value);
int interaction_kind_to_int(InteractionKind kind);

/// Random-walk structure D^T D for the order-th differences; nullity = order.
StructureMatrix build_rw(Index n, int order);

/// Besag structure: neighbor counts on the diagonal, -1 per edge; nullity =
/// number of connected components. Isolated nodes are rejected.
StructureMatrix build_besag(const GraphSpec& graph);

/// Identity structure for iid effects; proper, already scaled.
StructureMatrix build_iid(Index n);

/// Kronecker product a (x) b with nullity from the rank product rule.
StructureMatrix kronecker_structure(const StructureMatrix& a, const StructureMatrix& b);

/// Multiplies each connected component of the structure by the geometric mean
/// of its pseudo-inverse diagonal, making marginal variances average to one.
StructureMatrix scale_structure(const StructureMatrix& r);

/// Number of constraints on the latent field per interaction type. For
/// disconnected graphs every per-spatial-component contribution is multiplied
/// by n_components; the connected case reproduces the printed formulas
/// (l+1, lm+l+1, n+l+1, n+lm-1).
Index constraint_count(const InteractionType& type, Index n, Index m, Index n_components);

}  // namespace stinla

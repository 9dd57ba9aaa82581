#pragma once

#include "stinla/types.hpp"

namespace stinla {

/// Dense symmetric matrix; symmetry is enforced at construction by averaging
/// with the transpose, so (i,j) and (j,i) are bitwise equal afterwards.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& values);

  Index dim() const { return values_.rows(); }
  const Matrix& mat() const { return values_; }
  double operator()(Index i, Index j) const { return values_(i, j); }

 private:
  Matrix values_;
};

struct EigenDecomp {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // orthonormal columns, same order
};

/// Known rank deficiency of a structure, plus the relative threshold used
/// only to validate it against the computed spectrum. Ranks of the intrinsic
/// structures are exact combinatorial facts, never estimated.
struct RankInfo {
  Index nullity = 0;
  double tolerance = 1e-9;  // relative to the largest eigenvalue
};

EigenDecomp eigendecompose(const SymMatrix& m);

/// Moore-Penrose pseudo-inverse through the eigendecomposition, inverting the
/// dim - nullity eigenvalues above threshold. Throws RankMismatch when the
/// spectrum disagrees with the declared nullity.
SymMatrix pseudo_inverse(const SymMatrix& m, const RankInfo& rank);

/// Log of the generalized determinant: sum of log eigenvalues over the
/// nonzero part of the spectrum.
double generalized_log_det(const SymMatrix& m, const RankInfo& rank);

/// Orthonormal basis of the null space as rows (nullity x dim). Used directly
/// as the constraint matrix C with C x = 0.
Matrix null_space_basis(const SymMatrix& m, const RankInfo& rank);

/// Posterior covariance update
///   sigma* = Q+ - Q+ (I + Q_l Q+)^{-1} Q_l Q+
/// for a (possibly singular) prior covariance Q+ and likelihood precision
/// Q_l. The result stays supported on the range of Q+, so null-space
/// constraints absorbed by Q+ carry over for free.
SymMatrix woodbury_posterior_cov(const SymMatrix& prior_geninv, const SymMatrix& lik_prec);

// Plain-matrix core of the update, shared with the inference iteration.
Matrix woodbury_update(const Matrix& prior_geninv, const Matrix& lik_prec);

// Count of eigenvalues at or below tolerance * max|eigenvalue|.
Index count_null_eigenvalues(const Vector& ascending_eigenvalues, double relative_tolerance);

}  // namespace stinla

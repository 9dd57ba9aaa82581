#include "stinla/dense.hpp"

#include <cmath>

namespace stinla {

SymMatrix::SymMatrix(const Matrix& values) {
  if (values.rows() != values.cols() || values.rows() < 1)
    throw InvalidMatrix("SymMatrix requires a square matrix of dim >= 1");
  values_ = 0.5 * (values + values.transpose());
}

EigenDecomp eigendecompose(const SymMatrix& m) {
  if (!m.mat().allFinite()) throw InvalidMatrix("eigendecompose: non-finite entries");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m.mat());
  if (solver.info() != Eigen::Success) throw NumericalFailure("eigendecompose: solver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Index count_null_eigenvalues(const Vector& ascending_eigenvalues, double relative_tolerance) {
  const double scale = ascending_eigenvalues.cwiseAbs().maxCoeff();
  const double threshold = relative_tolerance * scale;
  Index count = 0;
  for (Index i = 0; i < ascending_eigenvalues.size(); ++i)
    if (std::abs(ascending_eigenvalues(i)) <= threshold) ++count;
  return count;
}

namespace {

EigenDecomp checked_decomposition(const SymMatrix& m, const RankInfo& rank) {
  if (rank.nullity < 0 || rank.nullity >= m.dim()) throw RankMismatch("declared nullity out of range");
  if (rank.tolerance <= 0) throw InvalidMatrix("tolerance must be positive");
  EigenDecomp decomp = eigendecompose(m);
  const Index observed = count_null_eigenvalues(decomp.eigenvalues, rank.tolerance);
  if (observed != rank.nullity)
    throw RankMismatch("declared nullity " + std::to_string(rank.nullity) + " but spectrum has " +
                       std::to_string(observed) + " null eigenvalues");
  return decomp;
}

}  // namespace

SymMatrix pseudo_inverse(const SymMatrix& m, const RankInfo& rank) {
  const EigenDecomp decomp = checked_decomposition(m, rank);
  const Index r = m.dim() - rank.nullity;
  const auto range = decomp.eigenvectors.rightCols(r);
  const Vector inverted = decomp.eigenvalues.tail(r).cwiseInverse();
  return SymMatrix(range * inverted.asDiagonal() * range.transpose());
}

double generalized_log_det(const SymMatrix& m, const RankInfo& rank) {
  const EigenDecomp decomp = checked_decomposition(m, rank);
  const Index r = m.dim() - rank.nullity;
  return decomp.eigenvalues.tail(r).array().log().sum();
}

Matrix null_space_basis(const SymMatrix& m, const RankInfo& rank) {
  const EigenDecomp decomp = checked_decomposition(m, rank);
  return decomp.eigenvectors.leftCols(rank.nullity).transpose();
}

Matrix woodbury_update(const Matrix& prior_geninv, const Matrix& lik_prec) {
  const Index s = prior_geninv.rows();
  const Matrix lik_times_prior = lik_prec * prior_geninv;
  Matrix system = Matrix::Identity(s, s) + lik_times_prior;
  Eigen::PartialPivLU<Matrix> lu(system);
  const Matrix solved = lu.solve(lik_times_prior);
  Matrix result = prior_geninv - prior_geninv * solved;
  if (!result.allFinite()) throw NumericalFailure("woodbury_update: singular I + Q_l Q+ system");
  // suppress round-off asymmetry
  result = 0.5 * (result + result.transpose()).eval();
  return result;
}

SymMatrix woodbury_posterior_cov(const SymMatrix& prior_geninv, const SymMatrix& lik_prec) {
  if (prior_geninv.dim() != lik_prec.dim()) throw InvalidMatrix("woodbury_posterior_cov: dimension mismatch");
  return SymMatrix(woodbury_update(prior_geninv.mat(), lik_prec.mat()));
}

}  // namespace stinla

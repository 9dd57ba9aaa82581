#include "stinla/oracle.hpp"

#include <cmath>

#include "stinla/parallel.hpp"
#include "stinla/rng.hpp"

namespace stinla {

KrigingResult kriging_correct(const Vector& mean_un, const SymMatrix& cov_un, const Matrix& constraints) {
  const Index s = cov_un.dim();
  if (mean_un.size() != s || constraints.cols() != s) throw InvalidMatrix("kriging_correct: dimension mismatch");
  if (constraints.rows() == 0) return {mean_un, cov_un.mat()};

  const Matrix cov_ct = cov_un.mat() * constraints.transpose();       // s x k
  const Matrix gram = constraints * cov_ct;                           // k x k
  Eigen::FullPivLU<Matrix> lu(gram);
  if (!lu.isInvertible()) throw RankMismatch("kriging_correct: C cov C^T is singular (redundant constraints?)");
  const Matrix gain = cov_ct * lu.inverse();                          // s x k

  KrigingResult out;
  out.mean = mean_un - gain * (constraints * mean_un);
  out.cov = cov_un.mat() - gain * cov_ct.transpose();
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  return out;
}

Matrix sample_constrained_igmrf(const StructureMatrix& structure, double tau, Index count, std::uint64_t seed,
                                const KrigingConfig& config) {
  if (!(tau > 0)) throw InvalidData("sample_constrained_igmrf: tau must be positive");
  if (count < 1) throw InvalidData("sample_constrained_igmrf: count must be >= 1");
  const Index dim = structure.matrix.dim();

  Matrix precision = tau * structure.matrix.mat();
  precision.diagonal().array() += config.jitter;
  Eigen::LLT<Matrix> llt(precision);
  if (llt.info() != Eigen::Success) throw NumericalFailure("sample_constrained_igmrf: Cholesky failed");

  // x = L^{-T} z has covariance (tau R + jitter I)^{-1}
  const Matrix upper = Matrix(llt.matrixU());

  Matrix correction;  // cov C^T (C cov C^T)^{-1} C, applied to every draw
  if (structure.nullity > 0) {
    const Matrix constraints = null_space_basis(structure.matrix, structure.rank_info());
    const Matrix cov = llt.solve(Matrix::Identity(dim, dim));
    const Matrix cov_ct = cov * constraints.transpose();
    const Matrix gram = constraints * cov_ct;
    Eigen::FullPivLU<Matrix> lu(gram);
    if (!lu.isInvertible()) throw NumericalFailure("sample_constrained_igmrf: singular constraint Gram matrix");
    correction = cov_ct * lu.inverse() * constraints;
  }

  Matrix samples(count, dim);
  for (Index i = 0; i < count; ++i) {
    RngStream rng(seed, std::uint64_t(i));
    Vector z(dim);
    for (Index j = 0; j < dim; ++j) z(j) = rng.normal();
    Vector x = upper.triangularView<Eigen::Upper>().solve(z);
    if (structure.nullity > 0) x -= correction * x;
    samples.row(i) = x.transpose();
  }
  return samples;
}

namespace {

// odometer over a tensor grid of quadrature nodes
bool advance(std::vector<int>& index, int base) {
  for (size_t d = 0; d < index.size(); ++d) {
    if (++index[d] < base) return true;
    index[d] = 0;
  }
  return false;
}

}  // namespace

void gauss_hermite(int n, Vector& nodes, Vector& weights) {
  if (n < 1) throw InvalidData("gauss_hermite: need n >= 1");
  Matrix jacobi = Matrix::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double off = std::sqrt(i / 2.0);
    jacobi(i, i - 1) = jacobi(i - 1, i) = off;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eigs(jacobi);
  nodes = eigs.eigenvalues();
  weights.resize(n);
  const double sqrt_pi = std::sqrt(M_PI);
  for (int i = 0; i < n; ++i) {
    const double first = eigs.eigenvectors()(0, i);
    weights(i) = sqrt_pi * first * first;
  }
}

Vector brute_force_theta_posterior(const LatentModel& model, const Likelihood& lik,
                                   const std::vector<HyperParam>& theta_grid, int nodes_per_dim, int threads) {
  const Index r = model.s() - model.n_constraints();
  if (r > 4) throw Unsupported("brute_force_theta_posterior: constrained dimension " + std::to_string(r) + " > 4");
  if (theta_grid.empty()) throw InvalidData("brute_force_theta_posterior: empty grid");

  Vector nodes, weights;
  gauss_hermite(nodes_per_dim, nodes, weights);
  const Vector log_weights = weights.array().log();

  Vector log_values(Index(theta_grid.size()));
  parallel_for(Index(theta_grid.size()), threads, [&](Index g) {
    const HyperParam& theta = theta_grid[size_t(g)];
    const GaussianApproxResult ga = gaussian_approx(model, theta, lik);

    // integrate over z with x = V z, centered at the GA mode and scaled by
    // the GA covariance restricted to the range
    const Vector z_hat = model.range_basis.transpose() * ga.x_star;
    Matrix z_cov = model.range_basis.transpose() * ga.sigma_star * model.range_basis;
    Eigen::LLT<Matrix> llt(z_cov);
    if (llt.info() != Eigen::Success) throw NumericalFailure("brute_force_theta_posterior: GA covariance not PD");
    const Matrix scale = Matrix(llt.matrixL());

    const Vector prec_eigs = model.range_prec_eigenvalues(theta);
    const double prior_logdet_term = 0.5 * prec_eigs.array().log().sum() - 0.5 * r * std::log(2.0 * M_PI);

    auto log_integrand = [&](const Vector& z) {
      const double prior = prior_logdet_term - 0.5 * z.dot(prec_eigs.cwiseProduct(z));
      const double loglik = lik.terms(model.design_range * z).loglik;
      return prior + loglik;
    };

    const double shift = log_integrand(z_hat);
    std::vector<int> index(size_t(r), 0);
    double acc = 0.0;
    do {
      Vector xi(r);
      double log_w = 0.0;
      for (Index d = 0; d < r; ++d) {
        xi(d) = nodes(index[size_t(d)]);
        log_w += log_weights(index[size_t(d)]) + xi(d) * xi(d);
      }
      const Vector z = z_hat + std::sqrt(2.0) * (scale * xi);
      acc += std::exp(log_w + log_integrand(z) - shift);
    } while (advance(index, nodes_per_dim));

    const double log_det_scale = scale.diagonal().array().log().sum();
    log_values(g) =
        log_prior(theta, model.prior) + shift + std::log(acc) + 0.5 * r * std::log(2.0) + log_det_scale;
  });

  const double max_log = log_values.maxCoeff();
  Vector posterior = (log_values.array() - max_log).exp();
  posterior /= posterior.sum();
  return posterior;
}

double equivalence_check(const LatentModel& model, const HyperParam& theta, const Matrix& lik_prec,
                         const KrigingConfig& config) {
  if (lik_prec.rows() != model.s() || lik_prec.cols() != model.s())
    throw InvalidMatrix("equivalence_check: lik_prec must be s x s");

  const Matrix woodbury_path = woodbury_update(model.prior_geninv(theta), lik_prec);

  Matrix regularized = lik_prec + model.prior_precision(theta);
  regularized.diagonal().array() += config.jitter;
  const Matrix cov_un = regularized.llt().solve(Matrix::Identity(model.s(), model.s()));
  const Matrix kriging_path = kriging_correct(Vector::Zero(model.s()), SymMatrix(cov_un), model.C).cov;

  return (woodbury_path - kriging_path).cwiseAbs().maxCoeff();
}

}  // namespace stinla

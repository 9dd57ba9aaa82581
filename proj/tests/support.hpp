#pragma once

// Test-only oracles, independent of the library's implementation paths.

#include <cmath>
#include <vector>

#include "stinla/inference.hpp"
#include "stinla/rng.hpp"

namespace testsupport {

using stinla::Index;
using stinla::Matrix;
using stinla::Vector;

// Cyclic Jacobi eigenvalue iteration; brute-force reference for the
// library's eigendecomposition.
inline Vector jacobi_eigenvalues(Matrix a, int sweeps = 100) {
  const Index n = a.rows();
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    double off = 0.0;
    for (Index p = 0; p < n; ++p)
      for (Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-26) break;
    for (Index p = 0; p < n; ++p)
      for (Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = 0.5 * (a(q, q) - a(p, p)) / a(p, q);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        Matrix rot = Matrix::Identity(n, n);
        rot(p, p) = c;
        rot(q, q) = c;
        rot(p, q) = s;
        rot(q, p) = -s;
        a = (rot.transpose() * a * rot).eval();
      }
  }
  Vector evals = a.diagonal();
  std::sort(evals.data(), evals.data() + n);
  return evals;
}

// Gaussian observation model y_k ~ N(eta_k, 1/prec_k); makes the Laplace
// approximation exact and the theta posterior available in closed form.
class GaussianLikelihood final : public stinla::Likelihood {
 public:
  GaussianLikelihood(Vector y, Vector prec, double loglik_shift = 0.0)
      : y_(std::move(y)), prec_(std::move(prec)), shift_(loglik_shift) {}

  stinla::LikelihoodTerms terms(const Vector& eta) const override {
    stinla::LikelihoodTerms out;
    const Vector resid = y_ - eta;
    out.loglik = shift_;
    for (Index k = 0; k < eta.size(); ++k)
      out.loglik += -0.5 * prec_(k) * resid(k) * resid(k) + 0.5 * std::log(prec_(k) / (2.0 * M_PI));
    out.grad = prec_.cwiseProduct(resid);
    out.neg_hess_diag = prec_;
    return out;
  }
  Index size() const override { return y_.size(); }

 private:
  Vector y_, prec_;
  double shift_;
};

// Quadratic log-likelihood with a fixed curvature, for golden covariance
// checks where only the Hessian matters.
class FixedCurvatureLikelihood final : public stinla::Likelihood {
 public:
  explicit FixedCurvatureLikelihood(Vector neg_hess_diag, Vector target = Vector())
      : curv_(std::move(neg_hess_diag)), target_(target.size() ? target : Vector::Zero(curv_.size())) {}

  stinla::LikelihoodTerms terms(const Vector& eta) const override {
    stinla::LikelihoodTerms out;
    const Vector resid = target_ - eta;
    out.loglik = -0.5 * resid.dot(curv_.cwiseProduct(resid));
    out.grad = curv_.cwiseProduct(resid);
    out.neg_hess_diag = curv_;
    return out;
  }
  Index size() const override { return curv_.size(); }

 private:
  Vector curv_, target_;
};

// Exact log marginal likelihood of theta for a GaussianLikelihood:
// y ~ N(0, A Q+ A^T + diag(1/prec)), plus the log prior.
inline double gaussian_closed_form_logpost(const stinla::LatentModel& model, const stinla::HyperParam& theta,
                                           const Vector& y, const Vector& prec) {
  const Matrix marginal_cov =
      model.A * model.prior_geninv(theta) * model.A.transpose() + Matrix(prec.cwiseInverse().asDiagonal());
  Eigen::LLT<Matrix> llt(marginal_cov);
  const double logdet = 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
  const double quad = y.dot(llt.solve(y));
  const double d = double(y.size());
  return stinla::log_prior(theta, model.prior) - 0.5 * d * std::log(2.0 * M_PI) - 0.5 * logdet - 0.5 * quad;
}

// Constrained generalized least squares through the jitter + kriging route;
// reference for the Gaussian-approximation mode.
inline Vector constrained_gls_mode(const stinla::LatentModel& model, const stinla::HyperParam& theta,
                                   const Vector& y, const Vector& prec, double jitter = 1e-10) {
  Matrix system = model.A.transpose() * prec.asDiagonal() * model.A + model.prior_precision(theta);
  system.diagonal().array() += jitter;
  const Matrix cov = system.llt().solve(Matrix::Identity(model.s(), model.s()));
  const Vector mean_un = cov * (model.A.transpose() * prec.asDiagonal() * y);
  if (model.n_constraints() == 0) return mean_un;
  const Matrix cov_ct = cov * model.C.transpose();
  const Matrix gram = model.C * cov_ct;
  return mean_un - cov_ct * gram.ldlt().solve(model.C * mean_un);
}

// Deterministic test-instance noise.
inline Vector random_vector(Index n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  stinla::RngStream rng(seed, 0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = lo + (hi - lo) * rng.uniform();
  return v;
}

inline Matrix random_spd(Index n, std::uint64_t seed) {
  stinla::RngStream rng(seed, 1);
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) m(i, j) = rng.normal();
  return m * m.transpose() + 0.5 * Matrix::Identity(n, n);
}

// Single RW block model with identity design; the smallest constrained model.
inline stinla::LatentModel tiny_rw_model(Index n, int order, const stinla::PriorSpec& prior, bool scaled = false) {
  stinla::StructureMatrix rw = stinla::build_rw(n, order);
  if (scaled) rw = stinla::scale_structure(rw);
  std::vector<stinla::BlockSpec> blocks;
  blocks.push_back({"effect", Vector(), rw, 0});
  return stinla::assemble_blocks(std::move(blocks), prior, Matrix::Identity(n, n));
}

inline stinla::PriorSpec independent_prior(int n_hyper, double u = 1.0, double a = 0.01) {
  stinla::PriorSpec prior;
  prior.kind = stinla::PriorKind::PcIndependent;
  prior.per_precision.assign(size_t(n_hyper), {u, a});
  return prior;
}

}  // namespace testsupport

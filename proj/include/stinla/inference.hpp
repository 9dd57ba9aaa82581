#pragma once

#include "stinla/likelihood.hpp"

namespace stinla {

struct InferenceOptions {
  std::string strategy = "GA";  // Gaussian approximation is the only strategy
  int max_newton_iter = 50;
  double newton_tol = 1e-8;       // inf-norm of the mode update
  double drop_threshold = 2.5;    // log-density drop bounding the exploration
  double z_step = 1.0;            // grid step in standardized coordinates
  int max_optimizer_iter = 100;
  double gradient_tol = 1e-4;     // inf-norm stopping rule for the mode search
  double fd_step = 5e-3;          // central-difference step for gradients
  double hessian_fd_step = 5e-2;  // central-difference step for the mode Hessian
  int threads = 1;
  std::uint64_t seed = 0;  // recorded in outputs; the engine itself draws nothing

  void validate() const;
};

/// Gaussian approximation of the latent full conditional at one theta,
/// constrained to C x = 0 through the pseudo-inverse prior.
struct GaussianApproxResult {
  Vector x_star;
  Matrix sigma_star;
  Vector canonical_b;
  double loglik_at_mode = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// One explored hyperparameter configuration. axis/step record the position
/// on the standardized exploration grid (axis -1 is the mode); spacing is the
/// cell width along that axis in theta space, used for the Riemann
/// normalization of the evidence.
struct ThetaPoint {
  HyperParam theta;
  double log_post = 0.0;
  double weight = 0.0;
  int axis = -1;
  int step = 0;
  double spacing = 0.0;
};

struct MarginalSummary {
  Vector mean, sd, q025, q50, q975;
};

struct HyperMarginal {
  Vector values;
  Vector weights;
};

struct FitDiagnostics {
  int optimizer_iterations = 0;
  bool optimizer_converged = false;
  double gradient_inf_norm = 0.0;
  int dropped_points = 0;
  int newton_iterations_at_mode = 0;
};

struct RuntimeBreakdown {
  double optimize_s = 0.0;
  double explore_s = 0.0;
  double marginals_s = 0.0;
  double criteria_s = 0.0;
  double total_s = 0.0;
};

struct FitResult {
  HyperParam theta_mode;
  Matrix neg_hess_at_mode;
  std::vector<ThetaPoint> points;
  MarginalSummary latent;
  std::vector<HyperMarginal> hyper;
  double dic = 0.0;
  double log_mlik = 0.0;
  FitDiagnostics diagnostics;
  RuntimeBreakdown runtime;
};

GaussianApproxResult gaussian_approx(const LatentModel& model, const HyperParam& theta, const Likelihood& lik,
                                     const InferenceOptions& options = {});

/// Laplace approximation of the unnormalized log posterior of theta,
///   log pi(theta) + log pi(x*|theta, Cx=0) + log pi(y|x*) - log GA(x*),
/// with both Gaussian terms on the (s-k)-dimensional constrained subspace.
double log_posterior_theta(const LatentModel& model, const HyperParam& theta, const Likelihood& lik,
                           const InferenceOptions& options = {});

struct OptimizeResult {
  HyperParam theta_mode;
  Matrix neg_hess;  // of log_posterior_theta, symmetrized, eigenvalues floored
  int iterations = 0;
  bool converged = false;
  double gradient_inf_norm = 0.0;
};

/// L-BFGS ascent with central-difference gradients; the Hessian at the mode
/// comes from central second differences.
OptimizeResult optimize_theta(const LatentModel& model, const Likelihood& lik, const HyperParam& theta0,
                              const InferenceOptions& options = {});

struct ExploreResult {
  std::vector<ThetaPoint> points;  // mode first, then sorted by (axis, step)
  int dropped_points = 0;
};

/// Axis exploration in the standardized parameterization
/// theta = theta* + V diag(lambda^-1/2) z: per half-axis an asymmetry scale is
/// calibrated by walking until the log posterior drops by drop_threshold, then
/// grid points are laid at unit z steps until the drop is exceeded. Weights
/// are normalized exponentials of the log posterior.
ExploreResult explore_theta(const LatentModel& model, const Likelihood& lik, const HyperParam& theta_mode,
                            const Matrix& neg_hess, const InferenceOptions& options = {});

struct LatentMarginals {
  MarginalSummary latent;
  std::vector<HyperMarginal> hyper;
};

/// Mixture summaries sum_k w_k N(x*_i(theta_k), sigma*_ii(theta_k)) per latent
/// element; quantiles invert the mixture CDF by bisection.
LatentMarginals latent_marginals(const LatentModel& model, const Likelihood& lik,
                                 const std::vector<ThetaPoint>& points, const InferenceOptions& options = {});

struct ModelCriteria {
  double dic = 0.0;
  double log_mlik = 0.0;
};

ModelCriteria model_criteria(const LatentModel& model, const Likelihood& lik, const std::vector<ThetaPoint>& points,
                             const InferenceOptions& options = {});

FitResult fit(const LatentModel& model, const Likelihood& lik, const InferenceOptions& options = {});

// mixture helpers shared with the tests
namespace mixture {
double mean(const Vector& means, const Vector& weights);
double variance(const Vector& means, const Vector& sds, const Vector& weights);
double quantile(double p, const Vector& means, const Vector& sds, const Vector& weights, double prob_tol = 1e-8);
double normal_cdf(double x, double mean, double sd);
}  // namespace mixture

namespace detail {
/// Generic L-BFGS maximizer used by optimize_theta; exposed for direct tests.
struct LbfgsResult {
  Vector x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  double gradient_inf_norm = 0.0;
};
LbfgsResult lbfgs_maximize(const std::function<double(const Vector&)>& f,
                           const std::function<Vector(const Vector&)>& grad, const Vector& x0, int max_iter,
                           double grad_tol);
}  // namespace detail

}  // namespace stinla

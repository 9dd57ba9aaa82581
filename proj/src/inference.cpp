#include "stinla/inference.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "stinla/parallel.hpp"

namespace stinla {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void InferenceOptions::validate() const {
  if (strategy != "GA") throw Unsupported("unknown strategy '" + strategy + "' (only GA is available)");
  if (max_newton_iter < 1 || max_optimizer_iter < 1) throw InvalidData("iteration caps must be positive");
  if (!(newton_tol > 0) || !(drop_threshold > 0) || !(z_step > 0) || !(fd_step > 0) || !(hessian_fd_step > 0))
    throw InvalidData("tolerances and steps must be positive");
  if (threads < 1) throw InvalidData("threads must be >= 1");
}

GaussianApproxResult gaussian_approx(const LatentModel& model, const HyperParam& theta, const Likelihood& lik,
                                     const InferenceOptions& options) {
  options.validate();
  model.check_theta(theta);
  if (lik.size() != model.data_size()) throw InvalidData("likelihood size does not match design matrix");
  const Matrix prior_cov = model.prior_geninv(theta);

  Vector x = Vector::Zero(model.s());
  GaussianApproxResult result;
  for (int it = 1; it <= options.max_newton_iter; ++it) {
    const Vector eta = model.A * x;
    const LikelihoodTerms terms = lik.terms(eta);
    const Matrix lik_prec = model.A.transpose() * terms.neg_hess_diag.asDiagonal() * model.A;
    const Vector b = model.A.transpose() * (terms.grad + terms.neg_hess_diag.cwiseProduct(eta));
    const Matrix sigma = woodbury_update(prior_cov, lik_prec);
    const Vector x_new = sigma * b;
    if (!x_new.allFinite()) throw NumericalFailure("gaussian_approx: non-finite iterate");
    const double step = (x_new - x).cwiseAbs().maxCoeff();
    x = x_new;
    result.iterations = it;
    if (step < options.newton_tol) {
      result.converged = true;
      break;
    }
  }
  if (!result.converged)
    throw NotConverged("gaussian_approx: no convergence in " + std::to_string(options.max_newton_iter) +
                           " iterations",
                       x);

  // refresh all quantities at the accepted mode
  const Vector eta = model.A * x;
  const LikelihoodTerms terms = lik.terms(eta);
  const Matrix lik_prec = model.A.transpose() * terms.neg_hess_diag.asDiagonal() * model.A;
  result.x_star = x;
  result.canonical_b = model.A.transpose() * (terms.grad + terms.neg_hess_diag.cwiseProduct(eta));
  result.sigma_star = woodbury_update(prior_cov, lik_prec);
  result.loglik_at_mode = terms.loglik;
  return result;
}

double log_posterior_theta(const LatentModel& model, const HyperParam& theta, const Likelihood& lik,
                           const InferenceOptions& options) {
  const GaussianApproxResult ga = gaussian_approx(model, theta, lik, options);
  const LikelihoodTerms terms = lik.terms(model.A * ga.x_star);

  // log pi(x*|theta, Cx=0) with the generalized determinant; the
  // (s-k)/2 log 2pi constants cancel against the GA density below
  const double prior_part =
      0.5 * model.glogdet_precision(theta) - 0.5 * model.prior_quadratic_form(theta, ga.x_star);

  // generalized log-determinant of sigma*^-1 on the constrained subspace:
  // eigenvalues of the prior precision on its range plus the projected
  // likelihood curvature
  Matrix range_prec = model.design_range.transpose() * terms.neg_hess_diag.asDiagonal() * model.design_range;
  range_prec.diagonal() += model.range_prec_eigenvalues(theta);
  Eigen::LLT<Matrix> llt(range_prec);
  if (llt.info() != Eigen::Success) throw NumericalFailure("log_posterior_theta: curvature not positive definite");
  const double glogdet_posterior_prec = 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();

  const double value = log_prior(theta, model.prior) + prior_part + terms.loglik - 0.5 * glogdet_posterior_prec;
  if (!std::isfinite(value)) throw NumericalFailure("log_posterior_theta: non-finite value");
  return value;
}

namespace detail {

LbfgsResult lbfgs_maximize(const std::function<double(const Vector&)>& f,
                           const std::function<Vector(const Vector&)>& grad, const Vector& x0, int max_iter,
                           double grad_tol) {
  const Index n = x0.size();
  const int memory = 10;
  std::vector<Vector> s_hist, y_hist;
  std::vector<double> rho_hist;

  LbfgsResult result;
  Vector x = x0;
  double fx = f(x);
  Vector g = grad(x);

  for (int it = 0; it < max_iter; ++it) {
    result.iterations = it;
    result.gradient_inf_norm = g.cwiseAbs().maxCoeff();
    if (result.gradient_inf_norm < grad_tol) {
      result.converged = true;
      break;
    }

    // two-loop recursion on the ascent direction
    Vector q = g;
    const int h = int(s_hist.size());
    std::vector<double> alpha(h);
    for (int i = h - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    if (h > 0) {
      const double gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      q *= gamma;
    }
    for (int i = 0; i < h; ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    Vector direction = q;
    double slope = g.dot(direction);
    if (!(slope > 0)) {  // not an ascent direction; fall back to the gradient
      direction = g;
      slope = g.squaredNorm();
    }

    double step = 1.0;
    double f_new = kNegInf;
    Vector x_new;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      x_new = x + step * direction;
      f_new = f(x_new);
      if (std::isfinite(f_new) && f_new >= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // stalled; report the best point found

    const Vector g_new = grad(x_new);
    const Vector s_vec = x_new - x;
    const Vector y_vec = g - g_new;  // curvature pair of the negated objective
    const double sy = s_vec.dot(y_vec);
    if (sy > 1e-12 * s_vec.norm() * y_vec.norm()) {
      s_hist.push_back(s_vec);
      y_hist.push_back(y_vec);
      rho_hist.push_back(1.0 / sy);
      if (int(s_hist.size()) > memory) {
        s_hist.erase(s_hist.begin());
        y_hist.erase(y_hist.begin());
        rho_hist.erase(rho_hist.begin());
      }
    }
    x = x_new;
    fx = f_new;
    g = g_new;
    result.gradient_inf_norm = g.cwiseAbs().maxCoeff();
    if (result.gradient_inf_norm < grad_tol) {
      result.converged = true;
      result.iterations = it + 1;
      break;
    }
  }
  (void)n;
  result.x = x;
  result.value = fx;
  return result;
}

}  // namespace detail

namespace {

// objective wrapper returning -inf where the evaluation fails numerically, so
// the line search backs off instead of aborting
double safe_logpost(const LatentModel& model, const HyperParam& theta, const Likelihood& lik,
                    const InferenceOptions& options) {
  try {
    return log_posterior_theta(model, theta, lik, options);
  } catch (const NumericalError&) {
    return kNegInf;
  }
}

Vector central_gradient(const LatentModel& model, const Likelihood& lik, const HyperParam& theta,
                        const InferenceOptions& options) {
  const Index h = theta.size();
  Vector values(2 * h);
  parallel_for(2 * h, options.threads, [&](Index idx) {
    HyperParam shifted = theta;
    const Index coord = idx / 2;
    const double sign = (idx % 2 == 0) ? 1.0 : -1.0;
    shifted(coord) += sign * options.fd_step;
    values(idx) = safe_logpost(model, shifted, lik, options);
  });
  if (!values.allFinite()) throw NotConverged("optimize_theta: gradient evaluation failed", theta);
  Vector grad(h);
  for (Index i = 0; i < h; ++i) grad(i) = (values(2 * i) - values(2 * i + 1)) / (2 * options.fd_step);
  return grad;
}

Matrix neg_hessian_by_differences(const LatentModel& model, const Likelihood& lik, const HyperParam& theta,
                                  const InferenceOptions& options) {
  const Index h = theta.size();
  const double step = options.hessian_fd_step;
  const double f0 = safe_logpost(model, theta, lik, options);

  struct Probe {
    Index i, j;  // i == j for diagonal probes
    double si, sj;
  };
  std::vector<Probe> probes;
  for (Index i = 0; i < h; ++i) {
    probes.push_back({i, i, 1.0, 0.0});
    probes.push_back({i, i, -1.0, 0.0});
  }
  for (Index i = 0; i < h; ++i)
    for (Index j = i + 1; j < h; ++j)
      for (double si : {1.0, -1.0})
        for (double sj : {1.0, -1.0}) probes.push_back({i, j, si, sj});

  Vector values(Index(probes.size()));
  parallel_for(Index(probes.size()), options.threads, [&](Index p) {
    const Probe& probe = probes[size_t(p)];
    HyperParam shifted = theta;
    shifted(probe.i) += probe.si * step;
    if (probe.j != probe.i) shifted(probe.j) += probe.sj * step;
    values(p) = safe_logpost(model, shifted, lik, options);
  });
  if (!values.allFinite()) throw NotConverged("optimize_theta: Hessian evaluation failed", theta);

  Matrix hess = Matrix::Zero(h, h);
  Index cursor = 0;
  for (Index i = 0; i < h; ++i) {
    const double fp = values(cursor++), fm = values(cursor++);
    hess(i, i) = (fp - 2 * f0 + fm) / (step * step);
  }
  for (Index i = 0; i < h; ++i)
    for (Index j = i + 1; j < h; ++j) {
      const double fpp = values(cursor++), fpm = values(cursor++), fmp = values(cursor++), fmm = values(cursor++);
      hess(i, j) = hess(j, i) = (fpp - fpm - fmp + fmm) / (4 * step * step);
    }

  Matrix neg_hess = -0.5 * (hess + hess.transpose());
  // floor the spectrum so flat directions cannot blow up the exploration grid
  Eigen::SelfAdjointEigenSolver<Matrix> eigs(neg_hess);
  const Vector floored = eigs.eigenvalues().cwiseMax(1e-6);
  return eigs.eigenvectors() * floored.asDiagonal() * eigs.eigenvectors().transpose();
}

}  // namespace

OptimizeResult optimize_theta(const LatentModel& model, const Likelihood& lik, const HyperParam& theta0,
                              const InferenceOptions& options) {
  options.validate();
  model.check_theta(theta0);
  auto objective = [&](const Vector& theta) { return safe_logpost(model, theta, lik, options); };
  auto gradient = [&](const Vector& theta) { return central_gradient(model, lik, theta, options); };

  const detail::LbfgsResult opt =
      detail::lbfgs_maximize(objective, gradient, theta0, options.max_optimizer_iter, options.gradient_tol);
  if (!opt.converged && opt.gradient_inf_norm > 1e-2)
    throw NotConverged("optimize_theta: gradient inf-norm " + std::to_string(opt.gradient_inf_norm) +
                           " after iteration cap",
                       opt.x);

  OptimizeResult result;
  result.theta_mode = opt.x;
  result.iterations = opt.iterations;
  result.converged = opt.converged;
  result.gradient_inf_norm = opt.gradient_inf_norm;
  result.neg_hess = neg_hessian_by_differences(model, lik, opt.x, options);
  return result;
}

namespace {

struct HalfAxis {
  std::vector<ThetaPoint> points;
  double scale = 1.0;
  int dropped = 0;
};

HalfAxis explore_half_axis(const LatentModel& model, const Likelihood& lik, const HyperParam& theta_mode,
                           double f_mode, const Vector& direction, int axis, int sign,
                           const InferenceOptions& options) {
  constexpr int kMaxWalk = 10;
  constexpr int kMaxGrid = 25;
  HalfAxis out;
  const double z_ref = std::sqrt(2.0 * options.drop_threshold);

  // calibrate the asymmetry scale: walk until the density drops by threshold
  double t_cross = double(kMaxWalk);
  double prev_drop = 0.0;
  for (int t = 1; t <= kMaxWalk; ++t) {
    double value;
    try {
      value = log_posterior_theta(model, theta_mode + sign * double(t) * direction, lik, options);
    } catch (const NumericalError&) {
      ++out.dropped;
      t_cross = std::max(1.0, double(t - 1));
      break;
    }
    const double drop = f_mode - value;
    if (drop >= options.drop_threshold) {
      t_cross = (drop > prev_drop) ? (t - 1) + (options.drop_threshold - prev_drop) / (drop - prev_drop)
                                   : double(t);
      break;
    }
    prev_drop = std::max(prev_drop, drop);
  }
  out.scale = std::max(t_cross / z_ref, 1e-3);

  const double spacing_theta = options.z_step * out.scale * direction.norm();
  for (int j = 1; j <= kMaxGrid; ++j) {
    const HyperParam theta = theta_mode + sign * double(j) * options.z_step * out.scale * direction;
    double value;
    try {
      value = log_posterior_theta(model, theta, lik, options);
    } catch (const NumericalError&) {
      ++out.dropped;
      break;
    }
    if (f_mode - value > options.drop_threshold) break;
    ThetaPoint point;
    point.theta = theta;
    point.log_post = value;
    point.axis = axis;
    point.step = sign * j;
    point.spacing = spacing_theta;
    out.points.push_back(std::move(point));
  }
  return out;
}

}  // namespace

ExploreResult explore_theta(const LatentModel& model, const Likelihood& lik, const HyperParam& theta_mode,
                            const Matrix& neg_hess, const InferenceOptions& options) {
  options.validate();
  model.check_theta(theta_mode);
  const Index h = theta_mode.size();
  if (neg_hess.rows() != h || neg_hess.cols() != h) throw InvalidData("neg_hess has wrong dimensions");

  Eigen::SelfAdjointEigenSolver<Matrix> eigs(neg_hess);
  if (eigs.info() != Eigen::Success || eigs.eigenvalues().minCoeff() <= 0)
    throw InvalidData("explore_theta: neg_hess must be positive definite");
  const Matrix directions = eigs.eigenvectors() * eigs.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal();

  const double f_mode = log_posterior_theta(model, theta_mode, lik, options);

  std::vector<HalfAxis> halves(size_t(2 * h));
  parallel_for(2 * h, options.threads, [&](Index idx) {
    const int axis = int(idx / 2);
    const int sign = (idx % 2 == 0) ? 1 : -1;
    halves[size_t(idx)] = explore_half_axis(model, lik, theta_mode, f_mode, directions.col(axis), axis, sign, options);
  });

  ExploreResult result;
  ThetaPoint mode;
  mode.theta = theta_mode;
  mode.log_post = f_mode;
  mode.axis = -1;
  mode.step = 0;
  result.points.push_back(std::move(mode));
  for (const auto& half : halves) {
    result.dropped_points += half.dropped;
    for (const auto& p : half.points) result.points.push_back(p);
  }
  std::sort(result.points.begin(), result.points.end(), [](const ThetaPoint& a, const ThetaPoint& b) {
    if (a.axis != b.axis) return a.axis < b.axis;
    return a.step < b.step;
  });

  double max_lp = kNegInf;
  for (const auto& p : result.points) max_lp = std::max(max_lp, p.log_post);
  double total = 0.0;
  for (auto& p : result.points) {
    p.weight = std::exp(p.log_post - max_lp);
    total += p.weight;
  }
  for (auto& p : result.points) p.weight /= total;
  return result;
}

namespace mixture {

double normal_cdf(double x, double mean, double sd) {
  if (sd <= 0.0) return x < mean ? 0.0 : (x > mean ? 1.0 : 0.5);
  return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

double mean(const Vector& means, const Vector& weights) { return weights.dot(means); }

double variance(const Vector& means, const Vector& sds, const Vector& weights) {
  const double mu = mean(means, weights);
  const double second = weights.dot((sds.array().square() + means.array().square()).matrix());
  return std::max(second - mu * mu, 0.0);
}

double quantile(double p, const Vector& means, const Vector& sds, const Vector& weights, double prob_tol) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (Index k = 0; k < means.size(); ++k) {
    const double pad = 10.0 * sds(k) + 1e-9 * (1.0 + std::abs(means(k)));
    lo = std::min(lo, means(k) - pad);
    hi = std::max(hi, means(k) + pad);
  }
  auto cdf = [&](double x) {
    double acc = 0.0;
    for (Index k = 0; k < means.size(); ++k) acc += weights(k) * normal_cdf(x, means(k), sds(k));
    return acc;
  };
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double value = cdf(mid);
    if (std::abs(value - p) <= prob_tol) return mid;
    (value < p ? lo : hi) = mid;
    if (hi - lo <= 1e-13 * std::max(1.0, std::abs(mid))) break;
  }
  return mid;
}

}  // namespace mixture

LatentMarginals latent_marginals(const LatentModel& model, const Likelihood& lik,
                                 const std::vector<ThetaPoint>& points, const InferenceOptions& options) {
  options.validate();
  if (points.empty()) throw InvalidData("latent_marginals: empty point set");
  const Index n_points = Index(points.size());
  const Index s = model.s();

  Matrix means(n_points, s), sds(n_points, s);
  parallel_for(n_points, options.threads, [&](Index k) {
    const GaussianApproxResult ga = gaussian_approx(model, points[size_t(k)].theta, lik, options);
    means.row(k) = ga.x_star.transpose();
    sds.row(k) = ga.sigma_star.diagonal().cwiseMax(0.0).cwiseSqrt().transpose();
  });

  Vector weights(n_points);
  for (Index k = 0; k < n_points; ++k) weights(k) = points[size_t(k)].weight;

  LatentMarginals result;
  result.latent.mean.resize(s);
  result.latent.sd.resize(s);
  result.latent.q025.resize(s);
  result.latent.q50.resize(s);
  result.latent.q975.resize(s);
  parallel_for(s, options.threads, [&](Index i) {
    const Vector m = means.col(i), sd = sds.col(i);
    result.latent.mean(i) = mixture::mean(m, weights);
    result.latent.sd(i) = std::sqrt(mixture::variance(m, sd, weights));
    result.latent.q025(i) = mixture::quantile(0.025, m, sd, weights);
    result.latent.q50(i) = mixture::quantile(0.5, m, sd, weights);
    result.latent.q975(i) = mixture::quantile(0.975, m, sd, weights);
  });

  const Index h = model.n_hyper;
  result.hyper.resize(size_t(h));
  for (Index c = 0; c < h; ++c) {
    std::vector<std::pair<double, double>> cells;
    for (const auto& p : points) cells.emplace_back(p.theta(c), p.weight);
    std::sort(cells.begin(), cells.end());
    std::vector<double> values, ws;
    for (const auto& [value, weight] : cells) {
      if (!values.empty() && values.back() == value) {
        ws.back() += weight;
      } else {
        values.push_back(value);
        ws.push_back(weight);
      }
    }
    result.hyper[size_t(c)].values = Eigen::Map<Vector>(values.data(), Index(values.size()));
    result.hyper[size_t(c)].weights = Eigen::Map<Vector>(ws.data(), Index(ws.size()));
  }
  return result;
}

ModelCriteria model_criteria(const LatentModel& model, const Likelihood& lik, const std::vector<ThetaPoint>& points,
                             const InferenceOptions& options) {
  options.validate();
  if (points.empty()) throw InvalidData("model_criteria: empty point set");
  const Index n_points = Index(points.size());

  Vector logliks(n_points);
  Matrix means(n_points, model.s());
  parallel_for(n_points, options.threads, [&](Index k) {
    const GaussianApproxResult ga = gaussian_approx(model, points[size_t(k)].theta, lik, options);
    logliks(k) = ga.loglik_at_mode;
    means.row(k) = ga.x_star.transpose();
  });

  double deviance_bar = 0.0;
  Vector x_bar = Vector::Zero(model.s());
  for (Index k = 0; k < n_points; ++k) {
    deviance_bar += points[size_t(k)].weight * (-2.0 * logliks(k));
    x_bar += points[size_t(k)].weight * means.row(k).transpose();
  }
  const double deviance_at_mean = -2.0 * lik.terms(model.A * x_bar).loglik;
  ModelCriteria criteria;
  criteria.dic = 2.0 * deviance_bar - deviance_at_mean;

  // Riemann evidence on the axis grid: separable product of per-axis sums of
  // exp(log_post - mode) times theta-space cell widths
  const ThetaPoint* mode = nullptr;
  int max_axis = -1;
  for (const auto& p : points) {
    if (p.axis < 0) mode = &p;
    max_axis = std::max(max_axis, p.axis);
  }
  if (mode == nullptr) throw InvalidData("model_criteria: point set has no mode entry");
  double log_mlik = mode->log_post;
  for (int axis = 0; axis <= max_axis; ++axis) {
    double pos_width = 0.0, neg_width = 0.0, axis_sum = 0.0;
    for (const auto& p : points) {
      if (p.axis != axis) continue;
      axis_sum += std::exp(p.log_post - mode->log_post) * p.spacing;
      if (p.step == 1) pos_width = p.spacing;
      if (p.step == -1) neg_width = p.spacing;
    }
    if (pos_width == 0.0) pos_width = neg_width;
    if (neg_width == 0.0) neg_width = pos_width;
    double mode_width = 0.5 * (pos_width + neg_width);
    if (mode_width == 0.0) mode_width = 1.0;  // axis lost every point; degenerate fallback
    axis_sum += mode_width;
    log_mlik += std::log(axis_sum);
  }
  criteria.log_mlik = log_mlik;
  return criteria;
}

FitResult fit(const LatentModel& model, const Likelihood& lik, const InferenceOptions& options) {
  options.validate();
  const auto t_start = std::chrono::steady_clock::now();
  FitResult result;

  auto t_stage = std::chrono::steady_clock::now();
  HyperParam theta_mode;
  try {
    OptimizeResult opt = optimize_theta(model, lik, Vector::Zero(model.n_hyper), options);
    theta_mode = opt.theta_mode;
    result.neg_hess_at_mode = opt.neg_hess;
    result.diagnostics.optimizer_iterations = opt.iterations;
    result.diagnostics.optimizer_converged = opt.converged;
    result.diagnostics.gradient_inf_norm = opt.gradient_inf_norm;
  } catch (const NotConverged& error) {
    if (error.last_iterate.size() != model.n_hyper) throw;
    // continue with partial results around the last iterate
    theta_mode = error.last_iterate;
    result.diagnostics.optimizer_converged = false;
    result.diagnostics.optimizer_iterations = options.max_optimizer_iter;
    result.diagnostics.gradient_inf_norm = std::numeric_limits<double>::quiet_NaN();
    result.neg_hess_at_mode = neg_hessian_by_differences(model, lik, theta_mode, options);
  }
  result.theta_mode = theta_mode;
  result.runtime.optimize_s = seconds_since(t_stage);

  t_stage = std::chrono::steady_clock::now();
  ExploreResult explored = explore_theta(model, lik, theta_mode, result.neg_hess_at_mode, options);
  result.points = std::move(explored.points);
  result.diagnostics.dropped_points = explored.dropped_points;
  result.diagnostics.newton_iterations_at_mode = gaussian_approx(model, theta_mode, lik, options).iterations;
  result.runtime.explore_s = seconds_since(t_stage);

  t_stage = std::chrono::steady_clock::now();
  LatentMarginals marginals = latent_marginals(model, lik, result.points, options);
  result.latent = std::move(marginals.latent);
  result.hyper = std::move(marginals.hyper);
  result.runtime.marginals_s = seconds_since(t_stage);

  t_stage = std::chrono::steady_clock::now();
  const ModelCriteria criteria = model_criteria(model, lik, result.points, options);
  result.dic = criteria.dic;
  result.log_mlik = criteria.log_mlik;
  result.runtime.criteria_s = seconds_since(t_stage);

  result.runtime.total_s = seconds_since(t_start);
  return result;
}

}  // namespace stinla

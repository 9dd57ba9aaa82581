#pragma once

#include "stinla/inference.hpp"

namespace stinla {

/// Diagonal jitter used by the sparse-style reference path that regularizes
/// an improper precision before correcting for constraints.
struct KrigingConfig {
  double jitter = 1e-4;
};

struct KrigingResult {
  Vector mean;
  Matrix cov;
};

/// Conditions a Gaussian (mean, cov) on C x = 0 through the joint-Gaussian
/// formulas; afterwards C mean = 0 and C cov = 0.
KrigingResult kriging_correct(const Vector& mean_un, const SymMatrix& cov_un, const Matrix& constraints);

/// Draws from N(0, (tau R + jitter I)^{-1}) and projects each draw onto the
/// null-space constraints of R by kriging. Rows are samples. Fully
/// deterministic in the seed.
Matrix sample_constrained_igmrf(const StructureMatrix& structure, double tau, Index count, std::uint64_t seed,
                                const KrigingConfig& config = {});

/// Reference posterior over a finite theta grid for tiny models: integrates
/// likelihood x constrained prior over the range subspace with adaptive
/// tensor Gauss-Hermite quadrature (centered and scaled by the Gaussian
/// approximation), then normalizes. Requires s - k <= 4.
Vector brute_force_theta_posterior(const LatentModel& model, const Likelihood& lik,
                                   const std::vector<HyperParam>& theta_grid, int nodes_per_dim = 30,
                                   int threads = 1);

/// Max elementwise gap between the two covariance routes at a fixed
/// likelihood precision: (a) Woodbury on the pseudo-inverse prior versus
/// (b) jitter-regularized inverse corrected by kriging.
double equivalence_check(const LatentModel& model, const HyperParam& theta, const Matrix& lik_prec,
                         const KrigingConfig& config = {});

/// Physicists' Gauss-Hermite rule (weight exp(-x^2)) by Golub-Welsch.
void gauss_hermite(int n, Vector& nodes, Vector& weights);

}  // namespace stinla

#pragma once

#include <string>
#include <vector>

#include "stinla/structure.hpp"

namespace stinla {

/// Hyperparameters are log precisions; for the full spatiotemporal model the
/// order is (log tau_alpha, log tau_gamma, log tau_delta, log tau_phi,
/// log tau_eps).
using HyperParam = Vector;

struct LayoutBlock {
  std::string name;
  Index offset = 0;
  Index size = 0;
};

struct LatentLayout {
  std::vector<LayoutBlock> blocks;
  Index total = 0;

  const LayoutBlock& find(const std::string& name) const;
};

enum class PriorKind { PcIndependent, PcJoint };

struct PcTail {
  double u = 1.0;  // P(sigma > u) = a
  double a = 0.01;
};

struct PriorSpec {
  PriorKind kind = PriorKind::PcJoint;
  // joint variance partitioning constants
  double u1 = 0.5;
  double u2 = 1.0 / 0.31;
  double a1 = 0.99;
  double a2 = 0.01;
  // one tail condition per hyperparameter when independent
  std::vector<PcTail> per_precision;
};

/// Variance partition (theta_1 > 0 total precision, theta_2..theta_5 in (0,1)
/// splitting interaction / spatial / unstructured shares).
using PartitionParams = Vector;

struct ObsIndex {
  Index time = 1;   // i in 1..n
  Index space = 1;  // j in 1..m
};

/// Declaration of the full spatiotemporal model of the disease-mapping form
///   eta_ij = mu + sum_k beta_k z_ijk + alpha_i + gamma_i + delta_j + phi_j + eps_ij.
struct ModelSpec {
  Index n = 0;  // time points
  Index m = 0;  // areas
  Index K = 0;  // covariates
  InteractionType interaction;
  GraphSpec graph;
  PriorSpec prior;
  double intercept_prec = 0.001;
  Vector fixed_prec;  // per-covariate Gaussian precision, defaults to 0.001

  void validate() const;
};

LatentLayout build_layout(const ModelSpec& spec);

Matrix build_design_matrix(const ModelSpec& spec, const std::vector<ObsIndex>& observations,
                           const Matrix& covariates = Matrix());

// ---- assembled form consumed by the inference engine ----

/// One latent block with everything precomputed that does not depend on the
/// block's precision parameter: spectrum of the (scaled) structure, its
/// pseudo-inverse, generalized log-determinant and null-space rows.
struct ModelBlock {
  std::string name;
  Index offset = 0;
  Index size = 0;
  int hyper = -1;     // index into theta; -1 for fixed-precision blocks
  Vector fixed_prec;  // used when hyper < 0
  // structured path
  Matrix structure;  // R (scaled unless assembly was asked not to)
  Index nullity = 0;
  Matrix pinv;
  Vector eigenvalues;
  Matrix eigenvectors;
  double glogdet = 0.0;
};

struct LatentModel {
  std::vector<ModelBlock> blocks;
  LatentLayout layout;
  int n_hyper = 0;
  PriorSpec prior;
  Matrix A;  // design, d x s
  Matrix C;  // constraint basis, k x s

  // range of the latent prior: s x (s-k) orthonormal columns with the
  // structure eigenvalue and owning block recorded per column
  Matrix range_basis;
  Vector range_struct_eig;
  std::vector<int> range_block;
  Matrix design_range;  // A * range_basis, cached for the curvature projection

  Index s() const { return layout.total; }
  Index n_constraints() const { return C.rows(); }
  Index data_size() const { return A.rows(); }

  const ModelBlock& block(const std::string& name) const;

  /// Block-diagonal generalized inverse of the latent precision at theta.
  Matrix prior_geninv(const HyperParam& theta) const;
  /// Block-diagonal (rank-deficient) latent precision at theta.
  Matrix prior_precision(const HyperParam& theta) const;
  /// Eigenvalues of the latent precision on its range, per range column.
  Vector range_prec_eigenvalues(const HyperParam& theta) const;
  double glogdet_precision(const HyperParam& theta) const;
  double prior_quadratic_form(const HyperParam& theta, const Vector& x) const;

  void check_theta(const HyperParam& theta) const;
};

/// Block descriptor for assembling general models (used by the CLI grammar
/// and by reduced test models).
struct BlockSpec {
  std::string name;
  Vector fixed_prec;            // non-empty => fixed proper block
  StructureMatrix structure;    // otherwise tied to theta[hyper]
  int hyper = -1;
};

LatentModel assemble_blocks(std::vector<BlockSpec> specs, const PriorSpec& prior, const Matrix& design);

/// Canonical assembly of the spatiotemporal model: structures are scaled
/// before Kronecker products unless scale_structures is false (golden tests).
LatentModel assemble(const ModelSpec& spec, const std::vector<ObsIndex>& observations,
                     const Matrix& covariates = Matrix(), bool scale_structures = true);

struct LatentPriorGenInv {
  SymMatrix matrix;
  Index nullity = 0;
};

LatentPriorGenInv assemble_prior_geninv(const LatentModel& model, const HyperParam& theta);

/// Stacked per-block null-space rows, embedded at each block's offset.
Matrix constraint_basis(const LatentModel& model);

// ---- hyperparameter parameterizations and priors ----

/// Maps variance partitions to log precisions:
///   1/tau_alpha = (1/t1)(1-t2)(1-t3)(1-t4)      1/tau_gamma = (1/t1)(1-t2)(1-t3)t4
///   1/tau_delta = (1/t1)(1-t2)t3(1-t5)          1/tau_phi   = (1/t1)(1-t2)t3 t5
///   1/tau_eps   = (1/t1)t2
/// so the five variances sum to the total 1/t1.
HyperParam partition_to_precisions(const PartitionParams& v);

/// Inverse of partition_to_precisions (also the map differentiated for the
/// prior's change-of-variables Jacobian).
PartitionParams precisions_to_partition(const HyperParam& theta);

/// Tail rate of a PC prior on a standard deviation: P(sigma > u) = a.
double pc_prior_rate(double u, double a);

/// Rate b of the joint prior's mixing component, the root of
///   (1 - exp(-b sqrt(u1))) / (1 - exp(-b)) = a1
/// found by bisection on (0, 50).
double pc_joint_b(double u1, double a1);

double log_prior(const HyperParam& theta, const PriorSpec& spec);

}  // namespace stinla

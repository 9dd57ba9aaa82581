#include "stinla/model.hpp"

#include <cmath>

namespace stinla {

const LayoutBlock& LatentLayout::find(const std::string& name) const {
  for (const auto& b : blocks)
    if (b.name == name) return b;
  throw InvalidData("layout has no block named " + name);
}

void ModelSpec::validate() const {
  if (interaction.temporal_order != 1 && interaction.temporal_order != 2)
    throw InvalidSize("temporal order must be 1 or 2");
  if (n <= interaction.temporal_order) throw InvalidSize("need n > temporal order");
  if (m < 2) throw InvalidSize("need m >= 2");
  if (K < 0) throw InvalidSize("negative covariate count");
  if (intercept_prec <= 0) throw InvalidData("intercept precision must be positive");
  if (graph.n_nodes != m) throw InvalidGraph("graph size does not match m");
  if (fixed_prec.size() != 0 && fixed_prec.size() != K) throw InvalidData("fixed_prec must have K entries");
}

LatentLayout build_layout(const ModelSpec& spec) {
  spec.validate();
  LatentLayout layout;
  Index offset = 0;
  auto push = [&](const std::string& name, Index size) {
    if (size > 0) layout.blocks.push_back({name, offset, size});
    offset += size;
  };
  push("mu", 1);
  push("beta", spec.K);
  push("alpha", spec.n);
  push("gamma", spec.n);
  push("delta", spec.m);
  push("phi", spec.m);
  push("eps", spec.n * spec.m);
  layout.total = offset;
  return layout;
}

Matrix build_design_matrix(const ModelSpec& spec, const std::vector<ObsIndex>& observations,
                           const Matrix& covariates) {
  const LatentLayout layout = build_layout(spec);
  const Index d = Index(observations.size());
  if (spec.K > 0 && (covariates.rows() != d || covariates.cols() != spec.K))
    throw InvalidData("covariate matrix must be d x K");
  Matrix A = Matrix::Zero(d, layout.total);
  const Index o_alpha = layout.find("alpha").offset;
  const Index o_gamma = layout.find("gamma").offset;
  const Index o_delta = layout.find("delta").offset;
  const Index o_phi = layout.find("phi").offset;
  const Index o_eps = layout.find("eps").offset;
  for (Index r = 0; r < d; ++r) {
    const Index i = observations[r].time, j = observations[r].space;
    if (i < 1 || i > spec.n || j < 1 || j > spec.m)
      throw InvalidData("observation " + std::to_string(r + 1) + " has (time, space) out of range");
    A(r, 0) = 1.0;
    for (Index k = 0; k < spec.K; ++k) A(r, 1 + k) = covariates(r, k);
    A(r, o_alpha + i - 1) = 1.0;
    A(r, o_gamma + i - 1) = 1.0;
    A(r, o_delta + j - 1) = 1.0;
    A(r, o_phi + j - 1) = 1.0;
    A(r, o_eps + (i - 1) * spec.m + (j - 1)) = 1.0;
  }
  return A;
}

const ModelBlock& LatentModel::block(const std::string& name) const {
  for (const auto& b : blocks)
    if (b.name == name) return b;
  throw InvalidData("model has no block named " + name);
}

void LatentModel::check_theta(const HyperParam& theta) const {
  if (theta.size() != n_hyper) throw InvalidData("theta has wrong dimension");
  if (!theta.allFinite()) throw NumericalFailure("theta has non-finite entries");
}

Matrix LatentModel::prior_geninv(const HyperParam& theta) const {
  check_theta(theta);
  Matrix out = Matrix::Zero(s(), s());
  for (const auto& b : blocks) {
    if (b.hyper < 0) {
      out.block(b.offset, b.offset, b.size, b.size) = b.fixed_prec.cwiseInverse().asDiagonal();
    } else {
      out.block(b.offset, b.offset, b.size, b.size) = b.pinv / std::exp(theta(b.hyper));
    }
  }
  return out;
}

Matrix LatentModel::prior_precision(const HyperParam& theta) const {
  check_theta(theta);
  Matrix out = Matrix::Zero(s(), s());
  for (const auto& b : blocks) {
    if (b.hyper < 0) {
      out.block(b.offset, b.offset, b.size, b.size) = b.fixed_prec.asDiagonal();
    } else {
      out.block(b.offset, b.offset, b.size, b.size) = b.structure * std::exp(theta(b.hyper));
    }
  }
  return out;
}

Vector LatentModel::range_prec_eigenvalues(const HyperParam& theta) const {
  check_theta(theta);
  Vector out(range_struct_eig.size());
  for (Index c = 0; c < out.size(); ++c) {
    const int b = range_block[size_t(c)];
    const int h = blocks[size_t(b)].hyper;
    out(c) = h < 0 ? range_struct_eig(c) : range_struct_eig(c) * std::exp(theta(h));
  }
  return out;
}

double LatentModel::glogdet_precision(const HyperParam& theta) const {
  return range_prec_eigenvalues(theta).array().log().sum();
}

double LatentModel::prior_quadratic_form(const HyperParam& theta, const Vector& x) const {
  check_theta(theta);
  double quad = 0.0;
  for (const auto& b : blocks) {
    const auto seg = x.segment(b.offset, b.size);
    if (b.hyper < 0) {
      quad += seg.dot(b.fixed_prec.cwiseProduct(seg));
    } else {
      quad += std::exp(theta(b.hyper)) * seg.dot(b.structure * seg);
    }
  }
  return quad;
}

LatentModel assemble_blocks(std::vector<BlockSpec> specs, const PriorSpec& prior, const Matrix& design) {
  LatentModel model;
  model.prior = prior;
  Index offset = 0;
  Index total_null = 0;
  int max_hyper = -1;
  for (auto& bs : specs) {
    ModelBlock mb;
    mb.name = bs.name;
    mb.offset = offset;
    mb.hyper = bs.hyper;
    if (bs.fixed_prec.size() > 0) {
      if (bs.hyper >= 0) throw InvalidData("block " + bs.name + " cannot be both fixed and hyper-tied");
      if ((bs.fixed_prec.array() <= 0).any()) throw InvalidData("fixed precisions must be positive");
      mb.size = bs.fixed_prec.size();
      mb.fixed_prec = std::move(bs.fixed_prec);
    } else {
      if (bs.hyper < 0) throw InvalidData("structured block " + bs.name + " needs a hyperparameter index");
      mb.size = bs.structure.matrix.dim();
      mb.structure = bs.structure.matrix.mat();
      mb.nullity = bs.structure.nullity;
      const EigenDecomp decomp = eigendecompose(bs.structure.matrix);
      const Index observed = count_null_eigenvalues(decomp.eigenvalues, bs.structure.rank_info().tolerance);
      if (observed != mb.nullity)
        throw RankMismatch("block " + bs.name + ": declared nullity " + std::to_string(mb.nullity) +
                           " but spectrum has " + std::to_string(observed));
      mb.eigenvalues = decomp.eigenvalues;
      mb.eigenvectors = decomp.eigenvectors;
      const Index r = mb.size - mb.nullity;
      mb.pinv = decomp.eigenvectors.rightCols(r) * decomp.eigenvalues.tail(r).cwiseInverse().asDiagonal() *
                decomp.eigenvectors.rightCols(r).transpose();
      mb.pinv = 0.5 * (mb.pinv + mb.pinv.transpose()).eval();
      mb.glogdet = decomp.eigenvalues.tail(r).array().log().sum();
      total_null += mb.nullity;
    }
    max_hyper = std::max(max_hyper, mb.hyper);
    model.layout.blocks.push_back({mb.name, mb.offset, mb.size});
    offset += mb.size;
    model.blocks.push_back(std::move(mb));
  }
  model.layout.total = offset;
  model.n_hyper = max_hyper + 1;
  if (design.cols() != offset) throw InvalidData("design matrix has wrong number of columns");
  model.A = design;

  const Index s = offset;
  model.C = Matrix::Zero(total_null, s);
  model.range_basis = Matrix::Zero(s, s - total_null);
  model.range_struct_eig.resize(s - total_null);
  Index crow = 0, rcol = 0;
  for (size_t bi = 0; bi < model.blocks.size(); ++bi) {
    const auto& b = model.blocks[bi];
    if (b.hyper < 0) {
      for (Index i = 0; i < b.size; ++i) {
        model.range_basis(b.offset + i, rcol) = 1.0;
        model.range_struct_eig(rcol) = b.fixed_prec(i);
        model.range_block.push_back(int(bi));
        ++rcol;
      }
    } else {
      model.C.block(crow, b.offset, b.nullity, b.size) = b.eigenvectors.leftCols(b.nullity).transpose();
      crow += b.nullity;
      const Index r = b.size - b.nullity;
      model.range_basis.block(b.offset, rcol, b.size, r) = b.eigenvectors.rightCols(r);
      for (Index i = 0; i < r; ++i) {
        model.range_struct_eig(rcol + i) = b.eigenvalues(b.nullity + i);
        model.range_block.push_back(int(bi));
      }
      rcol += r;
    }
  }
  model.design_range = model.A * model.range_basis;
  return model;
}

LatentModel assemble(const ModelSpec& spec, const std::vector<ObsIndex>& observations, const Matrix& covariates,
                     bool scale_structures) {
  spec.validate();
  const int l = spec.interaction.temporal_order;
  StructureMatrix rw = build_rw(spec.n, l);
  StructureMatrix besag = build_besag(spec.graph);
  if (scale_structures) {
    rw = scale_structure(rw);
    besag = scale_structure(besag);
  }
  StructureMatrix interaction;
  switch (spec.interaction.kind) {
    case InteractionKind::I: interaction = build_iid(spec.n * spec.m); break;
    case InteractionKind::II: interaction = kronecker_structure(rw, build_iid(spec.m)); break;
    case InteractionKind::III: interaction = kronecker_structure(build_iid(spec.n), besag); break;
    case InteractionKind::IV: interaction = kronecker_structure(rw, besag); break;
  }

  std::vector<BlockSpec> blocks;
  BlockSpec mu;
  mu.name = "mu";
  mu.fixed_prec = Vector::Constant(1, spec.intercept_prec);
  blocks.push_back(std::move(mu));
  if (spec.K > 0) {
    BlockSpec beta;
    beta.name = "beta";
    beta.fixed_prec = spec.fixed_prec.size() ? spec.fixed_prec : Vector::Constant(spec.K, 0.001);
    blocks.push_back(std::move(beta));
  }
  blocks.push_back({"alpha", Vector(), std::move(rw), 0});
  blocks.push_back({"gamma", Vector(), build_iid(spec.n), 1});
  blocks.push_back({"delta", Vector(), std::move(besag), 2});
  blocks.push_back({"phi", Vector(), build_iid(spec.m), 3});
  blocks.push_back({"eps", Vector(), std::move(interaction), 4});

  return assemble_blocks(std::move(blocks), spec.prior, build_design_matrix(spec, observations, covariates));
}

LatentPriorGenInv assemble_prior_geninv(const LatentModel& model, const HyperParam& theta) {
  return {SymMatrix(model.prior_geninv(theta)), model.n_constraints()};
}

Matrix constraint_basis(const LatentModel& model) { return model.C; }

HyperParam partition_to_precisions(const PartitionParams& v) {
  if (v.size() != 5) throw InvalidData("partition parameters must have 5 entries");
  if (!(v(0) > 0)) throw DegenerateParams("partition theta_1 must be positive");
  for (Index i = 1; i < 5; ++i)
    if (!(v(i) > 0 && v(i) < 1)) throw DegenerateParams("partition theta_" + std::to_string(i + 1) + " not in (0,1)");
  const double total = 1.0 / v(0);
  Vector variances(5);
  variances(0) = total * (1 - v(1)) * (1 - v(2)) * (1 - v(3));
  variances(1) = total * (1 - v(1)) * (1 - v(2)) * v(3);
  variances(2) = total * (1 - v(1)) * v(2) * (1 - v(4));
  variances(3) = total * (1 - v(1)) * v(2) * v(4);
  variances(4) = total * v(1);
  if (!variances.allFinite() || (variances.array() <= 0).any())
    throw DegenerateParams("partition maps to a zero or non-finite variance");
  return -variances.array().log();
}

PartitionParams precisions_to_partition(const HyperParam& theta) {
  if (theta.size() != 5) throw InvalidData("expected 5 log precisions");
  const Vector v = (-theta.array()).exp();
  const double total = v.sum();
  const double main = v(0) + v(1) + v(2) + v(3);
  PartitionParams out(5);
  out(0) = 1.0 / total;
  out(1) = v(4) / total;
  out(2) = (v(2) + v(3)) / main;
  out(3) = v(1) / (v(0) + v(1));
  out(4) = v(3) / (v(2) + v(3));
  return out;
}

double pc_prior_rate(double u, double a) {
  if (!(u > 0) || !(a > 0 && a < 1)) throw InvalidData("PC tail needs u > 0 and a in (0,1)");
  return -std::log(a) / u;
}

double pc_joint_b(double u1, double a1) {
  if (!(u1 > 0 && u1 < 1) || !(a1 > 0 && a1 < 1)) throw InvalidData("pc_joint_b needs u1, a1 in (0,1)");
  const double root_u = std::sqrt(u1);
  auto f = [&](double b) { return (1 - std::exp(-b * root_u)) / (1 - std::exp(-b)) - a1; };
  double lo = 1e-8, hi = 50.0;
  if (f(lo) * f(hi) > 0) throw NumericalFailure("pc_joint_b: no sign change on (0, 50)");
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(lo) * f(mid) <= 0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

double log_prior_pc_joint(const HyperParam& theta, const PriorSpec& spec) {
  const double lambda = pc_prior_rate(spec.u2, spec.a2);
  const double b = pc_joint_b(spec.u1, spec.a1);
  const Vector v = (-theta.array()).exp();
  const double total = v.sum();
  double lp = std::log(lambda * b / 4.0) - std::log1p(-std::exp(-b));
  lp += 0.5 * theta(4) + 2.0 * std::log(total);
  lp += -lambda * std::sqrt(total) - b * std::sqrt(v(4) / total);

  // change of variables: |d vartheta / d theta| by central differences
  const double h = 1e-5;
  Matrix jac(5, 5);
  for (Index j = 0; j < 5; ++j) {
    HyperParam plus = theta, minus = theta;
    plus(j) += h;
    minus(j) -= h;
    jac.col(j) = (precisions_to_partition(plus) - precisions_to_partition(minus)) / (2 * h);
  }
  const double det = jac.determinant();
  if (det == 0.0 || !std::isfinite(det)) throw NumericalFailure("log_prior: degenerate partition Jacobian");
  return lp + std::log(std::abs(det));
}

}  // namespace

double log_prior(const HyperParam& theta, const PriorSpec& spec) {
  if (!theta.allFinite()) throw NumericalFailure("log_prior: non-finite theta");
  double lp = 0.0;
  if (spec.kind == PriorKind::PcJoint) {
    if (theta.size() != 5) throw InvalidData("joint prior requires the 5 canonical hyperparameters");
    lp = log_prior_pc_joint(theta, spec);
  } else {
    if (Index(spec.per_precision.size()) != theta.size())
      throw InvalidData("independent prior needs one (u, a) pair per hyperparameter");
    for (Index i = 0; i < theta.size(); ++i) {
      const double rate = pc_prior_rate(spec.per_precision[size_t(i)].u, spec.per_precision[size_t(i)].a);
      const double sigma = std::exp(-0.5 * theta(i));
      lp += std::log(0.5 * rate) - rate * sigma - 0.5 * theta(i);
    }
  }
  if (!std::isfinite(lp)) throw NumericalFailure("log_prior: non-finite density");
  return lp;
}

}  // namespace stinla

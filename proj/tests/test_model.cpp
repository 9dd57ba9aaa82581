#include <doctest.h>

#include "golden.hpp"
#include "stinla/model.hpp"
#include "stinla/parallel.hpp"
#include "support.hpp"

using namespace stinla;

namespace {

ModelSpec small_spec(Index n, Index m, InteractionKind kind, int order) {
  ModelSpec spec;
  spec.n = n;
  spec.m = m;
  spec.interaction = {kind, order};
  spec.graph = path_graph(m);
  spec.prior = testsupport::independent_prior(5);
  return spec;
}

std::vector<ObsIndex> all_cells(Index n, Index m) {
  std::vector<ObsIndex> obs;
  for (Index i = 1; i <= n; ++i)
    for (Index j = 1; j <= m; ++j) obs.push_back({i, j});
  return obs;
}

}  // namespace

TEST_CASE("build_layout sizes") {
  CHECK(build_layout(small_spec(2, 3, InteractionKind::I, 1)).total == 17);
  CHECK(build_layout(small_spec(100, 10, InteractionKind::IV, 2)).total == 1221);
  CHECK(build_layout(small_spec(5, 200, InteractionKind::IV, 2)).total == 1411);
  const LatentLayout layout = build_layout(small_spec(4, 3, InteractionKind::II, 1));
  CHECK(layout.find("eps").size == 12);
  CHECK(layout.find("eps").offset == 1 + 4 + 4 + 3 + 3);
}

TEST_CASE("build_design_matrix selectors") {
  const ModelSpec spec = small_spec(3, 2, InteractionKind::I, 1);
  const Matrix a = build_design_matrix(spec, {{1, 1}, {3, 2}, {3, 2}});
  const LatentLayout layout = build_layout(spec);
  REQUIRE(a.rows() == 3);
  REQUIRE(a.cols() == layout.total);
  // observation (1,1): ones at mu, alpha_1, gamma_1, delta_1, phi_1, eps_11
  CHECK(a.row(0).sum() == 6);
  CHECK(a(0, 0) == 1.0);
  CHECK(a(0, layout.find("alpha").offset) == 1.0);
  CHECK(a(0, layout.find("gamma").offset) == 1.0);
  CHECK(a(0, layout.find("delta").offset) == 1.0);
  CHECK(a(0, layout.find("phi").offset) == 1.0);
  CHECK(a(0, layout.find("eps").offset) == 1.0);
  // duplicated observations give identical rows
  CHECK((a.row(1) - a.row(2)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a(1, layout.find("eps").offset + 2 * 2 + 1) == 1.0);  // eps_{3,2}, time-major

  CHECK_THROWS_AS(build_design_matrix(spec, {{4, 1}}), InvalidData);
  CHECK_THROWS_AS(build_design_matrix(spec, {{1, 3}}), InvalidData);
}

TEST_CASE("design matrix maps a pure intercept to a constant predictor") {
  const ModelSpec spec = small_spec(3, 4, InteractionKind::II, 1);
  const Matrix a = build_design_matrix(spec, all_cells(3, 4));
  Vector x = Vector::Zero(a.cols());
  x(0) = 2.5;
  const Vector eta = a * x;
  CHECK((eta.array() - 2.5).abs().maxCoeff() == 0.0);
}

TEST_CASE("assemble_prior_geninv on iid-only blocks is the identity") {
  std::vector<BlockSpec> blocks;
  blocks.push_back({"u", Vector(), build_iid(3), 0});
  blocks.push_back({"v", Vector(), build_iid(2), 1});
  const LatentModel model =
      assemble_blocks(std::move(blocks), testsupport::independent_prior(2), Matrix::Identity(5, 5));
  const LatentPriorGenInv geninv = assemble_prior_geninv(model, Vector::Zero(2));
  CHECK((geninv.matrix.mat() - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(geninv.nullity == 0);
  CHECK(constraint_basis(model).rows() == 0);
}

TEST_CASE("assemble_prior_geninv scales linearly in the precision") {
  const LatentModel model = testsupport::tiny_rw_model(4, 1, testsupport::independent_prior(1));
  const Matrix at_two = assemble_prior_geninv(model, Vector::Constant(1, std::log(2.0))).matrix.mat();
  CHECK((at_two - 0.5 * golden::rw1_4_pinv()).cwiseAbs().maxCoeff() < 0.001);
  const Matrix at_one = assemble_prior_geninv(model, Vector::Zero(1)).matrix.mat();
  CHECK((at_one - 2.0 * at_two).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("full-model prior generalized inverse: block scaling and nullity") {
  const ModelSpec spec = small_spec(4, 3, InteractionKind::IV, 2);
  const LatentModel model = assemble(spec, all_cells(4, 3));
  Vector theta = Vector::Zero(5);
  const LatentPriorGenInv base = assemble_prior_geninv(model, theta);
  theta(4) = std::log(2.0);
  const LatentPriorGenInv doubled = assemble_prior_geninv(model, theta);
  const auto& eps = model.layout.find("eps");
  const Matrix diff = 2.0 * doubled.matrix.mat().block(eps.offset, eps.offset, eps.size, eps.size) -
                      base.matrix.mat().block(eps.offset, eps.offset, eps.size, eps.size);
  CHECK(diff.cwiseAbs().maxCoeff() < 1e-12);
  // alpha(2) + delta(1) + interaction (n + 2m - 2 = 8)
  CHECK(base.nullity == 11);
  CHECK((model.C * base.matrix.mat()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("constraint_basis rows for type I") {
  const ModelSpec spec = small_spec(4, 3, InteractionKind::I, 2);
  const LatentModel model = assemble(spec, all_cells(4, 3));
  const Matrix c = constraint_basis(model);
  REQUIRE(c.rows() == 3);  // matches constraint_count(I, l = 2)
  CHECK((c * c.transpose() - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);

  const auto& alpha = model.layout.find("alpha");
  const auto& delta = model.layout.find("delta");
  // two rows act on alpha and span {1, (1,2,3,4)}, one row acts on delta
  const Matrix alpha_rows = c.block(0, alpha.offset, 2, alpha.size);
  for (Vector v : {Vector(Vector::Ones(4)), Vector((Vector(4) << 1, 2, 3, 4).finished())}) {
    const Vector projected = alpha_rows.transpose() * (alpha_rows * v);
    CHECK((projected - v).norm() < 1e-8);
  }
  const Vector delta_row = c.row(2).segment(delta.offset, delta.size);
  CHECK(std::abs(std::abs(delta_row.dot(Vector::Ones(3).normalized())) - 1.0) < 1e-10);
  // nothing outside the owning blocks
  CHECK(c.block(0, 0, 3, 1).cwiseAbs().maxCoeff() == 0.0);
  const auto& eps = model.layout.find("eps");
  CHECK(c.block(0, eps.offset, 3, eps.size).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("constraint_basis adds the interaction null space for type IV") {
  const ModelSpec spec = small_spec(4, 3, InteractionKind::IV, 2);
  const LatentModel model = assemble(spec, all_cells(4, 3));
  const Matrix c = constraint_basis(model);
  CHECK(c.rows() == 11);
  const auto& eps = model.layout.find("eps");
  const Matrix eps_rows = c.block(3, eps.offset, 8, eps.size);
  // those rows annihilate the interaction structure
  CHECK((eps_rows * model.block("eps").structure).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((c * c.transpose() - Matrix::Identity(11, 11)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("partition_to_precisions reproduces the reported posterior means") {
  PartitionParams v(5);
  v << 26.404, 0.028, 0.651, 0.604, 0.245;
  const HyperParam theta = partition_to_precisions(v);
  // chain product for the structured temporal variance
  CHECK(std::exp(-theta(0)) == doctest::Approx(5.09e-3).epsilon(2e-3));
  // direct substitution case
  PartitionParams half(5);
  half << 1.0, 0.5, 0.5, 0.5, 0.5;
  const HyperParam theta_half = partition_to_precisions(half);
  CHECK(std::exp(-theta_half(0)) == doctest::Approx(0.125));
  CHECK(std::exp(-theta_half(1)) == doctest::Approx(0.125));
}

TEST_CASE("partition limit: interaction share near one drains the main effects") {
  PartitionParams v(5);
  v << 1.0, 1.0 - 1e-9, 0.5, 0.5, 0.5;
  const HyperParam theta = partition_to_precisions(v);
  for (Index i = 0; i < 4; ++i) CHECK(std::exp(-theta(i)) < 1e-9);
  CHECK(std::exp(-theta(4)) == doctest::Approx(1.0 - 1e-9));
}

TEST_CASE("partition_to_precisions rejects degenerate inputs") {
  PartitionParams v(5);
  v << 1.0, 0.5, 0.5, 0.5, 0.5;
  v(1) = 0.0;
  CHECK_THROWS_AS(partition_to_precisions(v), DegenerateParams);
  v(1) = 1.0;
  CHECK_THROWS_AS(partition_to_precisions(v), DegenerateParams);
  v(1) = 0.5;
  v(0) = -1.0;
  CHECK_THROWS_AS(partition_to_precisions(v), DegenerateParams);
}

TEST_CASE("partition parameterization is injective: closed-form round trip") {
  RngStream rng(555, 0);
  for (int trial = 0; trial < 100; ++trial) {
    PartitionParams v(5);
    v(0) = 0.05 + 30.0 * rng.uniform();
    for (Index i = 1; i < 5; ++i) v(i) = 0.02 + 0.96 * rng.uniform();
    const HyperParam theta = partition_to_precisions(v);
    const PartitionParams back = precisions_to_partition(theta);
    CHECK((back - v).cwiseAbs().maxCoeff() < 1e-8);
    // every variance is bounded by the total
    const double total = 1.0 / v(0);
    for (Index i = 0; i < 5; ++i) CHECK(std::exp(-theta(i)) <= total * (1 + 1e-12));
  }
}

TEST_CASE("pc prior constants") {
  CHECK(pc_prior_rate(1.0 / 0.31, 0.01) == doctest::Approx(-std::log(0.01) * 0.31));
  const double b = pc_joint_b(0.5, 0.99);
  // the defining equation holds at the root
  CHECK((1 - std::exp(-b * std::sqrt(0.5))) / (1 - std::exp(-b)) == doctest::Approx(0.99).epsilon(1e-10));
  CHECK(b == doctest::Approx(6.2698).epsilon(1e-3));
}

TEST_CASE("independent PC prior matches the hand change of variables at tau = 1") {
  PriorSpec prior = testsupport::independent_prior(1, 1.0, 0.01);
  const double rate = -std::log(0.01);
  // pi(theta) = lambda exp(-lambda sigma) * sigma / 2 with sigma = exp(-theta/2)
  const double expected = std::log(rate) - rate * 1.0 + std::log(0.5);
  CHECK(log_prior(Vector::Zero(1), prior) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("joint prior integrates to one over a coarse grid") {
  PriorSpec prior;  // defaults: u1 = 0.5, u2 = 1/0.31, a1 = 0.99, a2 = 0.01
  const int points = 20;
  const double lo = -6.0, hi = 18.0;
  const double step = (hi - lo) / points;
  Vector grid(points);
  for (int i = 0; i < points; ++i) grid(i) = lo + step * (i + 0.5);

  const Index outer = points;
  Vector partial(outer);
  parallel_for(outer, 8, [&](Index i0) {
    double acc = 0.0;
    HyperParam theta(5);
    theta(0) = grid(i0);
    for (int i1 = 0; i1 < points; ++i1)
      for (int i2 = 0; i2 < points; ++i2)
        for (int i3 = 0; i3 < points; ++i3)
          for (int i4 = 0; i4 < points; ++i4) {
            theta(1) = grid(i1);
            theta(2) = grid(i2);
            theta(3) = grid(i3);
            theta(4) = grid(i4);
            acc += std::exp(log_prior(theta, prior));
          }
    partial(i0) = acc;
  });
  const double mass = partial.sum() * std::pow(step, 5);
  CHECK(mass == doctest::Approx(1.0).epsilon(0.15));
}

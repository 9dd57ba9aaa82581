#include <doctest.h>

#include "golden.hpp"
#include "stinla/dense.hpp"
#include "stinla/structure.hpp"
#include "support.hpp"

using namespace stinla;

namespace {
double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }
}  // namespace

TEST_CASE("SymMatrix enforces symmetry and squareness") {
  Matrix m(2, 2);
  m << 1.0, 0.3, 0.3 + 1e-12, 2.0;
  SymMatrix sym(m);
  CHECK(sym(0, 1) == sym(1, 0));
  CHECK_THROWS_AS(SymMatrix(Matrix::Zero(2, 3)), InvalidMatrix);
}

TEST_CASE("eigendecompose identity and diagonal") {
  const EigenDecomp id = eigendecompose(SymMatrix(Matrix::Identity(3, 3)));
  for (Index i = 0; i < 3; ++i) CHECK(id.eigenvalues(i) == doctest::Approx(1.0));
  CHECK(max_abs_diff(id.eigenvectors.transpose() * id.eigenvectors, Matrix::Identity(3, 3)) < 1e-10);

  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = 5.0;
  const EigenDecomp diag = eigendecompose(SymMatrix(d));
  CHECK(diag.eigenvalues(0) == doctest::Approx(2.0));
  CHECK(diag.eigenvalues(1) == doctest::Approx(5.0));
  CHECK(max_abs_diff(diag.eigenvectors.cwiseAbs(), Matrix::Identity(2, 2)) < 1e-12);
}

TEST_CASE("eigendecompose RW1(3) matches the brute-force eigensolver") {
  const SymMatrix rw1 = build_rw(3, 1).matrix;
  const EigenDecomp decomp = eigendecompose(rw1);
  // characteristic polynomial roots: 0, 1, 3
  CHECK(std::abs(decomp.eigenvalues(0)) < 1e-12);
  CHECK(decomp.eigenvalues(1) == doctest::Approx(1.0));
  CHECK(decomp.eigenvalues(2) == doctest::Approx(3.0));
  const Vector reference = testsupport::jacobi_eigenvalues(rw1.mat());
  CHECK((decomp.eigenvalues - reference).cwiseAbs().maxCoeff() < 1e-10);
  // reconstruction
  const Matrix rebuilt =
      decomp.eigenvectors * decomp.eigenvalues.asDiagonal() * decomp.eigenvectors.transpose();
  CHECK(max_abs_diff(rebuilt, rw1.mat()) < 1e-10);
}

TEST_CASE("eigendecompose rejects non-finite input") {
  Matrix bad = Matrix::Identity(2, 2);
  bad(0, 1) = bad(1, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(eigendecompose(SymMatrix(bad)), InvalidMatrix);
}

TEST_CASE("pseudo_inverse golden: RW1(6) against the printed matrix") {
  const StructureMatrix rw = build_rw(6, 1);
  const SymMatrix pinv = pseudo_inverse(rw.matrix, rw.rank_info());
  CHECK(max_abs_diff(pinv.mat(), golden::rw1_6_pinv()) < 0.01);
}

TEST_CASE("pseudo_inverse golden: RW1(4) against the printed matrix") {
  const StructureMatrix rw = build_rw(4, 1);
  const SymMatrix pinv = pseudo_inverse(rw.matrix, rw.rank_info());
  CHECK(max_abs_diff(pinv.mat(), golden::rw1_4_pinv()) < 0.001);
}

TEST_CASE("pseudo_inverse of the identity is the identity") {
  const SymMatrix pinv = pseudo_inverse(SymMatrix(Matrix::Identity(4, 4)), {0, 1e-9});
  CHECK(max_abs_diff(pinv.mat(), Matrix::Identity(4, 4)) < 1e-12);
}

TEST_CASE("pseudo_inverse validates the declared nullity") {
  const StructureMatrix rw = build_rw(4, 1);
  CHECK_THROWS_AS(pseudo_inverse(rw.matrix, {2, 1e-9}), RankMismatch);
  CHECK_THROWS_AS(pseudo_inverse(SymMatrix(Matrix::Identity(3, 3)), {1, 1e-9}), RankMismatch);
  CHECK_THROWS_AS(pseudo_inverse(rw.matrix, {4, 1e-9}), RankMismatch);
}

TEST_CASE("pseudo_inverse properties: involution, null space, projection") {
  for (auto [n, order] : {std::pair<Index, int>{5, 1}, {6, 2}, {8, 1}}) {
    const StructureMatrix rw = build_rw(n, order);
    const RankInfo rank = rw.rank_info();
    const SymMatrix pinv = pseudo_inverse(rw.matrix, rank);
    const SymMatrix back = pseudo_inverse(pinv, rank);
    const double rel = max_abs_diff(back.mat(), rw.matrix.mat()) / rw.matrix.mat().cwiseAbs().maxCoeff();
    CHECK(rel < 1e-8);
    // m v = 0 implies pinv v = 0
    const Matrix null_basis = null_space_basis(rw.matrix, rank);
    CHECK((pinv.mat() * null_basis.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    // pinv * m * pinv = pinv
    CHECK(max_abs_diff(pinv.mat() * rw.matrix.mat() * pinv.mat(), pinv.mat()) < 1e-8);
  }
}

TEST_CASE("generalized_log_det on known spectra") {
  const StructureMatrix rw3 = build_rw(3, 1);
  CHECK(generalized_log_det(rw3.matrix, rw3.rank_info()) == doctest::Approx(std::log(3.0)));
  CHECK(generalized_log_det(SymMatrix(Matrix::Identity(5, 5)), {0, 1e-9}) == doctest::Approx(0.0));
  const StructureMatrix rw2 = build_rw(2, 1);
  CHECK(generalized_log_det(rw2.matrix, rw2.rank_info()) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("generalized_log_det scaling identity") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const Index n = 5;
    const StructureMatrix rw = build_rw(n, 1);
    const double c = 0.25 + 3.0 * RngStream(seed, 0).uniform();
    const double base = generalized_log_det(rw.matrix, rw.rank_info());
    const double scaled = generalized_log_det(SymMatrix(c * rw.matrix.mat()), rw.rank_info());
    CHECK(scaled == doctest::Approx(base + double(n - 1) * std::log(c)).epsilon(1e-10));
  }
}

TEST_CASE("null_space_basis of RW1 and RW2") {
  const StructureMatrix rw1 = build_rw(4, 1);
  const Matrix basis1 = null_space_basis(rw1.matrix, rw1.rank_info());
  REQUIRE(basis1.rows() == 1);
  // single row proportional to ones
  const Vector ones = Vector::Ones(4) / 2.0;
  CHECK(std::abs(std::abs(basis1.row(0).dot(ones)) - 1.0) < 1e-10);

  const StructureMatrix rw2 = build_rw(4, 2);
  const Matrix basis2 = null_space_basis(rw2.matrix, rw2.rank_info());
  REQUIRE(basis2.rows() == 2);
  CHECK(max_abs_diff(basis2 * basis2.transpose(), Matrix::Identity(2, 2)) < 1e-10);
  CHECK((basis2 * rw2.matrix.mat()).cwiseAbs().maxCoeff() < 1e-10);
  // the span contains (1,1,1,1) and (1,2,3,4)
  for (Vector v : {Vector(Vector::Ones(4)), Vector((Vector(4) << 1, 2, 3, 4).finished())}) {
    const Vector projected = basis2.transpose() * (basis2 * v);
    CHECK((projected - v).norm() < 1e-10);
  }

  CHECK(null_space_basis(SymMatrix(Matrix::Identity(3, 3)), {0, 1e-9}).rows() == 0);
}

TEST_CASE("null_space_basis subspace is scale invariant") {
  const StructureMatrix rw = build_rw(5, 2);
  const Matrix b1 = null_space_basis(rw.matrix, rw.rank_info());
  const Matrix b2 = null_space_basis(SymMatrix(7.5 * rw.matrix.mat()), rw.rank_info());
  // same projector
  CHECK(max_abs_diff(b1.transpose() * b1, b2.transpose() * b2) < 1e-10);
}

TEST_CASE("woodbury_posterior_cov golden: worked example") {
  const StructureMatrix rw = build_rw(4, 1);
  const SymMatrix prior = pseudo_inverse(rw.matrix, rw.rank_info());
  const Matrix a = golden::example_mapping();
  const Matrix lik = a.transpose() * golden::example_curvature().asDiagonal() * a;
  const SymMatrix post = woodbury_posterior_cov(prior, SymMatrix(lik));
  CHECK(max_abs_diff(post.mat(), golden::example_cov_corrected()) < 0.001);
  // result annihilates the prior null space
  CHECK((post.mat().rowwise().sum()).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("woodbury_posterior_cov with zero likelihood precision") {
  const StructureMatrix rw = build_rw(5, 1);
  const SymMatrix prior = pseudo_inverse(rw.matrix, rw.rank_info());
  const SymMatrix post = woodbury_posterior_cov(prior, SymMatrix(Matrix::Zero(5, 5)));
  CHECK(max_abs_diff(post.mat(), prior.mat()) < 1e-12);
}

TEST_CASE("woodbury_posterior_cov equals direct inversion in the full-rank case") {
  const Matrix prior_prec = testsupport::random_spd(5, 42);
  const Matrix prior_cov = prior_prec.inverse();
  const Matrix lik = testsupport::random_spd(5, 43);
  const SymMatrix post = woodbury_posterior_cov(SymMatrix(prior_cov), SymMatrix(lik));
  const Matrix direct = (prior_prec + lik).inverse();
  CHECK(max_abs_diff(post.mat(), direct) < 1e-8);
}

TEST_CASE("woodbury output is a fixed point on the constrained subspace") {
  const StructureMatrix rw = build_rw(6, 1);
  const RankInfo rank = rw.rank_info();
  const SymMatrix prior = pseudo_inverse(rw.matrix, rank);
  const Matrix lik = testsupport::random_spd(6, 44);
  const Matrix w = woodbury_posterior_cov(prior, SymMatrix(lik)).mat();

  const EigenDecomp decomp = eigendecompose(rw.matrix);
  const Matrix range = decomp.eigenvectors.rightCols(5);
  // pinv of prior covariance on the range is the structure itself
  const Matrix lhs = range.transpose() * w * (rw.matrix.mat() + lik) * w * range;
  const Matrix rhs = range.transpose() * w * range;
  CHECK(max_abs_diff(lhs, rhs) < 1e-8);
}

TEST_CASE("woodbury rejects dimension mismatch") {
  CHECK_THROWS_AS(
      woodbury_posterior_cov(SymMatrix(Matrix::Identity(3, 3)), SymMatrix(Matrix::Identity(4, 4))),
      InvalidMatrix);
}

// SPDX-License-Identifier: Apache-2.0
#include "tensordec/linalg.hpp"

#include "tensordec/kernels.hpp"
#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace tensordec;

TEST_CASE("lstsq_gram with identity gram is a plain product") {
  const Matrix x = oracle::random_matrix(4, 12, 1);
  const Matrix kr = oracle::random_matrix(12, 3, 2);
  const Matrix got = lstsq_gram(x, kr, Matrix::Identity(3, 3));
  // The damped solve perturbs at the 1e-12 scale of its ridge term.
  REQUIRE((got - x * kr).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("lstsq_gram recovers the factor from exact rank-R data") {
  // Build X_(1) = A (C kr B)^T from known factors, then solve for A.
  const Matrix a = oracle::random_matrix(5, 3, 10);
  const Matrix b = oracle::random_matrix(4, 3, 11);
  const Matrix c = oracle::random_matrix(6, 3, 12);
  const Matrix kr = khatri_rao(c, b);
  const Matrix x1 = a * kr.transpose();
  const Matrix gram = ((c.transpose() * c).array() * (b.transpose() * b).array()).matrix();
  const Matrix got = lstsq_gram(x1, kr, gram);
  REQUIRE((got - a).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("rank-deficient grams produce finite output") {
  Matrix gram = Matrix::Zero(3, 3);
  gram(0, 0) = 1.0;  // rank 1
  const Matrix rhs = oracle::random_matrix(4, 3, 20);
  const Matrix got = solve_against_gram(rhs, gram);
  REQUIRE(got.allFinite());

  const Matrix zero_got = solve_against_gram(rhs, Matrix::Zero(3, 3));
  REQUIRE(zero_got.allFinite());
  REQUIRE(zero_got.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("solve_against_gram agrees with the SVD pseudo-inverse") {
  const Matrix g0 = oracle::random_matrix(4, 4, 30);
  const Matrix gram = g0.transpose() * g0;
  const Matrix rhs = oracle::random_matrix(6, 4, 31);
  const Matrix direct = rhs * pseudo_inverse(gram);
  const Matrix solved = solve_against_gram(rhs, gram);
  REQUIRE((direct - solved).cwiseAbs().maxCoeff() < 1e-8 * rhs.norm());
}

TEST_CASE("pseudo_inverse satisfies the Penrose identity on singular input") {
  Matrix m(3, 3);
  m << 1, 2, 3,
       2, 4, 6,
       1, 0, 1;  // rank 2
  const Matrix p = pseudo_inverse(m);
  REQUIRE((m * p * m - m).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("leading_left_singular_vectors returns orthonormal sign-fixed columns") {
  const Matrix m = oracle::random_matrix(8, 20, 40);
  const Matrix u = leading_left_singular_vectors(m, 3);
  REQUIRE(u.rows() == 8);
  REQUIRE(u.cols() == 3);
  REQUIRE((u.transpose() * u - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
  for (Index c = 0; c < 3; ++c) {
    Index imax = 0;
    u.col(c).cwiseAbs().maxCoeff(&imax);
    REQUIRE(u(imax, c) >= 0.0);
  }
  REQUIRE_THROWS_AS(leading_left_singular_vectors(m, 9), std::invalid_argument);
}

TEST_CASE("normalize_columns leaves zero columns alone and reports zero weight") {
  Matrix m(3, 2);
  m << 3, 0,
       4, 0,
       0, 0;
  const Vector norms = normalize_columns(m);
  REQUIRE(norms(0) == 5.0);
  REQUIRE(norms(1) == 0.0);
  REQUIRE_THAT(m.col(0).norm(), Catch::Matchers::WithinAbs(1.0, 1e-15));
  REQUIRE(m.col(1).cwiseAbs().maxCoeff() == 0.0);
}

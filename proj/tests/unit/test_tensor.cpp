#include <Eigen/Dense>

#include "doctest.h"
#include "ekl/errors.hpp"
#include "ekl/rng.hpp"
#include "ekl/tensor.hpp"
#include "support/oracles.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("block matrix validates its structure") {
  CHECK_THROWS_AS(ekl::BlockMatrix(MatrixXd::Zero(4, 6), 2), ekl::StructuralError);
  CHECK_THROWS_AS(ekl::BlockMatrix(MatrixXd::Zero(6, 6), 4), ekl::StructuralError);
  CHECK_THROWS_AS(ekl::BlockMatrix(MatrixXd::Zero(6, 6), 0), ekl::StructuralError);
  const ekl::BlockMatrix ok(MatrixXd::Identity(6, 6), 2);
  CHECK(ok.grid_size() == 3);
}

TEST_CASE("block accessor returns the addressed sub-block") {
  ekl::Rng rng(11);
  const MatrixXd a = ekl::gaussian_matrix(rng, 6, 6);
  const ekl::BlockMatrix bm(a, 2);
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 3; ++j)
      CHECK((bm.block(i, j) - a.block(2 * i, 2 * j, 2, 2)).norm() == 0.0);
}

TEST_CASE("kronecker product matches the loop reference") {
  ekl::Rng rng(1);
  for (const auto& [ar, ac, br, bc] :
       {std::array<int, 4>{3, 3, 2, 2}, {2, 5, 4, 1}, {1, 1, 3, 4}, {4, 2, 1, 5}}) {
    const MatrixXd a = ekl::gaussian_matrix(rng, ar, ac);
    const MatrixXd b = ekl::gaussian_matrix(rng, br, bc);
    const MatrixXd got = ekl::kron(a, b);
    const MatrixXd want = oracle::kron_loops(a, b);
    REQUIRE(got.rows() == want.rows());
    REQUIRE(got.cols() == want.cols());
    CHECK((got - want).norm() <= 1e-14 * (1.0 + want.norm()));
  }
}

TEST_CASE("vec stacks columns and unvec inverts it") {
  ekl::Rng rng(2);
  const MatrixXd m = ekl::gaussian_matrix(rng, 4, 3);
  const VectorXd v = ekl::vec_col(m);
  CHECK((v - oracle::vec_loops(m)).norm() == 0.0);
  CHECK((ekl::unvec_col(v, 4, 3) - m).norm() == 0.0);
  CHECK_THROWS_AS(ekl::unvec_col(v, 5, 3), ekl::StructuralError);
}

TEST_CASE("kron and vec agree on the matrix-product identity") {
  // (K kron T) vec(Y) == vec(T Y K^T) pins the layout conventions together.
  ekl::Rng rng(3);
  const MatrixXd k = ekl::gaussian_matrix(rng, 5, 5);
  const MatrixXd t = ekl::gaussian_matrix(rng, 3, 3);
  const MatrixXd y = ekl::gaussian_matrix(rng, 3, 5);
  const VectorXd lhs = ekl::kron(k, t) * ekl::vec_col(y);
  const VectorXd rhs = ekl::vec_col(t * y * k.transpose());
  CHECK((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
}

TEST_CASE("partial trace matches the blockwise loop reference") {
  ekl::Rng rng(4);
  const MatrixXd a = ekl::gaussian_matrix(rng, 12, 12);
  const MatrixXd got = ekl::partial_trace(ekl::BlockMatrix(a, 3));
  CHECK((got - oracle::partial_trace_loops(a, 3)).norm() <= 1e-14 * (1.0 + got.norm()));
  // The full trace survives the block trace.
  CHECK(got.trace() == doctest::Approx(a.trace()).epsilon(1e-14));
}

TEST_CASE("partial trace collapses a kronecker product to its outer factor") {
  ekl::Rng rng(5);
  const MatrixXd k = ekl::gaussian_matrix(rng, 4, 4);
  const MatrixXd t = ekl::gaussian_matrix(rng, 3, 3);
  const MatrixXd got = ekl::partial_trace(ekl::BlockMatrix(ekl::kron(k, t), 3));
  CHECK((got - t.trace() * k).norm() <= 1e-13 * (1.0 + got.norm()));
}

TEST_CASE("partial transpose matches the loop reference and is an involution") {
  ekl::Rng rng(6);
  const MatrixXd a = ekl::gaussian_matrix(rng, 10, 10);
  const ekl::BlockMatrix bm(a, 2);
  const ekl::BlockMatrix pt = ekl::partial_transpose(bm);
  CHECK((pt.data - oracle::partial_transpose_loops(a, 2)).norm() == 0.0);
  CHECK((ekl::partial_transpose(pt).data - a).norm() == 0.0);
}

TEST_CASE("partial transpose of a kronecker product transposes the inner factor") {
  ekl::Rng rng(7);
  const MatrixXd k = ekl::gaussian_matrix(rng, 3, 3);
  const MatrixXd t = ekl::gaussian_matrix(rng, 4, 4);
  const MatrixXd got = ekl::partial_transpose(ekl::BlockMatrix(ekl::kron(k, t), 4)).data;
  CHECK((got - ekl::kron(k, t.transpose())).norm() == 0.0);
}

TEST_CASE("double centering matches the explicit projector and is idempotent") {
  ekl::Rng rng(8);
  const MatrixXd m = ekl::gaussian_matrix(rng, 7, 7);
  const MatrixXd c = ekl::center(m);
  CHECK((c - oracle::center_h(m)).norm() <= 1e-13 * (1.0 + c.norm()));
  CHECK((ekl::center(c) - c).norm() <= 1e-13 * (1.0 + c.norm()));
  CHECK(ekl::center(MatrixXd::Constant(5, 5, 3.7)).norm() <= 1e-14);
}

TEST_CASE("minimum symmetric eigenvalue on frozen matrices") {
  MatrixXd a(2, 2);
  a << 2.0, 1.0, 1.0, 2.0;  // eigenvalues 1 and 3
  CHECK(ekl::min_symmetric_eigenvalue(a) == doctest::Approx(1.0).epsilon(1e-12));
  const MatrixXd pt = oracle::partial_transpose_loops(oracle::bell_matrix(), 2);
  CHECK(ekl::min_symmetric_eigenvalue(pt) == doctest::Approx(-0.5).epsilon(1e-12));
}

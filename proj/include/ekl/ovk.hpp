#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ekl/features.hpp"
#include "ekl/tensor.hpp"

namespace ekl {

/// Separable operator-valued kernel K(x, z) = k(x, z) * T with T symmetric
/// psd (p x p).  The output-structure matrix T only appears in this special
/// case and in the separable ridge baseline; learned entangled models carry
/// no standalone T, all structure lives in Q.
struct SeparableKernel {
  ScalarKernelSpec scalar;
  Eigen::MatrixXd t;  // p x p
};

/// Operator-sum form K(x, z) = sum_i M_i phi(x) phi(z)^T M_i^T with factors
/// M_i of size p x m acting on m-dimensional features.
struct ChoiKrausKernel {
  std::vector<Eigen::MatrixXd> factors;  // each p x m
};

/// Learned entangled kernel: a p*m-dimensional quadratic form D = Q * Q^T
/// over joint (feature, output) space, represented only by its factor Q.
/// Column i of Q is vec_col of the i-th Choi-Kraus factor (p x m), so the
/// Kraus rank is Q.cols().
struct EntangledModel {
  Eigen::Index p = 0;  // outputs
  Eigen::Index m = 0;  // feature dimension
  Eigen::MatrixXd q;   // (m*p) x r, unit Frobenius norm after learning
  FeatureMap fmap;     // how raw inputs become features
};

/// Gram of a separable kernel on samples X (n x d): an n x n grid of p x p
/// blocks k(x_i, x_j) * T.
BlockMatrix separable_gram(const SeparableKernel& sk, const Eigen::MatrixXd& x);

/// Evaluate an operator-sum kernel at one feature pair; phi_x and phi_z are
/// length-m feature vectors, result is p x p.
Eigen::MatrixXd choi_kraus_eval(const ChoiKrausKernel& ck, const Eigen::VectorXd& phi_x,
                                const Eigen::VectorXd& phi_z);

/// Operator-sum form of a separable kernel with feature dimension m: factors
/// t_j e_k^T over eigenvectors t_j of T (scaled by sqrt eigenvalue, rank
/// deficiency dropped) and coordinate vectors e_k, giving rank(T) * m
/// factors whose quadratic form is exactly k(x, z) * T.
ChoiKrausKernel separable_to_choi_kraus(const Eigen::MatrixXd& t, Eigen::Index m);

/// Choi-Kraus factors encoded in Q's columns (each unfolded to p x m).
std::vector<Eigen::MatrixXd> kraus_factors(const EntangledModel& em);

/// Pack p x m factors into the column-stacked Q representation.
Eigen::MatrixXd q_from_kraus(const std::vector<Eigen::MatrixXd>& factors);

/// Low-rank factor Z (n*p x r) of the entangled Gram on featurised samples
/// phi (m x n): Gram = Z * Z^T.  Row block i (p rows) holds sample i;
/// assembled without forming any Kronecker product, in O(r*p*m*n).
Eigen::MatrixXd low_rank_factor(const EntangledModel& em, const Eigen::MatrixXd& phi);

/// Same factor for an explicit Q (mainly for optimiser internals and tests).
Eigen::MatrixXd low_rank_factor(const Eigen::MatrixXd& q, Eigen::Index p,
                                const Eigen::MatrixXd& phi);

/// Dense entangled Gram on featurised samples: an n x n grid of p x p blocks,
/// computed as Z * Z^T (symmetric psd by construction).  Quadratic memory;
/// intended for diagnostics and small problems.
BlockMatrix assemble_gram_entangled(const EntangledModel& em, const Eigen::MatrixXd& phi);

/// Scalar factor B = partial trace of D over the output channel (m x m,
/// symmetric psd), computed from Q in O(p*m^2*r) without materialising D.
Eigen::MatrixXd scalar_factor(const EntangledModel& em);
Eigen::MatrixXd scalar_factor(const Eigen::MatrixXd& q, Eigen::Index p);

/// Scalar kernel induced by taking the block trace of the entangled Gram:
/// phi_a^T * B * phi_b for two featurised sets (result t_a x t_b).  Equals
/// partial_trace(assemble_gram_entangled(...)) when both sets coincide.
Eigen::MatrixXd extract_scalar_kernel(const EntangledModel& em, const Eigen::MatrixXd& phi_a,
                                      const Eigen::MatrixXd& phi_b);

namespace debug {

/// Materialise D = Q * Q^T (m*p x m*p, an m x m grid of p x p blocks).
/// Test-oracle path only; production code always works through Q.
Eigen::MatrixXd materialize_d(const Eigen::MatrixXd& q);

}  // namespace debug

}  // namespace ekl

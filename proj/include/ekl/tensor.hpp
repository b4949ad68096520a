#pragma once

#include <Eigen/Dense>

#include "ekl/errors.hpp"

namespace ekl {

/// Square matrix viewed as a b x b grid of square blocks of size block_size.
///
/// Layout convention used throughout the library: the OUTER (grid) index is
/// the sample or feature index and the INNER (block) index is the output
/// channel, i.e. entry (i*q + k, j*q + l) is element (k, l) of block (i, j)
/// with q = block_size.  This matches column-stacking vectorisation of p x n
/// label matrices: vec(Y) keeps each sample's p outputs contiguous.
struct BlockMatrix {
  Eigen::MatrixXd data;
  Eigen::Index block_size = 1;

  BlockMatrix() = default;
  BlockMatrix(Eigen::MatrixXd data_in, Eigen::Index block_size_in);

  Eigen::Index grid_size() const { return data.rows() / block_size; }

  /// Read-only view of block (i, j).
  Eigen::Block<const Eigen::MatrixXd> block(Eigen::Index i, Eigen::Index j) const {
    return data.block(i * block_size, j * block_size, block_size, block_size);
  }
};

/// Trace over the inner index: out(i, j) = tr(block(i, j)), mapping a
/// (b*q) x (b*q) matrix to b x b in O(b^2 q) time.  Linear, preserves
/// symmetry and positive semidefiniteness, commutes with transposition, and
/// satisfies partial_trace(kron(B, C)) = tr(C) * B.
Eigen::MatrixXd partial_trace(const BlockMatrix& a);

/// Transpose every block in place (the grid itself is not rearranged):
/// out.block(i, j) = a.block(i, j)^T.  An involution that preserves symmetry
/// of the whole matrix but not positive semidefiniteness; a negative
/// eigenvalue appearing here is what the separability check looks for.
BlockMatrix partial_transpose(const BlockMatrix& a);

/// Kronecker product with the first factor on the outer index:
/// out(i*br + k, j*bc + l) = a(i, j) * b(k, l).
Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Column-stacking vectorisation, so that vec(A*B) = kron(B^T, I) * vec(A).
Eigen::VectorXd vec_col(const Eigen::MatrixXd& m);

/// Inverse of vec_col; v.size() must equal rows*cols.
Eigen::MatrixXd unvec_col(const Eigen::VectorXd& v, Eigen::Index rows, Eigen::Index cols);

/// Symmetric double centering H * M * H with H = I - (1/n) * ones * ones^T
/// (row and column means removed, grand mean added back).  Idempotent.
Eigen::MatrixXd center(const Eigen::MatrixXd& m);

/// Smallest eigenvalue of (M + M^T) / 2; helper for psd checks.
double min_symmetric_eigenvalue(const Eigen::MatrixXd& m);

}  // namespace ekl

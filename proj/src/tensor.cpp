#include "ekl/tensor.hpp"

#include <string>

namespace ekl {

BlockMatrix::BlockMatrix(Eigen::MatrixXd data_in, Eigen::Index block_size_in)
    : data(std::move(data_in)), block_size(block_size_in) {
  if (block_size < 1) throw StructuralError("BlockMatrix: block_size must be >= 1");
  if (data.rows() != data.cols())
    throw StructuralError("BlockMatrix: matrix must be square, got " +
                          std::to_string(data.rows()) + "x" + std::to_string(data.cols()));
  if (data.rows() % block_size != 0)
    throw StructuralError("BlockMatrix: dimension " + std::to_string(data.rows()) +
                          " not divisible by block_size " + std::to_string(block_size));
}

Eigen::MatrixXd partial_trace(const BlockMatrix& a) {
  const Eigen::Index q = a.block_size;
  const Eigen::Index b = a.grid_size();
  Eigen::MatrixXd out(b, b);
  for (Eigen::Index j = 0; j < b; ++j)
    for (Eigen::Index i = 0; i < b; ++i) {
      double s = 0.0;
      for (Eigen::Index k = 0; k < q; ++k) s += a.data(i * q + k, j * q + k);
      out(i, j) = s;
    }
  return out;
}

BlockMatrix partial_transpose(const BlockMatrix& a) {
  const Eigen::Index q = a.block_size;
  const Eigen::Index b = a.grid_size();
  BlockMatrix out;
  out.block_size = q;
  out.data.resize(a.data.rows(), a.data.cols());
  for (Eigen::Index j = 0; j < b; ++j)
    for (Eigen::Index i = 0; i < b; ++i)
      out.data.block(i * q, j * q, q, q) = a.block(i, j).transpose();
  return out;
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Eigen::VectorXd vec_col(const Eigen::MatrixXd& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

Eigen::MatrixXd unvec_col(const Eigen::VectorXd& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols)
    throw StructuralError("unvec_col: vector of size " + std::to_string(v.size()) +
                          " cannot fill " + std::to_string(rows) + "x" + std::to_string(cols));
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, cols);
}

Eigen::MatrixXd center(const Eigen::MatrixXd& m) {
  const Eigen::VectorXd row_mean = m.rowwise().mean();
  const Eigen::RowVectorXd col_mean = m.colwise().mean();
  const double grand = m.mean();
  Eigen::MatrixXd out = m;
  out.colwise() -= row_mean;
  out.rowwise() -= col_mean;
  out.array() += grand;
  return out;
}

double min_symmetric_eigenvalue(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols())
    throw StructuralError("min_symmetric_eigenvalue: matrix must be square");
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace ekl

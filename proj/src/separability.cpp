#include "ekl/separability.hpp"

#include <Eigen/Dense>
#include <stdexcept>

namespace ekl {

PptReport ppt_check(const BlockMatrix& a, double rel_tol) {
  if (!(rel_tol >= 0.0)) throw std::invalid_argument("ppt_check: rel_tol must be >= 0");
  const Eigen::MatrixXd& mat = a.data;
  const double scale = std::max(1.0, mat.norm());
  if ((mat - mat.transpose()).norm() > 1e-10 * scale)
    throw StructuralError("ppt_check: input is not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_in(mat, Eigen::EigenvaluesOnly);
  const double min_in = es_in.eigenvalues().minCoeff();
  const double max_in = es_in.eigenvalues().maxCoeff();
  if (min_in < -rel_tol * std::max(max_in, 0.0) - 1e-300)
    throw StructuralError("ppt_check: input is not positive semidefinite");

  PptReport rep;
  rep.trace = mat.trace();
  if (!(rep.trace > 0.0))
    throw StructuralError("ppt_check: input has non-positive trace");

  BlockMatrix normalised(mat / rep.trace, a.block_size);
  const double spectral = max_in / rep.trace;  // psd: spectral norm = top eigenvalue

  const BlockMatrix pt = partial_transpose(normalised);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pt.data, Eigen::EigenvaluesOnly);
  rep.min_eigenvalue = es.eigenvalues().minCoeff();
  rep.tolerance = rel_tol * spectral;
  rep.entangled = rep.min_eigenvalue < -rep.tolerance;
  rep.ppt_holds = !rep.entangled;
  return rep;
}

}  // namespace ekl

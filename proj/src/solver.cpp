#include "ekl/solver.hpp"

#include <cmath>
#include <string>

namespace ekl {

namespace {

void check_lambda(double lambda, const char* where) {
  if (!(lambda > 0.0))
    throw std::invalid_argument(std::string(where) + ": ridge parameter must be positive");
}

void check_training(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& y, Eigen::Index p,
                    Eigen::Index m, const char* where) {
  if (y.rows() != p)
    throw StructuralError(std::string(where) + ": Y has " + std::to_string(y.rows()) +
                          " rows, model predicts p = " + std::to_string(p));
  if (phi.rows() != m)
    throw StructuralError(std::string(where) + ": features have " + std::to_string(phi.rows()) +
                          " rows, model expects m = " + std::to_string(m));
  if (phi.cols() != y.cols())
    throw StructuralError(std::string(where) + ": sample count mismatch between phi and Y");
  if (y.cols() < 1) throw StructuralError(std::string(where) + ": empty training set");
}

Eigen::VectorXd clamped_eigenvalues(const Eigen::VectorXd& ev) {
  return ev.cwiseMax(0.0);  // inputs are psd by contract; scrub rounding noise
}

}  // namespace

OvkFit fit_operator_valued(const EntangledModel& em, const Eigen::MatrixXd& phi,
                           const Eigen::MatrixXd& y, double lambda) {
  check_lambda(lambda, "fit_operator_valued");
  check_training(phi, y, em.p, em.m, "fit_operator_valued");
  OvkFit fit;
  fit.lambda = lambda;
  fit.z = low_rank_factor(em, phi);
  const Eigen::Index r = fit.z.cols();
  const Eigen::VectorXd yv = vec_col(y);
  Eigen::MatrixXd small = Eigen::MatrixXd::Zero(r, r);
  small.selfadjointView<Eigen::Lower>().rankUpdate(fit.z.transpose());
  small.diagonal().array() += lambda;
  const Eigen::LLT<Eigen::MatrixXd> llt(small);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("fit_operator_valued: inner system is not positive definite");
  fit.c = (yv - fit.z * llt.solve(fit.z.transpose() * yv)) / lambda;
  return fit;
}

Eigen::MatrixXd predict_operator_valued(const EntangledModel& em, const OvkFit& fit,
                                        const Eigen::MatrixXd& phi_t) {
  if (phi_t.rows() != em.m)
    throw StructuralError("predict_operator_valued: feature dimension mismatch");
  if (fit.z.rows() != fit.c.size() || fit.z.cols() != em.q.cols())
    throw StructuralError("predict_operator_valued: fit does not match the model");
  const Eigen::VectorXd u1 = fit.z.transpose() * fit.c;      // r
  const Eigen::VectorXd u2 = em.q * u1;                      // m*p
  const Eigen::MatrixXd v = unvec_col(u2, em.p, em.m);       // p x m
  return v * phi_t;                                          // p x t
}

ScalarFit fit_scalar(const EntangledModel& em, const Eigen::MatrixXd& phi,
                     const Eigen::MatrixXd& y, double lambda) {
  check_lambda(lambda, "fit_scalar");
  check_training(phi, y, em.p, em.m, "fit_scalar");
  ScalarFit fit;
  fit.lambda = lambda;
  fit.b = scalar_factor(em);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fit.b);
  const Eigen::VectorXd ev = clamped_eigenvalues(es.eigenvalues());
  const Eigen::MatrixXd sqrt_b =
      es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();

  const Eigen::MatrixXd w = sqrt_b * phi;  // m x n
  const Eigen::Index m = w.rows();
  Eigen::MatrixXd small = Eigen::MatrixXd::Zero(m, m);
  small.selfadjointView<Eigen::Lower>().rankUpdate(w);
  small.diagonal().array() += lambda;
  const Eigen::LLT<Eigen::MatrixXd> llt(small);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("fit_scalar: inner system is not positive definite");
  const Eigen::MatrixXd yt = y.transpose();  // n x p
  fit.coef = (yt - w.transpose() * llt.solve(w * yt)) / lambda;
  fit.proj = fit.b * (phi * fit.coef);  // m x p
  return fit;
}

Eigen::MatrixXd predict_scalar(const ScalarFit& fit, const Eigen::MatrixXd& phi_t) {
  if (phi_t.rows() != fit.proj.rows())
    throw StructuralError("predict_scalar: feature dimension mismatch");
  return (phi_t.transpose() * fit.proj).transpose();  // p x t
}

KrrFit fit_krr_baseline(const Eigen::MatrixXd& k, const Eigen::MatrixXd& y, double lambda) {
  check_lambda(lambda, "fit_krr_baseline");
  if (k.rows() != k.cols()) throw StructuralError("fit_krr_baseline: Gram must be square");
  if (k.rows() != y.cols())
    throw StructuralError("fit_krr_baseline: Gram size does not match the sample count");
  KrrFit fit;
  fit.lambda = lambda;
  Eigen::MatrixXd sys = 0.5 * (k + k.transpose());
  sys.diagonal().array() += lambda;
  const Eigen::LLT<Eigen::MatrixXd> llt(sys);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("fit_krr_baseline: Gram plus ridge is not positive definite");
  fit.coef = llt.solve(y.transpose());
  return fit;
}

Eigen::MatrixXd predict_krr(const KrrFit& fit, const Eigen::MatrixXd& k_cross) {
  if (k_cross.cols() != fit.coef.rows())
    throw StructuralError("predict_krr: cross Gram has the wrong training count");
  return (k_cross * fit.coef).transpose();
}

SeparableFit fit_separable_baseline(const Eigen::MatrixXd& k, const Eigen::MatrixXd& t,
                                    const Eigen::MatrixXd& y, double lambda) {
  check_lambda(lambda, "fit_separable_baseline");
  if (k.rows() != k.cols() || t.rows() != t.cols())
    throw StructuralError("fit_separable_baseline: K and T must be square");
  if (y.rows() != t.rows() || y.cols() != k.rows())
    throw StructuralError("fit_separable_baseline: Y must be p x n matching T and K");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_k(0.5 * (k + k.transpose()));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_t(0.5 * (t + t.transpose()));
  const Eigen::VectorXd ek = clamped_eigenvalues(es_k.eigenvalues());
  const Eigen::VectorXd et = clamped_eigenvalues(es_t.eigenvalues());

  // In the joint eigenbasis the n*p system is diagonal.
  Eigen::MatrixXd yt = es_t.eigenvectors().transpose() * y * es_k.eigenvectors();  // p x n
  for (Eigen::Index j = 0; j < yt.cols(); ++j)
    for (Eigen::Index s = 0; s < yt.rows(); ++s) yt(s, j) /= et[s] * ek[j] + lambda;

  SeparableFit fit;
  fit.lambda = lambda;
  fit.t = t;
  fit.c_mat = es_t.eigenvectors() * yt * es_k.eigenvectors().transpose();
  return fit;
}

SeparableFit fit_low_rank_separable(const Eigen::MatrixXd& u, const Eigen::MatrixXd& t,
                                    const Eigen::MatrixXd& y, double lambda) {
  check_lambda(lambda, "fit_low_rank_separable");
  if (t.rows() != t.cols()) throw StructuralError("fit_low_rank_separable: T must be square");
  if (y.rows() != t.rows() || y.cols() != u.rows())
    throw StructuralError("fit_low_rank_separable: Y must be p x n matching T and U");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_t(0.5 * (t + t.transpose()));
  const Eigen::VectorXd et = clamped_eigenvalues(es_t.eigenvalues());
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(u, Eigen::ComputeThinU);
  const Eigen::VectorXd sig2 = svd.singularValues().array().square();
  const Eigen::MatrixXd& a = svd.matrixU();  // n x rank, orthonormal columns

  const Eigen::MatrixXd yt = es_t.eigenvectors().transpose() * y;  // p x n
  const Eigen::MatrixXd proj = a.transpose() * yt.transpose();     // rank x p
  Eigen::MatrixXd filtered = proj;
  for (Eigen::Index s = 0; s < filtered.cols(); ++s) {
    const double sigma_t = et[s];
    for (Eigen::Index i = 0; i < filtered.rows(); ++i) {
      const double d = sigma_t * sig2[i];
      filtered(i, s) = proj(i, s) * (d / (d + lambda));
    }
  }
  // (sigma_t * U U^T + lambda I)^-1 v per channel, all channels batched
  const Eigen::MatrixXd xt = (yt.transpose() - a * filtered) / lambda;  // n x p

  SeparableFit fit;
  fit.lambda = lambda;
  fit.t = t;
  fit.c_mat = es_t.eigenvectors() * xt.transpose();
  return fit;
}

Eigen::MatrixXd predict_separable(const SeparableFit& fit, const Eigen::MatrixXd& k_cross) {
  if (k_cross.cols() != fit.c_mat.cols())
    throw StructuralError("predict_separable: cross Gram has the wrong training count");
  return fit.t * fit.c_mat * k_cross.transpose();
}

Eigen::MatrixXd reduce_dimensions(const EntangledModel& em, const Eigen::MatrixXd& phi_t) {
  return low_rank_factor(em, phi_t);
}

double rademacher_bound(double beta, double kappa, Eigen::Index p, Eigen::Index n) {
  if (!(beta >= 0.0) || !(kappa >= 0.0))
    throw std::invalid_argument("rademacher_bound: beta and kappa must be non-negative");
  if (p < 1 || n < 1) throw std::invalid_argument("rademacher_bound: p and n must be >= 1");
  return beta * std::sqrt(kappa * static_cast<double>(p) / static_cast<double>(n));
}

double generalization_bound(double emp_risk, double m_bound, double beta, double kappa,
                            Eigen::Index p, Eigen::Index n, double delta) {
  if (!(emp_risk >= 0.0)) throw std::invalid_argument("generalization_bound: risk must be >= 0");
  if (!(m_bound >= 0.0)) throw std::invalid_argument("generalization_bound: m_bound must be >= 0");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("generalization_bound: delta must lie in (0, 1)");
  const double rad = rademacher_bound(beta, kappa, p, n);
  const double nn = static_cast<double>(n);
  return emp_risk + 4.0 * std::sqrt(2.0) * m_bound * rad +
         3.0 * m_bound * std::sqrt(std::log(2.0 / delta) / (2.0 * nn));
}

namespace debug {

Eigen::VectorXd fit_operator_valued_dense(const BlockMatrix& gram, const Eigen::MatrixXd& y,
                                          double lambda, Eigen::Index np_limit) {
  check_lambda(lambda, "fit_operator_valued_dense");
  if (gram.data.rows() > np_limit)
    throw StructuralError("fit_operator_valued_dense: oracle path gated to n*p <= " +
                          std::to_string(np_limit));
  if (gram.data.rows() != y.size())
    throw StructuralError("fit_operator_valued_dense: Gram size does not match vec(Y)");
  Eigen::MatrixXd sys = gram.data;
  sys.diagonal().array() += lambda;
  const Eigen::LLT<Eigen::MatrixXd> llt(sys);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("fit_operator_valued_dense: system is not positive definite");
  return llt.solve(vec_col(y));
}

Eigen::VectorXd predict_dense(const Eigen::MatrixXd& g_cross, const Eigen::VectorXd& c,
                              Eigen::Index np_limit) {
  if (g_cross.cols() > np_limit)
    throw StructuralError("predict_dense: oracle path gated to n*p <= " +
                          std::to_string(np_limit));
  if (g_cross.cols() != c.size())
    throw StructuralError("predict_dense: coefficient length does not match the Gram");
  return g_cross * c;
}

}  // namespace debug

}  // namespace ekl

#pragma once

#include <Eigen/Dense>

#include "ekl/ovk.hpp"
#include "ekl/tensor.hpp"

namespace ekl {

/// Ridge coefficients for the full operator-valued predictor.  The training
/// factor Z is kept because prediction reuses it (Z_t * (Z^T c) without ever
/// forming a test Gram).
struct OvkFit {
  Eigen::VectorXd c;  // n*p
  Eigen::MatrixXd z;  // n*p x r
  double lambda = 0.0;
};

/// Ridge coefficients for the block-trace (scalar-kernel) predictor.
struct ScalarFit {
  Eigen::MatrixXd coef;  // n x p
  Eigen::MatrixXd b;     // m x m scalar factor
  Eigen::MatrixXd proj;  // m x p  B * Phi * coef, folded for O(t*m*p) prediction
  double lambda = 0.0;
};

/// Per-output kernel ridge regression (shared scalar kernel, no output
/// structure).
struct KrrFit {
  Eigen::MatrixXd coef;  // n x p
  double lambda = 0.0;
};

/// Ridge solution under a fixed separable kernel k(x,z)*T.
struct SeparableFit {
  Eigen::MatrixXd c_mat;  // p x n
  Eigen::MatrixXd t;      // p x p
  double lambda = 0.0;
};

/// Solve (Gram + lambda*I) c = vec(Y) for the entangled Gram on featurised
/// training samples phi (m x n), without materialising the n*p x n*p Gram:
/// the identity (Z Z^T + lambda I)^-1 v = (v - Z (Z^T Z + lambda I)^-1 Z^T v)
/// / lambda reduces the work to one r x r Cholesky, O(n*p*r^2 + r^3).
OvkFit fit_operator_valued(const EntangledModel& em, const Eigen::MatrixXd& phi,
                           const Eigen::MatrixXd& y, double lambda);

/// Predictions at featurised test points (m x t), returned p x t.  Computed
/// as (Phi_t^T kron I) * (Q * (Z^T c)): O((n + m + t) * p * r-ish), no test
/// Gram and no test factor are materialised.
Eigen::MatrixXd predict_operator_valued(const EntangledModel& em, const OvkFit& fit,
                                        const Eigen::MatrixXd& phi_t);

/// Solve (Phi^T B Phi + lambda*I_n) coef = Y^T for the block-trace scalar
/// kernel of an entangled model.  Factoring B = B^{1/2} B^{1/2} turns the
/// n x n system into an m x m one (W = B^{1/2} Phi, same identity as above).
ScalarFit fit_scalar(const EntangledModel& em, const Eigen::MatrixXd& phi,
                     const Eigen::MatrixXd& y, double lambda);

/// Predictions of the block-trace predictor at featurised test points,
/// returned p x t.
Eigen::MatrixXd predict_scalar(const ScalarFit& fit, const Eigen::MatrixXd& phi_t);

/// Kernel ridge regression per output channel on an exact scalar Gram.
KrrFit fit_krr_baseline(const Eigen::MatrixXd& k, const Eigen::MatrixXd& y, double lambda);

/// Predictions from a cross Gram k_cross (t x n, test against train),
/// returned p x t.
Eigen::MatrixXd predict_krr(const KrrFit& fit, const Eigen::MatrixXd& k_cross);

/// Ridge solution for the fixed separable kernel k(x,z)*T: solves
/// (K kron T + lambda*I) c = vec(Y) through the two eigendecompositions,
/// O(n^3 + p^3) instead of O(n^3 p^3); the n*p system is never formed.
SeparableFit fit_separable_baseline(const Eigen::MatrixXd& k, const Eigen::MatrixXd& t,
                                    const Eigen::MatrixXd& y, double lambda);

/// Same solution when the scalar Gram is given in low-rank form K = U U^T
/// (U is n x m): one thin SVD of U plus a per-channel filter,
/// O(n m^2 + p^3 + p n m).
SeparableFit fit_low_rank_separable(const Eigen::MatrixXd& u, const Eigen::MatrixXd& t,
                                    const Eigen::MatrixXd& y, double lambda);

/// Predictions of a separable fit from a scalar cross Gram (t x n), returned
/// p x t: T * C * k_cross^T.
Eigen::MatrixXd predict_separable(const SeparableFit& fit, const Eigen::MatrixXd& k_cross);

/// r-dimensional reduced representation of featurised points: the rows of
/// the low-rank factor, grouped per sample (p consecutive rows per sample).
Eigen::MatrixXd reduce_dimensions(const EntangledModel& em, const Eigen::MatrixXd& phi_t);

/// Rademacher complexity bound beta * sqrt(kappa * p / n) for the
/// trace-bounded kernel class (kappa bounds the output-summed kernel trace,
/// beta the coefficient norm).
double rademacher_bound(double beta, double kappa, Eigen::Index p, Eigen::Index n);

/// Excess-risk bound: emp_risk
///   + 4*sqrt(2)*m_bound*sqrt(beta^2*kappa*p/n)
///   + 3*m_bound*sqrt(log(2/delta)/(2n)),
/// m_bound a uniform bound on the loss scale and delta the failure
/// probability.  With m_bound = 0 it degenerates to emp_risk exactly.
double generalization_bound(double emp_risk, double m_bound, double beta, double kappa,
                            Eigen::Index p, Eigen::Index n, double delta);

namespace debug {

/// Dense reference solve of (Gram + lambda*I) c = vec(Y).  Oracle path for
/// tests; refuses problems beyond the given n*p limit so it cannot sneak
/// into production use on large data.
Eigen::VectorXd fit_operator_valued_dense(const BlockMatrix& gram, const Eigen::MatrixXd& y,
                                          double lambda, Eigen::Index np_limit = 2000);

/// Dense reference prediction vec(Y_hat) = g_cross * c (g_cross is tp x np).
Eigen::VectorXd predict_dense(const Eigen::MatrixXd& g_cross, const Eigen::VectorXd& c,
                              Eigen::Index np_limit = 2000);

}  // namespace debug

}  // namespace ekl

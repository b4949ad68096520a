#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "ekl/errors.hpp"

namespace ekl {

/// Centered kernel alignment: cosine of the angle between H*M*H and H*N*H in
/// Frobenius geometry, H the centering projector.  Invariant to positive
/// scaling and to adding multiples of ones*ones^T to either argument.
/// Throws UndefinedAlignmentError when either argument centers to zero.
double centered_alignment(const Eigen::MatrixXd& m, const Eigen::MatrixXd& n);

/// Two-term alignment objective for an entangled kernel factor Q ((m*p) x r)
/// on featurised samples phi (m x n) with labels y (p x n):
///
///   (1-gamma) * alignment(block trace of Gram, Y^T Y)
///     + gamma * alignment(Gram, vec(Y) vec(Y)^T)
///
/// The first term centers at size n, the second at size n*p.  Q is
/// renormalised to unit Frobenius norm internally; the value is scale
/// invariant in Q anyway.  Computed through the m x m scalar factor and the
/// n*p x r low-rank factor; the n*p x n*p Gram is never materialised.
double ekl_objective(const Eigen::MatrixXd& q, const Eigen::MatrixXd& phi,
                     const Eigen::MatrixXd& y, double gamma);

/// Euclidean gradient of ekl_objective with respect to Q, evaluated at
/// Q / |Q|_F.  Because the objective is scale invariant, the gradient is
/// automatically orthogonal to Q (it already lies in the tangent space of
/// the unit Frobenius sphere).
Eigen::MatrixXd ekl_gradient(const Eigen::MatrixXd& q, const Eigen::MatrixXd& phi,
                             const Eigen::MatrixXd& y, double gamma);

struct LearnConfig {
  double gamma = 0.5;
  int max_iters = 500;
  double grad_tol = 1e-6;     // stop when the projected gradient norm drops below
  double step_init = 1.0;     // first step size tried each iteration
  double backtrack = 0.5;     // step shrink factor during the line search
  double armijo_c = 1e-4;     // sufficient-increase slope fraction
  std::uint64_t seed = 0;     // controls the random unit-norm start
  /// Optional observer called with (Q, objective) at the start and after
  /// every accepted step; used by tests to watch the iterates.
  std::function<void(const Eigen::MatrixXd&, double)> on_iterate;
};

struct LearnResult {
  Eigen::MatrixXd q;                      // unit Frobenius norm
  std::vector<double> objective_history;  // initial value plus each accepted step
  double final_grad_norm = 0.0;
  int iterations = 0;        // accepted steps taken
  bool converged = false;    // grad_tol reached (as opposed to hitting max_iters)
};

/// Maximise ekl_objective over unit-Frobenius-norm Q of rank budget r by
/// projected gradient ascent with a backtracking (sufficient increase) line
/// search: step along the tangent gradient, renormalise, accept only
/// improving steps.  The recorded objective history is non-decreasing.
/// Deterministic for a fixed config.
LearnResult learn_entangled_kernel(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& y,
                                   Eigen::Index r, const LearnConfig& cfg = {});

}  // namespace ekl

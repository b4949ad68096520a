#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "ekl/errors.hpp"

namespace ekl {

/// Scalar kernel on raw inputs (rows of X are samples).
struct ScalarKernelSpec {
  enum class Kind { Linear, Gaussian };
  Kind kind = Kind::Linear;
  double bandwidth = 1.0;  // gaussian only: k(x,z) = exp(-|x-z|^2 / (2*bandwidth^2))
};

/// Cross Gram matrix, entry (i, j) = k(a_i, b_j); a is t x d, b is n x d,
/// result t x n.
Eigen::MatrixXd gram_scalar(const ScalarKernelSpec& spec, const Eigen::MatrixXd& a,
                            const Eigen::MatrixXd& b);

/// Gram of one sample set against itself.
Eigen::MatrixXd gram_scalar(const ScalarKernelSpec& spec, const Eigen::MatrixXd& x);

/// How the finite-dimensional feature vector is built.
enum class FeatureMethod {
  ExactLinear,  // phi(x) = x, only for the linear kernel (dim = d)
  Nystrom,      // whitened kernel slice against m landmark points
  Rff,          // random Fourier features, gaussian kernel only
};

/// Fitted feature map phi_hat: R^d -> R^m.  Fitting is deterministic per
/// seed; the seed is kept so saved models can echo it.
struct FeatureMap {
  FeatureMethod method = FeatureMethod::ExactLinear;
  ScalarKernelSpec kernel;
  Eigen::Index dim = 0;        // m, length of phi_hat(x)
  Eigen::Index input_dim = 0;  // d
  std::uint64_t seed = 0;

  // Nystrom state: phi_hat(x) = whiten * [k(landmark_l, x)]_l with whiten the
  // pseudo-inverse square root of the landmark Gram.
  Eigen::MatrixXd landmarks;  // m x d
  Eigen::MatrixXd whiten;     // m x m

  // RFF state: phi_hat(x) = sqrt(2/m) * cos(freqs * x + phases).
  Eigen::MatrixXd freqs;    // m x d
  Eigen::VectorXd phases;   // m
};

/// Fit a feature map of the requested dimension m on training inputs X
/// (n x d).  ExactLinear ignores m and uses d; Nystrom draws m landmarks
/// without replacement (nested as m grows for a fixed seed); Rff draws
/// frequencies from the gaussian spectral density.
FeatureMap fit_feature_map(const ScalarKernelSpec& spec, FeatureMethod method, Eigen::Index m,
                           const Eigen::MatrixXd& x, std::uint64_t seed);

/// Apply a fitted map to inputs (t x d); returns m x t, column i = phi_hat(x_i).
Eigen::MatrixXd apply_feature_map(const FeatureMap& fm, const Eigen::MatrixXd& x);

const char* feature_method_name(FeatureMethod method);
FeatureMethod feature_method_from_name(const std::string& name);

const char* kernel_kind_name(ScalarKernelSpec::Kind kind);
ScalarKernelSpec::Kind kernel_kind_from_name(const std::string& name);

}  // namespace ekl

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "ekl/harness.hpp"
#include "ekl/ovk.hpp"
#include "ekl/solver.hpp"

namespace ekl {

/// Which regression head sits on top of the learned factor Q.
enum class ModelMode {
  Ovk,  // full operator-valued solve, coefficient lives in R^{n*p}
  Ptr,  // scalar solve on the partial-trace kernel, one coefficient column per output
};

/// Everything needed to reproduce predictions: the learned factor, the fitted
/// feature map, the training features and the ridge coefficients.  Derived
/// quantities (the low-rank factor for Ovk, the projected coefficients for
/// Ptr) are rebuilt deterministically after loading, so a save/load round trip
/// predicts bit-identically.
struct TrainedModel {
  ModelMode mode = ModelMode::Ovk;
  double lambda = 0.0;
  double gamma = 0.0;
  std::uint64_t seed = 0;

  EntangledModel em;         // p, m, Q (m*p x r), feature map
  Eigen::MatrixXd phi;       // m x n training features
  Eigen::VectorXd ovk_coef;  // n*p   (mode == Ovk)
  Eigen::MatrixXd ptr_coef;  // n x p (mode == Ptr)

  // Rebuilt on construction/load, never serialized.
  OvkFit ovk;
  ScalarFit sc;
};

/// Package a fitted harness model (methods Ekl or PtrEkl only) for saving.
TrainedModel make_trained(const FittedModel& fm);

/// Predict outputs (p x t) for raw inputs (t x d).
Eigen::MatrixXd predict_trained(const TrainedModel& tm, const Eigen::MatrixXd& x_test);

/// Binary model file: magic "EKLM", little-endian u32 format version,
/// little-endian u64 JSON header length, the JSON header (dimensions,
/// hyperparameters, kernel and feature-map settings, ordered array
/// descriptors), then each array as column-major little-endian float64.
/// Written atomically (temp file + rename).
void save_model(const TrainedModel& tm, const std::string& path);

/// Inverse of save_model; throws std::runtime_error on malformed files and
/// rebuilds the derived prediction state.
TrainedModel load_model(const std::string& path);

const char* model_mode_name(ModelMode mode);
ModelMode model_mode_from_name(const std::string& name);

}  // namespace ekl

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ekl/alignment.hpp"
#include "ekl/features.hpp"
#include "ekl/solver.hpp"

namespace ekl {

/// Inputs are rows of x (n x d); outputs are columns of y (p x n), column i
/// labelling sample i.
struct Dataset {
  Eigen::MatrixXd x;
  Eigen::MatrixXd y;
  std::uint64_t seed = 0;  // generator seed when synthetic, else 0
};

struct TrainTestSplit {
  Dataset train;
  Dataset test;
};

/// Synthetic multi-output data from the bilinear model
///   Y = T*C*A + C*K + noise,
/// with T (p x p), C (p x n), A (n x n) and X (n x d) all iid standard
/// normal (drawn in that order), K the linear Gram X*X^T of the inputs, and
/// iid N(0, noise_sigma^2) noise.  Labels mix across samples, so train/test
/// splits of one draw share the generating process.
Dataset gen_bilinear(Eigen::Index n, Eigen::Index p, Eigen::Index d, double noise_sigma,
                     std::uint64_t seed);

/// Split by a seeded permutation: the first n_train permuted samples train,
/// the rest test.
TrainTestSplit split_dataset(const Dataset& ds, Eigen::Index n_train, std::uint64_t seed);

/// Normalised mean squared error: for each output channel, MSE divided by
/// the (population) variance of the true channel, averaged over channels.
/// Throws when a true channel has zero variance.
double nmse(const Eigen::MatrixXd& y_pred, const Eigen::MatrixXd& y_true);

/// Relative improvement over the kernel ridge baseline:
/// (err_krr - err_method) / err_krr.  Zero when the method ties the
/// baseline, positive when it is better.
double normalized_improvement(double err_method, double err_krr);

enum class Method {
  Ekl,        // entangled kernel, operator-valued predictor
  PtrEkl,     // entangled kernel, block-trace scalar predictor
  Krr,        // per-output kernel ridge on the exact scalar Gram
  Separable,  // ridge under k(x,z)*T with T the training output covariance
};

/// Everything needed to train one method (shared scalar kernel, feature
/// approximation for the entangled modes, rank budget, optimiser settings).
struct ModelConfig {
  ScalarKernelSpec kernel;
  FeatureMethod approx = FeatureMethod::ExactLinear;
  Eigen::Index feature_dim = 0;  // m for nystrom/rff; ignored for exact-linear
  double rank_fraction = 1.0;    // r = max(1, round(rank_fraction * m * p))
  LearnConfig learn;             // gamma inside is overridden by the caller's gamma
};

/// Hyperparameter search grid; gammas only matter for the entangled modes.
struct CvPlan {
  std::vector<double> lambdas = {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2};
  std::vector<double> gammas = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  int folds = 5;
  std::uint64_t seed = 0;  // fold assignment and feature-map fitting
};

struct CvResult {
  double best_lambda = 0.0;
  double best_gamma = 0.0;          // 0 for the gamma-free methods
  Eigen::MatrixXd mean_scores;      // gammas x lambdas mean validation nmse
  std::vector<double> lambdas;      // grids actually searched (gamma collapses
  std::vector<double> gammas;       // to {0} for Krr/Separable)
};

/// k-fold cross validation of one method over the plan's grid, minimising
/// mean validation nmse.  Ties are broken toward the larger lambda, then the
/// smaller gamma.  Q is learned once per (fold, gamma) and shared across
/// lambdas.  Deterministic for fixed seeds.
CvResult cross_validate(const Dataset& train, const CvPlan& plan, Method method,
                        const ModelConfig& cfg);

/// One trained method, ready to predict on new inputs.
struct FittedModel {
  Method method = Method::Krr;
  ModelConfig cfg;
  double lambda = 0.0;
  double gamma = 0.0;
  double objective = 0.0;  // final alignment objective (entangled modes)
  Eigen::MatrixXd x_train;  // kept for cross Grams / featurisation
  FeatureMap fmap;
  EntangledModel em;
  OvkFit ovk;
  ScalarFit sc;
  KrrFit krr;
  SeparableFit sep;
};

FittedModel fit_method(const Dataset& train, Method method, const ModelConfig& cfg,
                       double lambda, double gamma);

/// Predictions on raw inputs (t x d), returned p x t.
Eigen::MatrixXd predict_method(const FittedModel& fm, const Eigen::MatrixXd& x_test);

/// Structural assumptions whose fit/predict costs the timing benchmark
/// compares on one synthetic problem size.
enum class StructureClass {
  NoStructure,       // dense n*p x n*p Gram, dense Cholesky
  Separable,         // K kron T through both eigendecompositions
  LowRankSeparable,  // K = U U^T low rank, per-channel spectral filter
  Entangled,         // factor Z + small-system identity, operator predictor
  EntangledPtr,      // block-trace scalar kernel, m x m system
};

struct TimingCell {
  StructureClass cls = StructureClass::NoStructure;
  Eigen::Index n = 0, p = 0, m = 0, r = 0;
  double fit_seconds = 0.0;
  double predict_seconds = 0.0;
};

/// Median-of-repeats wall-clock timing of fit and predict per structure
/// class on random seeded data.  For each (n, p) size and fraction f the
/// feature budget is m = round(f*n) and the rank budget r = round(f*m*p).
/// Data generation and Gram materialisation for the dense class are not
/// timed.  Same seed, same data; timings naturally vary.
std::vector<TimingCell> timing_benchmark(
    const std::vector<std::pair<Eigen::Index, Eigen::Index>>& sizes,
    const std::vector<double>& fractions, const std::vector<StructureClass>& classes,
    int repeats, std::uint64_t seed);

/// Numeric CSV with the last p_outputs columns as outputs and the remaining
/// leading columns as inputs.  Errors mention path and line; non-finite
/// entries and ragged rows are rejected.
Dataset load_csv(const std::string& path, Eigen::Index p_outputs, bool header);

/// Write a dataset as CSV (x0..x{d-1},y0..y{p-1} header when header=true).
void save_dataset_csv(const Dataset& ds, const std::string& path, bool header);

/// Plain numeric grid, all columns alike.
Eigen::MatrixXd load_matrix_csv(const std::string& path, bool header);

/// Write a matrix as CSV; header_names, when non-empty, must match the
/// column count.
void save_matrix_csv(const Eigen::MatrixXd& m, const std::string& path,
                     const std::vector<std::string>& header_names = {});

const char* method_name(Method method);
Method method_from_name(const std::string& name);
const char* structure_class_name(StructureClass cls);
StructureClass structure_class_from_name(const std::string& name);

}  // namespace ekl

#include "ekl/features.hpp"

#include <cmath>
#include <string>

#include "ekl/rng.hpp"

namespace ekl {

namespace {

void check_inputs(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols())
    throw StructuralError("gram_scalar: input dimension mismatch, " + std::to_string(a.cols()) +
                          " vs " + std::to_string(b.cols()));
  if (a.rows() == 0 || b.rows() == 0) throw StructuralError("gram_scalar: empty sample set");
}

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::VectorXd na = a.rowwise().squaredNorm();
  const Eigen::VectorXd nb = b.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = -2.0 * (a * b.transpose());
  d2.colwise() += na;
  d2.rowwise() += nb.transpose();
  return d2.cwiseMax(0.0);  // clamp tiny negatives from cancellation
}

}  // namespace

Eigen::MatrixXd gram_scalar(const ScalarKernelSpec& spec, const Eigen::MatrixXd& a,
                            const Eigen::MatrixXd& b) {
  check_inputs(a, b);
  switch (spec.kind) {
    case ScalarKernelSpec::Kind::Linear:
      return a * b.transpose();
    case ScalarKernelSpec::Kind::Gaussian: {
      if (spec.bandwidth <= 0.0)
        throw std::invalid_argument("gram_scalar: gaussian bandwidth must be positive");
      const double inv = -0.5 / (spec.bandwidth * spec.bandwidth);
      return (squared_distances(a, b) * inv).array().exp();
    }
  }
  throw std::invalid_argument("gram_scalar: unknown kernel kind");
}

Eigen::MatrixXd gram_scalar(const ScalarKernelSpec& spec, const Eigen::MatrixXd& x) {
  return gram_scalar(spec, x, x);
}

FeatureMap fit_feature_map(const ScalarKernelSpec& spec, FeatureMethod method, Eigen::Index m,
                           const Eigen::MatrixXd& x, std::uint64_t seed) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  if (n == 0 || d == 0) throw StructuralError("fit_feature_map: empty training inputs");

  FeatureMap fm;
  fm.method = method;
  fm.kernel = spec;
  fm.input_dim = d;
  fm.seed = seed;

  switch (method) {
    case FeatureMethod::ExactLinear: {
      if (spec.kind != ScalarKernelSpec::Kind::Linear)
        throw std::invalid_argument(
            "fit_feature_map: exact features exist only for the linear kernel");
      fm.dim = d;  // requested m is ignored; the map is the identity
      return fm;
    }
    case FeatureMethod::Nystrom: {
      if (m < 1 || m > n)
        throw std::invalid_argument("fit_feature_map: nystrom needs 1 <= m <= n, got m = " +
                                    std::to_string(m));
      Rng rng(seed);
      const std::vector<Eigen::Index> idx = sample_without_replacement(rng, n, m);
      fm.landmarks.resize(m, d);
      for (Eigen::Index i = 0; i < m; ++i)
        fm.landmarks.row(i) = x.row(idx[static_cast<std::size_t>(i)]);
      const Eigen::MatrixXd kmm = gram_scalar(spec, fm.landmarks);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(kmm);
      const Eigen::VectorXd ev = es.eigenvalues();
      const double clip = 1e-10 * std::max(ev.maxCoeff(), 0.0);
      Eigen::VectorXd inv_sqrt = Eigen::VectorXd::Zero(m);
      for (Eigen::Index i = 0; i < m; ++i)
        if (ev[i] > clip) inv_sqrt[i] = 1.0 / std::sqrt(ev[i]);
      fm.whiten = es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose();
      fm.dim = m;
      return fm;
    }
    case FeatureMethod::Rff: {
      if (spec.kind != ScalarKernelSpec::Kind::Gaussian)
        throw std::invalid_argument(
            "fit_feature_map: random Fourier features exist only for the gaussian kernel");
      if (m < 1) throw std::invalid_argument("fit_feature_map: rff needs m >= 1");
      if (spec.bandwidth <= 0.0)
        throw std::invalid_argument("fit_feature_map: gaussian bandwidth must be positive");
      Rng rng(seed);
      fm.freqs = gaussian_matrix(rng, m, d) / spec.bandwidth;
      fm.phases.resize(m);
      constexpr double two_pi = 6.283185307179586476925287;
      for (Eigen::Index i = 0; i < m; ++i) fm.phases[i] = rng.uniform(0.0, two_pi);
      fm.dim = m;
      return fm;
    }
  }
  throw std::invalid_argument("fit_feature_map: unknown method");
}

Eigen::MatrixXd apply_feature_map(const FeatureMap& fm, const Eigen::MatrixXd& x) {
  if (x.cols() != fm.input_dim)
    throw StructuralError("apply_feature_map: inputs have dimension " + std::to_string(x.cols()) +
                          ", map expects " + std::to_string(fm.input_dim));
  switch (fm.method) {
    case FeatureMethod::ExactLinear:
      return x.transpose();  // d x t
    case FeatureMethod::Nystrom:
      // column i = whiten * [k(landmark_l, x_i)]_l
      return fm.whiten * gram_scalar(fm.kernel, fm.landmarks, x);
    case FeatureMethod::Rff: {
      Eigen::MatrixXd proj = fm.freqs * x.transpose();  // m x t
      proj.colwise() += fm.phases;
      const double scale = std::sqrt(2.0 / static_cast<double>(fm.dim));
      return scale * proj.array().cos().matrix();
    }
  }
  throw std::invalid_argument("apply_feature_map: unknown method");
}

const char* feature_method_name(FeatureMethod method) {
  switch (method) {
    case FeatureMethod::ExactLinear: return "exact-linear";
    case FeatureMethod::Nystrom: return "nystrom";
    case FeatureMethod::Rff: return "rff";
  }
  return "?";
}

FeatureMethod feature_method_from_name(const std::string& name) {
  if (name == "exact-linear" || name == "exact") return FeatureMethod::ExactLinear;
  if (name == "nystrom") return FeatureMethod::Nystrom;
  if (name == "rff") return FeatureMethod::Rff;
  throw std::invalid_argument("unknown feature method '" + name + "'");
}

const char* kernel_kind_name(ScalarKernelSpec::Kind kind) {
  switch (kind) {
    case ScalarKernelSpec::Kind::Linear: return "linear";
    case ScalarKernelSpec::Kind::Gaussian: return "gaussian";
  }
  return "?";
}

ScalarKernelSpec::Kind kernel_kind_from_name(const std::string& name) {
  if (name == "linear") return ScalarKernelSpec::Kind::Linear;
  if (name == "gaussian") return ScalarKernelSpec::Kind::Gaussian;
  throw std::invalid_argument("unknown kernel '" + name + "'");
}

}  // namespace ekl

#include "ekl/ovk.hpp"

#include <cmath>
#include <string>

namespace ekl {

namespace {

void check_model(const EntangledModel& em) {
  if (em.p < 1 || em.m < 1) throw StructuralError("EntangledModel: p and m must be >= 1");
  if (em.q.rows() != em.m * em.p)
    throw StructuralError("EntangledModel: Q has " + std::to_string(em.q.rows()) +
                          " rows, expected m*p = " + std::to_string(em.m * em.p));
  if (em.q.cols() < 1) throw StructuralError("EntangledModel: Q must have at least one column");
}

void check_features(const Eigen::MatrixXd& phi, Eigen::Index m, const char* where) {
  if (phi.rows() != m)
    throw StructuralError(std::string(where) + ": features have " + std::to_string(phi.rows()) +
                          " rows, model expects m = " + std::to_string(m));
  if (phi.cols() == 0) throw StructuralError(std::string(where) + ": empty feature set");
}

}  // namespace

BlockMatrix separable_gram(const SeparableKernel& sk, const Eigen::MatrixXd& x) {
  if (sk.t.rows() != sk.t.cols() || sk.t.rows() < 1)
    throw StructuralError("separable_gram: T must be square and non-empty");
  const Eigen::MatrixXd k = gram_scalar(sk.scalar, x);
  return BlockMatrix(kron(k, sk.t), sk.t.rows());
}

Eigen::MatrixXd choi_kraus_eval(const ChoiKrausKernel& ck, const Eigen::VectorXd& phi_x,
                                const Eigen::VectorXd& phi_z) {
  if (ck.factors.empty()) throw StructuralError("choi_kraus_eval: no factors");
  const Eigen::Index p = ck.factors.front().rows();
  const Eigen::Index m = ck.factors.front().cols();
  if (phi_x.size() != m || phi_z.size() != m)
    throw StructuralError("choi_kraus_eval: feature length mismatch");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(p, p);
  for (const Eigen::MatrixXd& f : ck.factors) {
    if (f.rows() != p || f.cols() != m)
      throw StructuralError("choi_kraus_eval: factors must share one shape");
    out.noalias() += (f * phi_x) * (f * phi_z).transpose();
  }
  return out;
}

ChoiKrausKernel separable_to_choi_kraus(const Eigen::MatrixXd& t, Eigen::Index m) {
  if (t.rows() != t.cols() || t.rows() < 1)
    throw StructuralError("separable_to_choi_kraus: T must be square and non-empty");
  if (m < 1) throw StructuralError("separable_to_choi_kraus: m must be >= 1");
  const Eigen::Index p = t.rows();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (t + t.transpose()));
  const Eigen::VectorXd ev = es.eigenvalues();
  const double clip = 1e-12 * std::max(ev.cwiseAbs().maxCoeff(), 0.0);
  if (ev.minCoeff() < -clip)
    throw std::invalid_argument("separable_to_choi_kraus: T must be positive semidefinite");
  ChoiKrausKernel ck;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (ev[j] <= clip) continue;  // rank deficiency: drop the null directions
    const Eigen::VectorXd tj = std::sqrt(ev[j]) * es.eigenvectors().col(j);
    for (Eigen::Index k = 0; k < m; ++k) {
      Eigen::MatrixXd f = Eigen::MatrixXd::Zero(p, m);
      f.col(k) = tj;
      ck.factors.push_back(std::move(f));
    }
  }
  if (ck.factors.empty())
    throw std::invalid_argument("separable_to_choi_kraus: T is numerically zero");
  return ck;
}

std::vector<Eigen::MatrixXd> kraus_factors(const EntangledModel& em) {
  check_model(em);
  std::vector<Eigen::MatrixXd> out;
  out.reserve(static_cast<std::size_t>(em.q.cols()));
  for (Eigen::Index i = 0; i < em.q.cols(); ++i)
    out.push_back(unvec_col(em.q.col(i), em.p, em.m));
  return out;
}

Eigen::MatrixXd q_from_kraus(const std::vector<Eigen::MatrixXd>& factors) {
  if (factors.empty()) throw StructuralError("q_from_kraus: no factors");
  const Eigen::Index p = factors.front().rows();
  const Eigen::Index m = factors.front().cols();
  Eigen::MatrixXd q(m * p, static_cast<Eigen::Index>(factors.size()));
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (factors[i].rows() != p || factors[i].cols() != m)
      throw StructuralError("q_from_kraus: factors must share one shape");
    q.col(static_cast<Eigen::Index>(i)) = vec_col(factors[i]);
  }
  return q;
}

Eigen::MatrixXd low_rank_factor(const Eigen::MatrixXd& q, Eigen::Index p,
                                const Eigen::MatrixXd& phi) {
  if (p < 1 || q.rows() % p != 0)
    throw StructuralError("low_rank_factor: Q rows not divisible by p");
  const Eigen::Index m = q.rows() / p;
  check_features(phi, m, "low_rank_factor");
  const Eigen::Index n = phi.cols();
  const Eigen::Index r = q.cols();
  Eigen::MatrixXd z(n * p, r);
  Eigen::MatrixXd slice(p, n);
  for (Eigen::Index j = 0; j < r; ++j) {
    // column j of Q unfolds to the j-th Kraus factor; its product with phi
    // stacks into the j-th column of Z
    const Eigen::Map<const Eigen::MatrixXd> mj(q.col(j).data(), p, m);
    slice.noalias() = mj * phi;
    z.col(j) = Eigen::Map<const Eigen::VectorXd>(slice.data(), n * p);
  }
  return z;
}

Eigen::MatrixXd low_rank_factor(const EntangledModel& em, const Eigen::MatrixXd& phi) {
  check_model(em);
  check_features(phi, em.m, "low_rank_factor");
  return low_rank_factor(em.q, em.p, phi);
}

BlockMatrix assemble_gram_entangled(const EntangledModel& em, const Eigen::MatrixXd& phi) {
  const Eigen::MatrixXd z = low_rank_factor(em, phi);
  Eigen::MatrixXd g(z.rows(), z.rows());
  g.setZero();
  g.selfadjointView<Eigen::Lower>().rankUpdate(z);
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  return BlockMatrix(std::move(g), em.p);
}

Eigen::MatrixXd scalar_factor(const Eigen::MatrixXd& q, Eigen::Index p) {
  if (p < 1 || q.rows() % p != 0)
    throw StructuralError("scalar_factor: Q rows not divisible by p");
  const Eigen::Index m = q.rows() / p;
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m, m);
  // block trace of Q*Q^T: sum over output channel k of the m x r row slices
  for (Eigen::Index k = 0; k < p; ++k) {
    const auto qk = q(Eigen::seqN(k, m, p), Eigen::all);
    b.selfadjointView<Eigen::Lower>().rankUpdate(Eigen::MatrixXd(qk));
  }
  b.triangularView<Eigen::StrictlyUpper>() = b.transpose();
  return b;
}

Eigen::MatrixXd scalar_factor(const EntangledModel& em) {
  check_model(em);
  return scalar_factor(em.q, em.p);
}

Eigen::MatrixXd extract_scalar_kernel(const EntangledModel& em, const Eigen::MatrixXd& phi_a,
                                      const Eigen::MatrixXd& phi_b) {
  check_model(em);
  check_features(phi_a, em.m, "extract_scalar_kernel");
  check_features(phi_b, em.m, "extract_scalar_kernel");
  const Eigen::MatrixXd b = scalar_factor(em);
  return phi_a.transpose() * b * phi_b;
}

namespace debug {

Eigen::MatrixXd materialize_d(const Eigen::MatrixXd& q) {
  return q * q.transpose();
}

}  // namespace debug

}  // namespace ekl

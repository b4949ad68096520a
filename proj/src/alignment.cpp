#include "ekl/alignment.hpp"

#include <array>
#include <cmath>
#include <string>

#include "ekl/ovk.hpp"
#include "ekl/rng.hpp"
#include "ekl/tensor.hpp"

namespace ekl {

namespace {

constexpr double kZeroTol = 1e-12;

// --------------------------------------------------------------------------
// Fixed data shared by all objective/gradient evaluations for one (phi, Y,
// gamma) triple.  Everything Q-independent is precomputed here; in
// particular the label-side centered norms, so degenerate labels are
// rejected once up front.
struct Problem {
  Eigen::MatrixXd phi;  // m x n
  Eigen::Index m = 0, n = 0, p = 0;
  double gamma = 0.0;
  bool use_trace_term = false;  // weight (1-gamma) > 0
  bool use_full_term = false;   // weight gamma > 0

  // Block-trace term, centering at size n.
  Eigen::MatrixXd w1;      // m x m  Phi_c (Y^T Y)_c Phi_c^T
  Eigen::MatrixXd e;       // m x m  Phi_c Phi_c^T
  double c1_norm = 0.0;    // |(Y^T Y)_c|_F

  // Full-Gram term, centering at size n*p.
  Eigen::VectorXd yv_c;      // n*p   vec(Y) minus its grand mean
  Eigen::MatrixXd yv_c_mat;  // p x n unfolded yv_c
  Eigen::VectorXd wv;        // m*p   (Phi kron I) yv_c
  double c2_norm = 0.0;      // |yv_c|^2 = |yv_c yv_c^T|_F
};

Problem make_problem(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& y, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw std::invalid_argument("alignment: gamma must lie in [0, 1]");
  if (phi.cols() != y.cols())
    throw StructuralError("alignment: phi and Y must agree on the sample count, got " +
                          std::to_string(phi.cols()) + " vs " + std::to_string(y.cols()));
  if (phi.rows() < 1 || y.rows() < 1 || y.cols() < 2)
    throw StructuralError("alignment: need m >= 1, p >= 1 and at least two samples");

  Problem pb;
  pb.phi = phi;
  pb.m = phi.rows();
  pb.n = phi.cols();
  pb.p = y.rows();
  pb.gamma = gamma;
  pb.use_trace_term = gamma < 1.0;
  pb.use_full_term = gamma > 0.0;

  const double y_scale = std::max(1.0, y.squaredNorm());

  if (pb.use_trace_term) {
    // Y * H_n: remove each channel's mean over the n samples
    Eigen::MatrixXd y_rowc = y;
    y_rowc.colwise() -= y.rowwise().mean().eval();
    const Eigen::MatrixXd a1 = y_rowc * phi.transpose();  // p x m
    pb.w1 = a1.transpose() * a1;
    Eigen::MatrixXd phi_c = phi;
    phi_c.colwise() -= phi.rowwise().mean().eval();
    pb.e = phi_c * phi_c.transpose();
    pb.c1_norm = (y_rowc * y_rowc.transpose()).norm();  // = |H Y^T Y H|_F
    if (pb.c1_norm <= kZeroTol * y_scale)
      throw UndefinedAlignmentError(
          "alignment: Y^T Y centers to zero (labels are constant across samples)");
  }

  if (pb.use_full_term) {
    pb.yv_c = vec_col(y);
    pb.yv_c.array() -= pb.yv_c.mean();
    pb.c2_norm = pb.yv_c.squaredNorm();
    if (pb.c2_norm <= kZeroTol * y_scale)
      throw UndefinedAlignmentError("alignment: vec(Y) centers to zero (labels are constant)");
    pb.yv_c_mat = unvec_col(pb.yv_c, pb.p, pb.n);
    pb.wv = vec_col(pb.yv_c_mat * phi.transpose());  // m*p
  }
  return pb;
}

// Q-dependent quantities of one evaluation point (unit-norm Q).
struct Terms {
  Eigen::MatrixXd z;    // n*p x r
  Eigen::MatrixXd zc;   // n*p x r column-centered
  Eigen::MatrixXd s_r;  // r x r    zc^T zc
  Eigen::VectorXd v2;   // r        zc^T yv_c
  double f2 = 0.0, g2 = 0.0;
  Eigen::MatrixXd b;    // m x m scalar factor
  double f1 = 0.0, g1 = 0.0;
  double objective = 0.0;
};

// Symmetric rank update helper: out = a^T a without the redundant half.
Eigen::MatrixXd syrk(const Eigen::MatrixXd& a) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(a.cols(), a.cols());
  out.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
  out.triangularView<Eigen::StrictlyUpper>() = out.transpose();
  return out;
}

double trace_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.cwiseProduct(b.transpose()).sum();  // tr(a * b)
}

Terms evaluate(const Problem& pb, const Eigen::MatrixXd& q) {
  Terms t;
  if (pb.use_trace_term) {
    t.b = scalar_factor(q, pb.p);
    t.f1 = t.b.cwiseProduct(pb.w1).sum();
    const Eigen::MatrixXd be = t.b * pb.e;
    t.g1 = std::sqrt(std::max(trace_product(be, be), 0.0));
    if (t.g1 <= kZeroTol * std::max(1.0, pb.e.norm()))
      throw UndefinedAlignmentError("alignment: block-trace Gram centers to zero");
  }
  if (pb.use_full_term) {
    t.z = low_rank_factor(q, pb.p, pb.phi);
    t.zc = t.z;
    t.zc.rowwise() -= t.z.colwise().mean().eval();
    t.s_r = syrk(t.zc);
    t.v2.noalias() = t.zc.transpose() * pb.yv_c;
    t.f2 = t.v2.squaredNorm();
    t.g2 = t.s_r.norm();
    if (t.g2 <= kZeroTol) throw UndefinedAlignmentError("alignment: Gram centers to zero");
  }
  double obj = 0.0;
  if (pb.use_trace_term) obj += (1.0 - pb.gamma) * t.f1 / (t.g1 * pb.c1_norm);
  if (pb.use_full_term) obj += pb.gamma * t.f2 / (t.g2 * pb.c2_norm);
  t.objective = obj;
  return t;
}

// (Phi kron I_p) applied to each column of a (n*p x r), giving m*p x r.
Eigen::MatrixXd lift_to_q_space(const Problem& pb, const Eigen::MatrixXd& a) {
  Eigen::MatrixXd out(pb.m * pb.p, a.cols());
  Eigen::MatrixXd slice(pb.p, pb.m);
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    const Eigen::Map<const Eigen::MatrixXd> aj(a.col(j).data(), pb.p, pb.n);
    slice.noalias() = aj * pb.phi.transpose();
    out.col(j) = Eigen::Map<const Eigen::VectorXd>(slice.data(), pb.m * pb.p);
  }
  return out;
}

Eigen::MatrixXd gradient(const Problem& pb, const Eigen::MatrixXd& q, const Terms& t) {
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(q.rows(), q.cols());
  if (pb.use_trace_term) {
    const Eigen::MatrixXd ebe = pb.e * t.b * pb.e;
    const Eigen::MatrixXd v1 = pb.w1 - (t.f1 / (t.g1 * t.g1)) * ebe;
    const double scale = (1.0 - pb.gamma) * 2.0 / (t.g1 * pb.c1_norm);
    for (Eigen::Index k = 0; k < pb.p; ++k) {
      const auto rows = Eigen::seqN(k, pb.m, pb.p);
      grad(rows, Eigen::all) += scale * (v1 * Eigen::MatrixXd(q(rows, Eigen::all)));
    }
  }
  if (pb.use_full_term) {
    const Eigen::MatrixXd f2m = lift_to_q_space(pb, t.zc);  // (Phi kron I) Zc
    const double scale = pb.gamma * 2.0 / (t.g2 * pb.c2_norm);
    grad.noalias() += scale * (pb.wv * t.v2.transpose());
    grad.noalias() -= scale * (t.f2 / (t.g2 * t.g2)) * (f2m * t.s_r);
  }
  return grad;
}

Eigen::MatrixXd normalized_or_throw(const Eigen::MatrixXd& q, Eigen::Index expected_rows) {
  if (q.rows() != expected_rows)
    throw StructuralError("alignment: Q has " + std::to_string(q.rows()) +
                          " rows, expected m*p = " + std::to_string(expected_rows));
  if (q.cols() < 1) throw StructuralError("alignment: Q must have at least one column");
  const double norm = q.norm();
  if (!(norm > 0.0)) throw std::invalid_argument("alignment: Q must be nonzero");
  return q / norm;
}

// --------------------------------------------------------------------------
// Objective restricted to the ray Q + eta * V, expressed through low-order
// polynomials in eta.  Because the objective is scale invariant, no
// renormalisation enters; each candidate step then costs O(1), so the line
// search price does not depend on how often it backtracks.
struct LinePolys {
  bool use1 = false, use2 = false;
  double w1_t1 = 0.0, w2_t1 = 0.0;  // term weights (1-gamma), gamma
  double c1 = 1.0, c2 = 1.0;
  // term 1: f1 quadratic, g1^2 quartic
  std::array<double, 3> f1{};
  std::array<double, 5> g1sq{};
  // term 2: f2 quadratic, g2^2 quartic
  std::array<double, 3> f2{};
  std::array<double, 5> g2sq{};

  double eval(double eta) const {
    double obj = 0.0;
    if (use1) {
      const double f = f1[0] + eta * (f1[1] + eta * f1[2]);
      double g = g1sq[0];
      double pw = 1.0;
      for (int i = 1; i < 5; ++i) {
        pw *= eta;
        g += g1sq[static_cast<std::size_t>(i)] * pw;
      }
      obj += w1_t1 * f / (std::sqrt(std::max(g, 0.0)) * c1);
    }
    if (use2) {
      const double f = f2[0] + eta * (f2[1] + eta * f2[2]);
      double g = g2sq[0];
      double pw = 1.0;
      for (int i = 1; i < 5; ++i) {
        pw *= eta;
        g += g2sq[static_cast<std::size_t>(i)] * pw;
      }
      obj += w2_t1 * f / (std::sqrt(std::max(g, 0.0)) * c2);
    }
    return obj;
  }
};

LinePolys make_line_polys(const Problem& pb, const Eigen::MatrixXd& q, const Eigen::MatrixXd& v,
                          const Terms& t) {
  LinePolys lp;
  lp.use1 = pb.use_trace_term;
  lp.use2 = pb.use_full_term;
  lp.w1_t1 = 1.0 - pb.gamma;
  lp.w2_t1 = pb.gamma;
  lp.c1 = pb.c1_norm;
  lp.c2 = pb.c2_norm;

  if (lp.use1) {
    // B(eta) = b0 + eta*b1 + eta^2*b2
    Eigen::MatrixXd b1 = Eigen::MatrixXd::Zero(pb.m, pb.m);
    Eigen::MatrixXd b2 = Eigen::MatrixXd::Zero(pb.m, pb.m);
    for (Eigen::Index k = 0; k < pb.p; ++k) {
      const auto rows = Eigen::seqN(k, pb.m, pb.p);
      const Eigen::MatrixXd qk = q(rows, Eigen::all);
      const Eigen::MatrixXd vk = v(rows, Eigen::all);
      const Eigen::MatrixXd cross = qk * vk.transpose();
      b1 += cross + cross.transpose();
      b2 += vk * vk.transpose();
    }
    const Eigen::MatrixXd& b0 = t.b;
    lp.f1 = {b0.cwiseProduct(pb.w1).sum(), b1.cwiseProduct(pb.w1).sum(),
             b2.cwiseProduct(pb.w1).sum()};
    const Eigen::MatrixXd c0 = b0 * pb.e, c1m = b1 * pb.e, c2m = b2 * pb.e;
    const double t00 = trace_product(c0, c0);
    const double t01 = trace_product(c0, c1m);
    const double t02 = trace_product(c0, c2m);
    const double t11 = trace_product(c1m, c1m);
    const double t12 = trace_product(c1m, c2m);
    const double t22 = trace_product(c2m, c2m);
    lp.g1sq = {t00, 2.0 * t01, t11 + 2.0 * t02, 2.0 * t12, t22};
  }
  if (lp.use2) {
    Eigen::MatrixXd zv = low_rank_factor(v, pb.p, pb.phi);
    zv.rowwise() -= zv.colwise().mean().eval();  // centered direction factor
    const Eigen::VectorXd v2v = zv.transpose() * pb.yv_c;
    lp.f2 = {t.v2.squaredNorm(), 2.0 * t.v2.dot(v2v), v2v.squaredNorm()};
    const Eigen::MatrixXd s_zv = t.zc.transpose() * zv;
    const Eigen::MatrixXd t1m = s_zv + s_zv.transpose();
    const Eigen::MatrixXd t2m = syrk(zv);
    const Eigen::MatrixXd& t0m = t.s_r;
    const double t00 = t0m.squaredNorm();
    const double t01 = t0m.cwiseProduct(t1m).sum();
    const double t02 = t0m.cwiseProduct(t2m).sum();
    const double t11 = t1m.squaredNorm();
    const double t12 = t1m.cwiseProduct(t2m).sum();
    const double t22 = t2m.squaredNorm();
    lp.g2sq = {t00, 2.0 * t01, t11 + 2.0 * t02, 2.0 * t12, t22};
  }
  return lp;
}

}  // namespace

double centered_alignment(const Eigen::MatrixXd& m, const Eigen::MatrixXd& n) {
  if (m.rows() != n.rows() || m.cols() != n.cols())
    throw StructuralError("centered_alignment: arguments must share a shape");
  const Eigen::MatrixXd mc = center(m);
  const Eigen::MatrixXd nc = center(n);
  const double mn = mc.norm();
  const double nn = nc.norm();
  if (mn <= kZeroTol * std::max(1.0, m.norm()) || nn <= kZeroTol * std::max(1.0, n.norm()))
    throw UndefinedAlignmentError("centered_alignment: an argument centers to zero");
  return mc.cwiseProduct(nc).sum() / (mn * nn);
}

double ekl_objective(const Eigen::MatrixXd& q, const Eigen::MatrixXd& phi,
                     const Eigen::MatrixXd& y, double gamma) {
  const Problem pb = make_problem(phi, y, gamma);
  const Eigen::MatrixXd qn = normalized_or_throw(q, pb.m * pb.p);
  return evaluate(pb, qn).objective;
}

Eigen::MatrixXd ekl_gradient(const Eigen::MatrixXd& q, const Eigen::MatrixXd& phi,
                             const Eigen::MatrixXd& y, double gamma) {
  const Problem pb = make_problem(phi, y, gamma);
  const Eigen::MatrixXd qn = normalized_or_throw(q, pb.m * pb.p);
  const Terms t = evaluate(pb, qn);
  return gradient(pb, qn, t);
}

LearnResult learn_entangled_kernel(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& y,
                                   Eigen::Index r, const LearnConfig& cfg) {
  if (r < 1) throw std::invalid_argument("learn_entangled_kernel: rank budget must be >= 1");
  if (cfg.max_iters < 0 || cfg.grad_tol < 0.0 || cfg.step_init <= 0.0 ||
      !(cfg.backtrack > 0.0 && cfg.backtrack < 1.0) || !(cfg.armijo_c > 0.0 && cfg.armijo_c < 1.0))
    throw std::invalid_argument("learn_entangled_kernel: invalid optimiser settings");
  const Problem pb = make_problem(phi, y, cfg.gamma);

  Rng rng(cfg.seed);
  Eigen::MatrixXd q = gaussian_matrix(rng, pb.m * pb.p, r);
  q /= q.norm();

  LearnResult res;
  Terms t = evaluate(pb, q);
  res.objective_history.push_back(t.objective);
  if (cfg.on_iterate) cfg.on_iterate(q, t.objective);

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    Eigen::MatrixXd g = gradient(pb, q, t);
    g -= g.cwiseProduct(q).sum() * q;  // project onto the sphere's tangent space
    const double gn = g.norm();
    res.final_grad_norm = gn;
    if (gn < cfg.grad_tol) {
      res.converged = true;
      break;
    }

    const LinePolys lp = make_line_polys(pb, q, g, t);
    double eta = cfg.step_init;
    bool accepted = false;
    while (eta > 1e-14) {
      const double cand = lp.eval(eta);
      if (cand >= t.objective + cfg.armijo_c * eta * gn * gn) {
        accepted = true;
        break;
      }
      eta *= cfg.backtrack;
    }
    if (!accepted) break;  // no improving step along the gradient survives rounding

    Eigen::MatrixXd q_next = q + eta * g;
    q_next /= q_next.norm();
    const Terms t_next = evaluate(pb, q_next);
    if (t_next.objective < t.objective) break;  // fp-level stall: keep the better iterate
    q = std::move(q_next);
    t = t_next;
    res.iterations = iter + 1;
    res.objective_history.push_back(t.objective);
    if (cfg.on_iterate) cfg.on_iterate(q, t.objective);
  }

  res.q = std::move(q);
  return res;
}

}  // namespace ekl

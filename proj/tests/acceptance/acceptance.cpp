// Acceptance suite: ten end-to-end checks of the library's core claims, from
// exact algebraic identities through optimiser contracts to full synthetic
// experiments and timing orderings.  Each criterion prints exactly one line
// (PASS / FAIL / SKIP with a short detail) and the process exits nonzero iff
// any non-skipped criterion fails.  All tolerances are pinned as constants
// below; reference values come from the independent oracle helpers, never
// from the code paths under test.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ekl/alignment.hpp"
#include "ekl/features.hpp"
#include "ekl/harness.hpp"
#include "ekl/ovk.hpp"
#include "ekl/rng.hpp"
#include "ekl/separability.hpp"
#include "ekl/solver.hpp"
#include "ekl/tensor.hpp"
#include "support/oracles.hpp"

namespace {

using Clock = std::chrono::steady_clock;

// ---------------------------------------------------------------------------
// Pinned tolerances and experiment constants.

constexpr double kAlgebraRelTol = 1e-8;   // criterion 1: identity residuals
constexpr int kAlgebraInstances = 20;     // criterion 1: random instances
constexpr double kPsdRelTol = 1e-8;       // criterion 2: eigenvalue floor
constexpr int kPsdInstances = 50;         // criterion 2: random models
constexpr double kGradRelTol = 1e-5;      // criterion 3: analytic vs FD
constexpr int kGradSeeds = 20;            // criterion 3: random seeds
constexpr double kGradFdStep = 1e-6;      // criterion 3: central FD step
constexpr double kUnitNormTol = 1e-12;    // criterion 4: |Q|_F drift
constexpr double kRotInvTol = 1e-12;      // criterion 4: objective under Q->QR
constexpr double kBellAbsTol = 1e-10;     // criterion 5: Bell eigenvalue
constexpr int kPptInstances = 10;         // criterion 5: Kronecker inputs
constexpr double kRankSlack = 0.15;       // criterion 7: allowed median excess

// Synthetic experiment (criteria 6 and 7): small-sample multi-output
// regression with many more outputs than training samples.
constexpr Eigen::Index kSynthTrain = 20;
constexpr Eigen::Index kSynthTest = 100;
constexpr Eigen::Index kSynthOutputs = 100;
constexpr Eigen::Index kSynthInputs = 10;
constexpr double kSynthNoise = 0.1;
constexpr int kSynthSeeds = 10;

double rel_err(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want) {
  return (got - want).norm() / want.norm();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

struct Outcome {
  bool pass = false;
  bool skipped = false;
  std::string detail;
};

Outcome pass(std::string detail) { return {true, false, std::move(detail)}; }
Outcome fail(std::string detail) { return {false, false, std::move(detail)}; }
Outcome skip(std::string detail) { return {false, true, std::move(detail)}; }

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, args);
  va_end(args);
  return std::string(buf);
}

// ---------------------------------------------------------------------------
// Criterion 1: algebraic identities against loop/dense oracles on random
// instances — partial trace of a Kronecker product, block trace of the
// assembled Gram, factorised Gram vs dense materialisation, operator-sum form
// of a separable kernel, and both low-rank ridge solvers vs dense solves.

Outcome criterion1() {
  double worst = 0.0;
  for (int inst = 0; inst < kAlgebraInstances; ++inst) {
    ekl::Rng rng(9000 + static_cast<std::uint64_t>(inst));
    const auto n = static_cast<Eigen::Index>(4 + rng.below(27));   // 4..30
    const auto p = static_cast<Eigen::Index>(2 + rng.below(4));    // 2..5
    const auto m = static_cast<Eigen::Index>(2 + rng.below(9));    // 2..10
    const auto r = static_cast<Eigen::Index>(1 + rng.below(static_cast<std::uint64_t>(m * p)));
    const double lambda = std::pow(10.0, rng.uniform(-3.0, 1.0));

    const Eigen::MatrixXd phi = ekl::gaussian_matrix(rng, m, n);
    const Eigen::MatrixXd q = ekl::gaussian_matrix(rng, m * p, r);
    const Eigen::MatrixXd y = ekl::gaussian_matrix(rng, p, n);

    // Partial trace of a Kronecker product collapses the inner factor to its
    // trace.
    const Eigen::MatrixXd outer = ekl::gaussian_matrix(rng, p, p);
    const Eigen::MatrixXd inner = ekl::gaussian_matrix(rng, m, m);
    const Eigen::MatrixXd traced =
        ekl::partial_trace(ekl::BlockMatrix(oracle::kron_loops(outer, inner), m));
    worst = std::max(worst, rel_err(traced, inner.trace() * outer));

    ekl::EntangledModel em;
    em.p = p;
    em.m = m;
    em.q = q;
    const ekl::BlockMatrix gram = ekl::assemble_gram_entangled(em, phi);

    // Block trace of the assembled Gram equals the scalar kernel through the
    // partial trace of D.
    const Eigen::MatrixXd b_ref = oracle::partial_trace_loops(q * q.transpose(), p);
    worst = std::max(
        worst, rel_err(ekl::partial_trace(gram), phi.transpose() * b_ref * phi));

    // Factorised assembly matches the dense lift-and-multiply oracle.
    worst = std::max(worst, rel_err(gram.data, oracle::gram_entangled_dense(q, p, phi)));

    // Operator-sum form of a separable kernel reproduces k(x,z) * T.
    const Eigen::MatrixXd a = ekl::gaussian_matrix(rng, p, p);
    const Eigen::MatrixXd t_psd = a * a.transpose();
    const ekl::ChoiKrausKernel ck = ekl::separable_to_choi_kraus(t_psd, m);
    for (int pair = 0; pair < 3; ++pair) {
      const Eigen::VectorXd fx = ekl::gaussian_matrix(rng, m, 1);
      const Eigen::VectorXd fz = ekl::gaussian_matrix(rng, m, 1);
      const Eigen::MatrixXd got = ekl::choi_kraus_eval(ck, fx, fz);
      const Eigen::MatrixXd want = fx.dot(fz) * t_psd;
      // Scale-correct denominator: the natural magnitude of the block, which
      // never vanishes even when the feature vectors are nearly orthogonal.
      const double scale = t_psd.norm() * fx.norm() * fz.norm();
      worst = std::max(worst, (got - want).norm() / scale);
    }

    // Identity-based low-rank solver agrees with a dense LU solve of the
    // materialised system.
    const ekl::OvkFit fit = ekl::fit_operator_valued(em, phi, y, lambda);
    const Eigen::VectorXd c_dense = oracle::solve_dense(
        oracle::gram_entangled_dense(q, p, phi), oracle::vec_loops(y), lambda);
    worst = std::max(worst, rel_err(fit.c, c_dense));

    // Same for the block-trace scalar solver, channel by channel.
    const ekl::ScalarFit sfit = ekl::fit_scalar(em, phi, y, lambda);
    const Eigen::MatrixXd k_tr = phi.transpose() * b_ref * phi;
    Eigen::MatrixXd coef_dense(n, p);
    for (Eigen::Index ch = 0; ch < p; ++ch)
      coef_dense.col(ch) = oracle::solve_dense(k_tr, y.row(ch).transpose(), lambda);
    worst = std::max(worst, rel_err(sfit.coef, coef_dense));
  }
  if (worst <= kAlgebraRelTol)
    return pass(fmt("5 identities on %d random instances, max relative error %.2e",
                    kAlgebraInstances, worst));
  return fail(fmt("max relative error %.2e exceeds %.0e", worst, kAlgebraRelTol));
}

// ---------------------------------------------------------------------------
// Criterion 2: assembled Grams are numerically positive semidefinite — the
// smallest eigenvalue never falls below -1e-8 times the spectral norm.

Outcome criterion2() {
  double worst_ratio = 0.0;  // most negative (min eig / spectral norm)
  for (int inst = 0; inst < kPsdInstances; ++inst) {
    ekl::Rng rng(17000 + static_cast<std::uint64_t>(inst));
    const auto n = static_cast<Eigen::Index>(5 + rng.below(21));  // 5..25
    const auto p = static_cast<Eigen::Index>(2 + rng.below(4));   // 2..5
    const auto m = static_cast<Eigen::Index>(2 + rng.below(7));   // 2..8
    const auto r = static_cast<Eigen::Index>(1 + rng.below(static_cast<std::uint64_t>(m * p)));
    ekl::EntangledModel em;
    em.p = p;
    em.m = m;
    em.q = ekl::gaussian_matrix(rng, m * p, r);
    const Eigen::MatrixXd phi = ekl::gaussian_matrix(rng, m, n);
    const ekl::BlockMatrix gram = ekl::assemble_gram_entangled(em, phi);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram.data,
                                                            Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double spectral = es.eigenvalues().cwiseAbs().maxCoeff();
    worst_ratio = std::min(worst_ratio, lo / spectral);
  }
  if (worst_ratio >= -kPsdRelTol)
    return pass(fmt("%d random models, worst min-eigenvalue ratio %.2e", kPsdInstances,
                    worst_ratio));
  return fail(fmt("min eigenvalue ratio %.2e below -%.0e", worst_ratio, kPsdRelTol));
}

// ---------------------------------------------------------------------------
// Criterion 3: the analytic objective gradient matches central finite
// differences of the dense-oracle objective at (n, p, m, r) = (5, 2, 3, 2).

Outcome criterion3() {
  double worst = 0.0;
  for (int seed = 0; seed < kGradSeeds; ++seed) {
    ekl::Rng rng(23000 + static_cast<std::uint64_t>(seed));
    const Eigen::Index n = 5, p = 2, m = 3, r = 2;
    const Eigen::MatrixXd phi = ekl::gaussian_matrix(rng, m, n);
    const Eigen::MatrixXd y = ekl::gaussian_matrix(rng, p, n);
    Eigen::MatrixXd q = ekl::gaussian_matrix(rng, m * p, r);
    q /= q.norm();  // the analytic gradient is taken at the normalised point
    const double gamma = static_cast<double>(seed) / (kGradSeeds - 1.0);
    const Eigen::MatrixXd analytic = ekl::ekl_gradient(q, phi, y, gamma);
    const Eigen::MatrixXd fd = oracle::fd_gradient(q, phi, y, gamma, kGradFdStep);
    worst = std::max(worst, rel_err(analytic, fd));
  }
  if (worst < kGradRelTol)
    return pass(fmt("%d seeds over gamma in [0,1], max relative error %.2e", kGradSeeds,
                    worst));
  return fail(fmt("gradient relative error %.2e reaches %.0e", worst, kGradRelTol));
}

// ---------------------------------------------------------------------------
// Criterion 4: optimiser contract — monotone objective over accepted steps,
// unit Frobenius norm at every iterate, and invariance of the objective under
// right-multiplication of Q by an orthogonal matrix.

Outcome criterion4() {
  double worst_norm_drift = 0.0;
  double worst_rotation = 0.0;
  for (int seed = 0; seed < 5; ++seed) {
    ekl::Rng rng(31000 + static_cast<std::uint64_t>(seed));
    const Eigen::Index n = 12, p = 3, m = 4, r = 5;
    const Eigen::MatrixXd phi = ekl::gaussian_matrix(rng, m, n);
    const Eigen::MatrixXd y = ekl::gaussian_matrix(rng, p, n);

    std::vector<double> norms, objectives;
    ekl::LearnConfig cfg;
    cfg.gamma = 0.5;
    cfg.max_iters = 40;
    cfg.seed = 31000 + static_cast<std::uint64_t>(seed);
    cfg.on_iterate = [&](const Eigen::MatrixXd& q_itr, double obj) {
      norms.push_back(q_itr.norm());
      objectives.push_back(obj);
    };
    const ekl::LearnResult res = ekl::learn_entangled_kernel(phi, y, r, cfg);

    if (norms.empty()) return fail("optimiser reported no iterates");
    for (double nq : norms) worst_norm_drift = std::max(worst_norm_drift, std::abs(nq - 1.0));
    for (std::size_t i = 1; i < objectives.size(); ++i)
      if (objectives[i] < objectives[i - 1])
        return fail(fmt("objective decreased at accepted step %zu (%.17g -> %.17g)", i,
                        objectives[i - 1], objectives[i]));
    for (std::size_t i = 1; i < res.objective_history.size(); ++i)
      if (res.objective_history[i] < res.objective_history[i - 1])
        return fail(fmt("recorded history decreased at step %zu", i));

    // Objective invariance under Q -> Q R, R orthogonal: check at the learned
    // point and at a fresh random point.
    const Eigen::MatrixXd rot =
        Eigen::HouseholderQR<Eigen::MatrixXd>(ekl::gaussian_matrix(rng, r, r))
            .householderQ();
    Eigen::MatrixXd q_rand = ekl::gaussian_matrix(rng, m * p, r);
    q_rand /= q_rand.norm();
    for (const Eigen::MatrixXd& q : {res.q, q_rand}) {
      const double base = ekl::ekl_objective(q, phi, y, cfg.gamma);
      const double rotated = ekl::ekl_objective(q * rot, phi, y, cfg.gamma);
      worst_rotation = std::max(worst_rotation, std::abs(rotated - base));
    }
  }
  if (worst_norm_drift > kUnitNormTol)
    return fail(fmt("iterate norm drifts %.2e from 1", worst_norm_drift));
  if (worst_rotation > kRotInvTol)
    return fail(fmt("objective changes %.2e under orthogonal rotation", worst_rotation));
  return pass(fmt("monotone ascent, norm drift %.1e, rotation invariance %.1e",
                  worst_norm_drift, worst_rotation));
}

// ---------------------------------------------------------------------------
// Criterion 5: the positive-partial-transpose check accepts every Kronecker
// product of psd factors and flags the maximally entangled Bell matrix with
// minimum eigenvalue -1/2.

Outcome criterion5() {
  for (int inst = 0; inst < kPptInstances; ++inst) {
    ekl::Rng rng(41000 + static_cast<std::uint64_t>(inst));
    const auto n = static_cast<Eigen::Index>(3 + rng.below(6));  // 3..8
    const auto p = static_cast<Eigen::Index>(2 + rng.below(3));  // 2..4
    const Eigen::MatrixXd a = ekl::gaussian_matrix(rng, n, n);
    const Eigen::MatrixXd b = ekl::gaussian_matrix(rng, p, p);
    const Eigen::MatrixXd k = a * a.transpose();
    const Eigen::MatrixXd t = b * b.transpose();
    const ekl::PptReport rep = ekl::ppt_check(ekl::BlockMatrix(oracle::kron_loops(k, t), p));
    if (!rep.ppt_holds)
      return fail(fmt("Kronecker-product input flagged entangled (instance %d, min eig %.2e)",
                      inst, rep.min_eigenvalue));
  }
  const ekl::PptReport bell = ekl::ppt_check(ekl::BlockMatrix(oracle::bell_matrix(), 2));
  if (!bell.entangled) return fail("Bell matrix not flagged entangled");
  if (std::abs(bell.min_eigenvalue + 0.5) > kBellAbsTol)
    return fail(fmt("Bell min eigenvalue %.12g, expected -0.5 within %.0e",
                    bell.min_eigenvalue, kBellAbsTol));
  return pass(fmt("%d Kronecker inputs accepted; Bell rejected with min eigenvalue %.12g",
                  kPptInstances, bell.min_eigenvalue));
}

// ---------------------------------------------------------------------------
// Criteria 6 and 7 share one synthetic study: many-output bilinear data with
// few training samples, hyperparameters cross-validated per seed.  Criterion
// 6 compares the entangled methods against the baselines at half rank budget;
// criterion 7 re-fits the operator-valued model at full rank with the same
// per-seed hyperparameters and compares medians.

struct SeedChoice {
  double lambda = 0.0;
  double gamma = 0.0;
  ekl::TrainTestSplit split;
};

struct Study {
  std::vector<double> nm_ekl, nm_ptr, nm_krr, nm_sep;  // per-seed test nmse
  std::vector<SeedChoice> ekl_choice;                  // for the full-rank refit
  double elapsed_seconds = 0.0;
};

ekl::ModelConfig synth_config(double rank_fraction, int max_iters, std::uint64_t seed) {
  ekl::ModelConfig cfg;
  cfg.kernel.kind = ekl::ScalarKernelSpec::Kind::Linear;
  cfg.approx = ekl::FeatureMethod::ExactLinear;
  cfg.rank_fraction = rank_fraction;
  cfg.learn.max_iters = max_iters;
  cfg.learn.seed = seed;
  return cfg;
}

const Study& synthetic_study() {
  static const Study study = [] {
    Study s;
    const auto t0 = Clock::now();
    for (int seed = 0; seed < kSynthSeeds; ++seed) {
      const auto us = static_cast<std::uint64_t>(seed);
      const ekl::Dataset ds = ekl::gen_bilinear(kSynthTrain + kSynthTest, kSynthOutputs,
                                                kSynthInputs, kSynthNoise, 1000 + us);
      const ekl::TrainTestSplit split = ekl::split_dataset(ds, kSynthTrain, 2000 + us);

      ekl::CvPlan plan;
      plan.gammas = {0.0, 0.5, 1.0};
      plan.folds = 3;
      plan.seed = 3000 + us;
      // Shorter optimiser budget while ranking hyperparameters, longer for
      // the final fit on the full training set.
      const ekl::ModelConfig cv_cfg = synth_config(0.5, 15, 4000 + us);
      ekl::ModelConfig fit_cfg = synth_config(0.5, 50, 4000 + us);

      const auto run = [&](ekl::Method method, std::vector<double>& out_nmse,
                           double* out_lambda, double* out_gamma) {
        const ekl::CvResult cv = ekl::cross_validate(split.train, plan, method, cv_cfg);
        const ekl::FittedModel fm =
            ekl::fit_method(split.train, method, fit_cfg, cv.best_lambda, cv.best_gamma);
        out_nmse.push_back(ekl::nmse(ekl::predict_method(fm, split.test.x), split.test.y));
        if (out_lambda) *out_lambda = cv.best_lambda;
        if (out_gamma) *out_gamma = cv.best_gamma;
      };

      SeedChoice choice;
      run(ekl::Method::Ekl, s.nm_ekl, &choice.lambda, &choice.gamma);
      choice.split = split;
      s.ekl_choice.push_back(choice);
      run(ekl::Method::PtrEkl, s.nm_ptr, nullptr, nullptr);
      run(ekl::Method::Krr, s.nm_krr, nullptr, nullptr);
      run(ekl::Method::Separable, s.nm_sep, nullptr, nullptr);
    }
    s.elapsed_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return s;
  }();
  return study;
}

Outcome criterion6() {
  const Study& s = synthetic_study();
  const double med_ekl = median(s.nm_ekl);
  const double med_ptr = median(s.nm_ptr);
  const double med_krr = median(s.nm_krr);
  const double med_sep = median(s.nm_sep);
  const std::string detail =
      fmt("median test nmse over %d seeds: entangled %.4f, block-trace %.4f, "
          "ridge %.4f, separable %.4f (%.0f s)",
          kSynthSeeds, med_ekl, med_ptr, med_krr, med_sep, s.elapsed_seconds);
  const bool ordered = med_ekl < med_krr && med_ekl < med_sep &&
                       med_ptr < med_krr && med_ptr < med_sep;
  return ordered ? pass(detail) : fail(detail);
}

Outcome criterion7() {
  const Study& s = synthetic_study();
  const auto t0 = Clock::now();
  std::vector<double> nm_full;
  for (int seed = 0; seed < kSynthSeeds; ++seed) {
    const auto us = static_cast<std::uint64_t>(seed);
    const SeedChoice& choice = s.ekl_choice[static_cast<std::size_t>(seed)];
    const ekl::ModelConfig full_cfg = synth_config(1.0, 50, 4000 + us);
    const ekl::FittedModel fm = ekl::fit_method(choice.split.train, ekl::Method::Ekl,
                                                full_cfg, choice.lambda, choice.gamma);
    nm_full.push_back(
        ekl::nmse(ekl::predict_method(fm, choice.split.test.x), choice.split.test.y));
  }
  const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
  const double med_half = median(s.nm_ekl);
  const double med_full = median(nm_full);
  const std::string detail = fmt(
      "median nmse %.4f at half rank vs %.4f at full rank (%+.1f%%, %.0f s)", med_half,
      med_full, 100.0 * (med_half / med_full - 1.0), elapsed);
  // Half the rank budget must not cost more than the allowed slack; doing
  // better than full rank is unconditionally fine.
  return med_half <= (1.0 + kRankSlack) * med_full ? pass(detail) : fail(detail);
}

// ---------------------------------------------------------------------------
// Criterion 8: wall-clock ordering of the structure classes on one sizeable
// problem — the dense solver must cost more to fit than the factorised one,
// which must cost more than the block-trace scalar one, and dense prediction
// must cost more than factorised prediction.  Absolute times are not checked.

Outcome criterion8() {
  const std::vector<ekl::TimingCell> cells = ekl::timing_benchmark(
      {{400, 8}}, {0.5},
      {ekl::StructureClass::NoStructure, ekl::StructureClass::Entangled,
       ekl::StructureClass::EntangledPtr},
      5, 51000);
  const auto find = [&](ekl::StructureClass cls) -> const ekl::TimingCell& {
    for (const ekl::TimingCell& c : cells)
      if (c.cls == cls) return c;
    throw std::runtime_error("timing cell missing");
  };
  const ekl::TimingCell& dense = find(ekl::StructureClass::NoStructure);
  const ekl::TimingCell& ent = find(ekl::StructureClass::Entangled);
  const ekl::TimingCell& ptr = find(ekl::StructureClass::EntangledPtr);
  const std::string detail =
      fmt("fit %.3fs > %.3fs > %.3fs, predict %.2fms > %.2fms (n=400 p=8 m=%lld r=%lld)",
          dense.fit_seconds, ent.fit_seconds, ptr.fit_seconds,
          1e3 * dense.predict_seconds, 1e3 * ent.predict_seconds,
          static_cast<long long>(dense.m), static_cast<long long>(dense.r));
  const bool ordered = dense.fit_seconds > ent.fit_seconds &&
                       ent.fit_seconds > ptr.fit_seconds &&
                       dense.predict_seconds > ent.predict_seconds;
  return ordered ? pass(detail) : fail(detail);
}

// ---------------------------------------------------------------------------
// Criterion 9: the bound calculators hit their closed-form values exactly.

Outcome criterion9() {
  const double rad = ekl::rademacher_bound(2.0, 4.0, 9, 36);
  if (rad != 2.0) return fail(fmt("rademacher_bound(2,4,9,36) = %.17g, expected 2", rad));
  for (const double emp : {0.0, 0.37, 1.25})
    for (const double delta : {0.05, 0.5}) {
      const double g = ekl::generalization_bound(emp, 0.0, 2.0, 4.0, 9, 36, delta);
      if (g != emp)
        return fail(fmt("zero loss-scale bound %.17g != empirical risk %.17g", g, emp));
    }
  return pass("rademacher_bound(2,4,9,36) = 2 exactly; zero loss scale returns "
              "the empirical risk exactly");
}

// ---------------------------------------------------------------------------
// Criterion 10 (optional input): on the concrete slump-test dataset, the
// entangled model must beat per-output ridge at 12 training samples averaged
// over 10 random splits.  Runs only when the CSV is supplied via the
// EKL_CONCRETE_CSV environment variable (or data/concrete.csv next to the
// working directory); otherwise reports SKIP.

std::optional<std::string> concrete_path() {
  if (const char* env = std::getenv("EKL_CONCRETE_CSV")) return std::string(env);
  for (const char* candidate : {"data/concrete.csv", "../data/concrete.csv"}) {
    if (std::FILE* f = std::fopen(candidate, "rb")) {
      std::fclose(f);
      return std::string(candidate);
    }
  }
  return std::nullopt;
}

Outcome criterion10() {
  const std::optional<std::string> path = concrete_path();
  if (!path)
    return skip("real-data check needs the concrete slump CSV "
                "(set EKL_CONCRETE_CSV or provide data/concrete.csv)");

  const Eigen::Index p_out = 3;  // slump, flow, compressive strength
  ekl::Dataset ds;
  try {
    ds = ekl::load_csv(*path, p_out, /*header=*/true);
  } catch (const std::exception&) {
    ds = ekl::load_csv(*path, p_out, /*header=*/false);
  }
  const Eigen::Index n_train = 12;
  if (ds.x.rows() < n_train + 1)
    return fail(fmt("dataset too small: %lld samples", static_cast<long long>(ds.x.rows())));

  std::vector<double> nm_ekl, nm_krr;
  for (int rep = 0; rep < 10; ++rep) {
    ekl::TrainTestSplit split =
        ekl::split_dataset(ds, n_train, 61000 + static_cast<std::uint64_t>(rep));

    // Standardise inputs with training statistics.
    const Eigen::RowVectorXd mu = split.train.x.colwise().mean();
    Eigen::RowVectorXd sd =
        ((split.train.x.rowwise() - mu).array().square().colwise().mean()).sqrt();
    sd = sd.cwiseMax(1e-12);
    split.train.x = (split.train.x.rowwise() - mu).array().rowwise() / sd.array();
    split.test.x = (split.test.x.rowwise() - mu).array().rowwise() / sd.array();

    // Median-heuristic bandwidth over the training inputs.
    std::vector<double> dists;
    for (Eigen::Index i = 0; i < n_train; ++i)
      for (Eigen::Index j = i + 1; j < n_train; ++j)
        dists.push_back((split.train.x.row(i) - split.train.x.row(j)).norm());
    const double bw = std::max(median(dists), 1e-6);

    ekl::CvPlan plan;
    plan.gammas = {0.0, 0.5, 1.0};
    plan.folds = 3;
    plan.seed = 62000 + static_cast<std::uint64_t>(rep);

    ekl::ModelConfig cfg;
    cfg.kernel.kind = ekl::ScalarKernelSpec::Kind::Gaussian;
    cfg.kernel.bandwidth = bw;
    cfg.approx = ekl::FeatureMethod::Nystrom;
    cfg.feature_dim = 8;  // must not exceed the smallest CV fold
    cfg.rank_fraction = 1.0;
    cfg.learn.max_iters = 60;
    cfg.learn.seed = 63000 + static_cast<std::uint64_t>(rep);

    for (const ekl::Method method : {ekl::Method::Ekl, ekl::Method::Krr}) {
      const ekl::CvResult cv = ekl::cross_validate(split.train, plan, method, cfg);
      const ekl::FittedModel fm =
          ekl::fit_method(split.train, method, cfg, cv.best_lambda, cv.best_gamma);
      const double err = ekl::nmse(ekl::predict_method(fm, split.test.x), split.test.y);
      (method == ekl::Method::Ekl ? nm_ekl : nm_krr).push_back(err);
    }
  }
  const double mean_ekl = mean(nm_ekl);
  const double mean_krr = mean(nm_krr);
  const std::string detail = fmt("mean test nmse over 10 splits of %s: entangled %.4f "
                                 "vs ridge %.4f",
                                 path->c_str(), mean_ekl, mean_krr);
  return mean_ekl < mean_krr ? pass(detail) : fail(detail);
}

}  // namespace

int main() {
  const std::pair<int, Outcome (*)()> criteria[] = {
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},
      {5, criterion5}, {6, criterion6}, {7, criterion7}, {8, criterion8},
      {9, criterion9}, {10, criterion10},
  };
  int failed = 0, passed = 0, skipped = 0;
  for (const auto& [id, fn] : criteria) {
    Outcome out;
    try {
      out = fn();
    } catch (const std::exception& e) {
      out = fail(fmt("unexpected exception: %s", e.what()));
    }
    const char* verdict = out.skipped ? "SKIP" : out.pass ? "PASS" : "FAIL";
    std::printf("criterion %d: %s — %s\n", id, verdict, out.detail.c_str());
    std::fflush(stdout);
    if (out.skipped)
      ++skipped;
    else if (out.pass)
      ++passed;
    else
      ++failed;
  }
  std::printf("acceptance: %d passed, %d failed, %d skipped\n", passed, failed, skipped);
  return failed == 0 ? 0 : 1;
}

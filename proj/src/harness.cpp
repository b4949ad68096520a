#include "ekl/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ekl/io_util.hpp"
#include "ekl/rng.hpp"
#include "ekl/tensor.hpp"

namespace ekl {

// ---------------------------------------------------------------------------
// Shared file plumbing (declared in io_util.hpp).

void atomic_write_file(const std::string& path, const std::string& bytes) {
  namespace fs = std::filesystem;
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw std::runtime_error("write failed for '" + tmp + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ec2;
    fs::remove(tmp, ec2);
    throw std::runtime_error("cannot move '" + tmp + "' to '" + path + "': " + ec.message());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t x = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(idx[i]);
  return out;
}

Eigen::MatrixXd cols_of(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& idx) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = m.col(idx[i]);
  return out;
}

Eigen::Index resolve_feature_dim(const ModelConfig& cfg, Eigen::Index d) {
  if (cfg.approx == FeatureMethod::ExactLinear) return d;
  if (cfg.feature_dim < 1)
    throw std::invalid_argument("ModelConfig: feature_dim must be set for nystrom/rff");
  return cfg.feature_dim;
}

Eigen::Index rank_budget(const ModelConfig& cfg, Eigen::Index m, Eigen::Index p) {
  if (!(cfg.rank_fraction > 0.0 && cfg.rank_fraction <= 1.0))
    throw std::invalid_argument("ModelConfig: rank_fraction must lie in (0, 1]");
  return std::max<Eigen::Index>(
      1, static_cast<Eigen::Index>(std::llround(cfg.rank_fraction * static_cast<double>(m * p))));
}

Eigen::MatrixXd output_covariance(const Eigen::MatrixXd& y) {
  Eigen::MatrixXd yc = y;
  yc.colwise() -= y.rowwise().mean().eval();
  return (yc * yc.transpose()) / static_cast<double>(y.cols());
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  if (v.size() % 2 == 1) return v[k];
  return 0.5 * (v[k - 1] + v[k]);
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Synthetic data and metrics.

Dataset gen_bilinear(Eigen::Index n, Eigen::Index p, Eigen::Index d, double noise_sigma,
                     std::uint64_t seed) {
  if (n < 1 || p < 1 || d < 1)
    throw std::invalid_argument("gen_bilinear: n, p and d must be >= 1");
  if (!(noise_sigma >= 0.0))
    throw std::invalid_argument("gen_bilinear: noise_sigma must be >= 0");
  Rng rng(seed);
  const Eigen::MatrixXd t = gaussian_matrix(rng, p, p);
  const Eigen::MatrixXd c = gaussian_matrix(rng, p, n);
  const Eigen::MatrixXd a = gaussian_matrix(rng, n, n);
  Dataset ds;
  ds.seed = seed;
  ds.x = gaussian_matrix(rng, n, d);
  const Eigen::MatrixXd k = ds.x * ds.x.transpose();
  ds.y = t * c * a + c * k;
  if (noise_sigma > 0.0) ds.y += noise_sigma * gaussian_matrix(rng, p, n);
  return ds;
}

TrainTestSplit split_dataset(const Dataset& ds, Eigen::Index n_train, std::uint64_t seed) {
  const Eigen::Index n = ds.x.rows();
  if (ds.y.cols() != n) throw StructuralError("split_dataset: X and Y disagree on sample count");
  if (n_train < 1 || n_train > n)
    throw std::invalid_argument("split_dataset: need 1 <= n_train <= n");
  Rng rng(seed);
  const std::vector<Eigen::Index> perm = sample_without_replacement(rng, n, n);
  std::vector<Eigen::Index> tr(perm.begin(), perm.begin() + n_train);
  std::vector<Eigen::Index> te(perm.begin() + n_train, perm.end());
  std::sort(tr.begin(), tr.end());
  std::sort(te.begin(), te.end());
  TrainTestSplit split;
  split.train.x = rows_of(ds.x, tr);
  split.train.y = cols_of(ds.y, tr);
  split.train.seed = ds.seed;
  split.test.x = rows_of(ds.x, te);
  split.test.y = cols_of(ds.y, te);
  split.test.seed = ds.seed;
  return split;
}

double nmse(const Eigen::MatrixXd& y_pred, const Eigen::MatrixXd& y_true) {
  if (y_pred.rows() != y_true.rows() || y_pred.cols() != y_true.cols())
    throw StructuralError("nmse: prediction and truth must share a shape");
  if (y_true.cols() < 1) throw StructuralError("nmse: empty evaluation set");
  const Eigen::Index p = y_true.rows();
  const double t = static_cast<double>(y_true.cols());
  double acc = 0.0;
  for (Eigen::Index s = 0; s < p; ++s) {
    const double mse = (y_pred.row(s) - y_true.row(s)).squaredNorm() / t;
    const double mean = y_true.row(s).mean();
    const double var = (y_true.row(s).array() - mean).square().sum() / t;
    if (!(var > 0.0))
      throw std::invalid_argument("nmse: output channel " + std::to_string(s) +
                                  " has zero variance");
    acc += mse / var;
  }
  return acc / static_cast<double>(p);
}

double normalized_improvement(double err_method, double err_krr) {
  if (!(err_krr > 0.0))
    throw std::invalid_argument("normalized_improvement: baseline error must be positive");
  return (err_krr - err_method) / err_krr;
}

// ---------------------------------------------------------------------------
// Training and prediction per method.

FittedModel fit_method(const Dataset& train, Method method, const ModelConfig& cfg,
                       double lambda, double gamma) {
  const Eigen::Index n = train.x.rows();
  const Eigen::Index p = train.y.rows();
  if (n < 1 || train.y.cols() != n)
    throw StructuralError("fit_method: training X and Y disagree on sample count");

  FittedModel fm;
  fm.method = method;
  fm.cfg = cfg;
  fm.lambda = lambda;
  fm.gamma = gamma;
  fm.x_train = train.x;

  switch (method) {
    case Method::Krr: {
      fm.krr = fit_krr_baseline(gram_scalar(cfg.kernel, train.x), train.y, lambda);
      return fm;
    }
    case Method::Separable: {
      fm.sep = fit_separable_baseline(gram_scalar(cfg.kernel, train.x),
                                      output_covariance(train.y), train.y, lambda);
      return fm;
    }
    case Method::Ekl:
    case Method::PtrEkl: {
      const Eigen::Index m_req = resolve_feature_dim(cfg, train.x.cols());
      fm.fmap = fit_feature_map(cfg.kernel, cfg.approx, m_req, train.x, cfg.learn.seed);
      const Eigen::MatrixXd phi = apply_feature_map(fm.fmap, train.x);
      LearnConfig lc = cfg.learn;
      lc.gamma = gamma;
      const Eigen::Index r = rank_budget(cfg, fm.fmap.dim, p);
      LearnResult lr = learn_entangled_kernel(phi, train.y, r, lc);
      fm.objective = lr.objective_history.back();
      fm.em.p = p;
      fm.em.m = fm.fmap.dim;
      fm.em.q = std::move(lr.q);
      fm.em.fmap = fm.fmap;
      if (method == Method::Ekl)
        fm.ovk = fit_operator_valued(fm.em, phi, train.y, lambda);
      else
        fm.sc = fit_scalar(fm.em, phi, train.y, lambda);
      return fm;
    }
  }
  throw std::invalid_argument("fit_method: unknown method");
}

Eigen::MatrixXd predict_method(const FittedModel& fm, const Eigen::MatrixXd& x_test) {
  switch (fm.method) {
    case Method::Krr:
      return predict_krr(fm.krr, gram_scalar(fm.cfg.kernel, x_test, fm.x_train));
    case Method::Separable:
      return predict_separable(fm.sep, gram_scalar(fm.cfg.kernel, x_test, fm.x_train));
    case Method::Ekl:
      return predict_operator_valued(fm.em, fm.ovk, apply_feature_map(fm.fmap, x_test));
    case Method::PtrEkl:
      return predict_scalar(fm.sc, apply_feature_map(fm.fmap, x_test));
  }
  throw std::invalid_argument("predict_method: unknown method");
}

// ---------------------------------------------------------------------------
// Cross validation.

CvResult cross_validate(const Dataset& train, const CvPlan& plan, Method method,
                        const ModelConfig& cfg) {
  const Eigen::Index n = train.x.rows();
  const Eigen::Index p = train.y.rows();
  if (train.y.cols() != n)
    throw StructuralError("cross_validate: training X and Y disagree on sample count");
  if (plan.folds < 2 || plan.folds > n)
    throw std::invalid_argument("cross_validate: need 2 <= folds <= n");
  if (plan.lambdas.empty()) throw std::invalid_argument("cross_validate: empty lambda grid");
  for (double l : plan.lambdas)
    if (!(l > 0.0)) throw std::invalid_argument("cross_validate: lambdas must be positive");

  const bool uses_gamma = method == Method::Ekl || method == Method::PtrEkl;
  std::vector<double> gammas = uses_gamma ? plan.gammas : std::vector<double>{0.0};
  if (gammas.empty()) throw std::invalid_argument("cross_validate: empty gamma grid");
  for (double g : gammas)
    if (!(g >= 0.0 && g <= 1.0))
      throw std::invalid_argument("cross_validate: gammas must lie in [0, 1]");

  const auto n_g = static_cast<Eigen::Index>(gammas.size());
  const auto n_l = static_cast<Eigen::Index>(plan.lambdas.size());
  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(n_g, n_l);

  // Seeded fold assignment: permute samples, deal them out round-robin.
  Rng fold_rng(plan.seed);
  const std::vector<Eigen::Index> perm = sample_without_replacement(fold_rng, n, n);
  std::vector<int> fold_of(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    fold_of[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] =
        static_cast<int>(i % plan.folds);

  for (int f = 0; f < plan.folds; ++f) {
    std::vector<Eigen::Index> tr_idx, val_idx;
    for (Eigen::Index i = 0; i < n; ++i)
      (fold_of[static_cast<std::size_t>(i)] == f ? val_idx : tr_idx).push_back(i);
    const Eigen::MatrixXd x_tr = rows_of(train.x, tr_idx);
    const Eigen::MatrixXd y_tr = cols_of(train.y, tr_idx);
    const Eigen::MatrixXd x_val = rows_of(train.x, val_idx);
    const Eigen::MatrixXd y_val = cols_of(train.y, val_idx);

    if (method == Method::Krr || method == Method::Separable) {
      const Eigen::MatrixXd k_tr = gram_scalar(cfg.kernel, x_tr);
      const Eigen::MatrixXd k_cross = gram_scalar(cfg.kernel, x_val, x_tr);
      const Eigen::MatrixXd t_cov =
          method == Method::Separable ? output_covariance(y_tr) : Eigen::MatrixXd();
      for (Eigen::Index j = 0; j < n_l; ++j) {
        Eigen::MatrixXd pred;
        if (method == Method::Krr)
          pred = predict_krr(fit_krr_baseline(k_tr, y_tr, plan.lambdas[static_cast<std::size_t>(j)]),
                             k_cross);
        else
          pred = predict_separable(
              fit_separable_baseline(k_tr, t_cov, y_tr, plan.lambdas[static_cast<std::size_t>(j)]),
              k_cross);
        scores(0, j) += nmse(pred, y_val);
      }
      continue;
    }

    // Entangled modes: fit the feature map on the fold's training part only,
    // learn Q once per gamma and reuse it across the lambda grid.
    const Eigen::Index m_req = resolve_feature_dim(cfg, train.x.cols());
    const FeatureMap fmap = fit_feature_map(cfg.kernel, cfg.approx, m_req, x_tr,
                                            mix_seed(plan.seed, static_cast<std::uint64_t>(f)));
    const Eigen::MatrixXd phi_tr = apply_feature_map(fmap, x_tr);
    const Eigen::MatrixXd phi_val = apply_feature_map(fmap, x_val);
    const Eigen::Index r = rank_budget(cfg, fmap.dim, p);
    for (Eigen::Index gi = 0; gi < n_g; ++gi) {
      LearnConfig lc = cfg.learn;
      lc.gamma = gammas[static_cast<std::size_t>(gi)];
      LearnResult lr = learn_entangled_kernel(phi_tr, y_tr, r, lc);
      EntangledModel em;
      em.p = p;
      em.m = fmap.dim;
      em.q = std::move(lr.q);
      em.fmap = fmap;
      for (Eigen::Index j = 0; j < n_l; ++j) {
        const double lambda = plan.lambdas[static_cast<std::size_t>(j)];
        Eigen::MatrixXd pred;
        if (method == Method::Ekl)
          pred = predict_operator_valued(em, fit_operator_valued(em, phi_tr, y_tr, lambda),
                                         phi_val);
        else
          pred = predict_scalar(fit_scalar(em, phi_tr, y_tr, lambda), phi_val);
        scores(gi, j) += nmse(pred, y_val);
      }
    }
  }

  scores /= static_cast<double>(plan.folds);

  CvResult res;
  res.mean_scores = scores;
  res.lambdas = plan.lambdas;
  res.gammas = gammas;
  bool have_best = false;
  double best_score = 0.0;
  for (Eigen::Index gi = 0; gi < n_g; ++gi)
    for (Eigen::Index j = 0; j < n_l; ++j) {
      const double s = scores(gi, j);
      const double l = plan.lambdas[static_cast<std::size_t>(j)];
      const double g = gammas[static_cast<std::size_t>(gi)];
      // ties go to the larger lambda, then the smaller gamma
      const bool better =
          !have_best || s < best_score ||
          (s == best_score &&
           (l > res.best_lambda || (l == res.best_lambda && g < res.best_gamma)));
      if (better) {
        have_best = true;
        best_score = s;
        res.best_lambda = l;
        res.best_gamma = g;
      }
    }
  return res;
}

// ---------------------------------------------------------------------------
// Timing benchmark.

std::vector<TimingCell> timing_benchmark(
    const std::vector<std::pair<Eigen::Index, Eigen::Index>>& sizes,
    const std::vector<double>& fractions, const std::vector<StructureClass>& classes,
    int repeats, std::uint64_t seed) {
  if (sizes.empty() || fractions.empty() || classes.empty())
    throw std::invalid_argument("timing_benchmark: empty grid");
  if (repeats < 1) throw std::invalid_argument("timing_benchmark: repeats must be >= 1");
  for (double f : fractions)
    if (!(f > 0.0 && f <= 1.0))
      throw std::invalid_argument("timing_benchmark: fractions must lie in (0, 1]");

  const double lambda = 0.1;
  std::vector<TimingCell> out;
  std::uint64_t cell_idx = 0;
  volatile double sink = 0.0;  // keeps timed results observable

  for (const auto& [n, p] : sizes) {
    if (n < 2 || p < 1) throw std::invalid_argument("timing_benchmark: need n >= 2, p >= 1");
    for (const double frac : fractions) {
      const auto m = std::max<Eigen::Index>(
          1, static_cast<Eigen::Index>(std::llround(frac * static_cast<double>(n))));
      const auto r = std::max<Eigen::Index>(
          1, static_cast<Eigen::Index>(std::llround(frac * static_cast<double>(m * p))));
      for (const StructureClass cls : classes) {
        Rng rng(mix_seed(seed, cell_idx++));
        TimingCell cell;
        cell.cls = cls;
        cell.n = n;
        cell.p = p;
        cell.m = m;
        cell.r = r;
        const Eigen::Index t = n;  // test set as large as the training set
        const Eigen::MatrixXd y = gaussian_matrix(rng, p, n);
        std::vector<double> fit_times, predict_times;

        switch (cls) {
          case StructureClass::Entangled:
          case StructureClass::EntangledPtr: {
            const Eigen::MatrixXd phi = gaussian_matrix(rng, m, n);
            Eigen::MatrixXd q = gaussian_matrix(rng, m * p, r);
            q /= q.norm();
            const Eigen::MatrixXd phi_t = gaussian_matrix(rng, m, t);
            EntangledModel em;
            em.p = p;
            em.m = m;
            em.q = std::move(q);
            if (cls == StructureClass::Entangled) {
              OvkFit fit;
              for (int rep = 0; rep < repeats; ++rep) {
                const auto t0 = Clock::now();
                fit = fit_operator_valued(em, phi, y, lambda);
                fit_times.push_back(seconds_since(t0));
              }
              for (int rep = 0; rep < repeats; ++rep) {
                const auto t0 = Clock::now();
                const Eigen::MatrixXd pred = predict_operator_valued(em, fit, phi_t);
                predict_times.push_back(seconds_since(t0));
                sink = sink + pred(0, 0);
              }
            } else {
              ScalarFit fit;
              for (int rep = 0; rep < repeats; ++rep) {
                const auto t0 = Clock::now();
                fit = fit_scalar(em, phi, y, lambda);
                fit_times.push_back(seconds_since(t0));
              }
              for (int rep = 0; rep < repeats; ++rep) {
                const auto t0 = Clock::now();
                const Eigen::MatrixXd pred = predict_scalar(fit, phi_t);
                predict_times.push_back(seconds_since(t0));
                sink = sink + pred(0, 0);
              }
            }
            break;
          }
          case StructureClass::NoStructure: {
            // Same kind of problem instance as the entangled classes, but
            // solved as if the dense Gram were all we knew.  Materialising
            // the Gram is preparation, not fitting, so it is not timed.
            const Eigen::MatrixXd phi = gaussian_matrix(rng, m, n);
            Eigen::MatrixXd q = gaussian_matrix(rng, m * p, r);
            q /= q.norm();
            const Eigen::MatrixXd phi_t = gaussian_matrix(rng, m, t);
            EntangledModel em;
            em.p = p;
            em.m = m;
            em.q = std::move(q);
            const BlockMatrix gram = assemble_gram_entangled(em, phi);
            const Eigen::MatrixXd z = low_rank_factor(em, phi);
            const Eigen::MatrixXd z_t = low_rank_factor(em, phi_t);
            const Eigen::MatrixXd g_cross = z_t * z.transpose();  // t*p x n*p
            Eigen::VectorXd c;
            for (int rep = 0; rep < repeats; ++rep) {
              const auto t0 = Clock::now();
              c = debug::fit_operator_valued_dense(gram, y, lambda, gram.data.rows());
              fit_times.push_back(seconds_since(t0));
            }
            for (int rep = 0; rep < repeats; ++rep) {
              const auto t0 = Clock::now();
              const Eigen::VectorXd pred = debug::predict_dense(g_cross, c, g_cross.cols());
              predict_times.push_back(seconds_since(t0));
              sink = sink + pred[0];
            }
            break;
          }
          case StructureClass::Separable: {
            const Eigen::MatrixXd v = gaussian_matrix(rng, n, n);
            const Eigen::MatrixXd k = v * v.transpose() / static_cast<double>(n);
            const Eigen::MatrixXd w = gaussian_matrix(rng, p, p);
            const Eigen::MatrixXd t_mat = w * w.transpose() / static_cast<double>(p);
            const Eigen::MatrixXd k_cross = gaussian_matrix(rng, t, n);
            SeparableFit fit;
            for (int rep = 0; rep < repeats; ++rep) {
              const auto t0 = Clock::now();
              fit = fit_separable_baseline(k, t_mat, y, lambda);
              fit_times.push_back(seconds_since(t0));
            }
            for (int rep = 0; rep < repeats; ++rep) {
              const auto t0 = Clock::now();
              const Eigen::MatrixXd pred = predict_separable(fit, k_cross);
              predict_times.push_back(seconds_since(t0));
              sink = sink + pred(0, 0);
            }
            break;
          }
          case StructureClass::LowRankSeparable: {
            const Eigen::MatrixXd u = gaussian_matrix(rng, n, m);
            const Eigen::MatrixXd w = gaussian_matrix(rng, p, p);
            const Eigen::MatrixXd t_mat = w * w.transpose() / static_cast<double>(p);
            const Eigen::MatrixXd u_t = gaussian_matrix(rng, t, m);
            const Eigen::MatrixXd k_cross = u_t * u.transpose();
            SeparableFit fit;
            for (int rep = 0; rep < repeats; ++rep) {
              const auto t0 = Clock::now();
              fit = fit_low_rank_separable(u, t_mat, y, lambda);
              fit_times.push_back(seconds_since(t0));
            }
            for (int rep = 0; rep < repeats; ++rep) {
              const auto t0 = Clock::now();
              const Eigen::MatrixXd pred = predict_separable(fit, k_cross);
              predict_times.push_back(seconds_since(t0));
              sink = sink + pred(0, 0);
            }
            break;
          }
        }

        cell.fit_seconds = median_of(fit_times);
        cell.predict_seconds = median_of(predict_times);
        out.push_back(cell);
      }
    }
  }
  (void)sink;
  return out;
}

// ---------------------------------------------------------------------------
// CSV input/output.

namespace {

std::vector<double> parse_csv_row(const std::string& line, const std::string& path,
                                  std::size_t lineno) {
  std::vector<double> row;
  std::size_t pos = 0;
  while (true) {
    std::size_t comma = line.find(',', pos);
    std::string field = line.substr(pos, comma == std::string::npos ? comma : comma - pos);
    const std::size_t b = field.find_first_not_of(" \t\r");
    const std::size_t e = field.find_last_not_of(" \t\r");
    if (b == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": empty field");
    field = field.substr(b, e - b + 1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size())
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": cannot parse '" + field +
                               "' as a number");
    if (!std::isfinite(value))
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": non-finite value");
    row.push_back(value);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return row;
}

Eigen::MatrixXd read_csv_grid(const std::string& path, bool header) {
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::vector<double>> rows;
  bool header_pending = header;
  while (std::getline(in, line)) {
    ++lineno;
    const bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
    if (blank) continue;
    if (header_pending) {
      header_pending = false;  // first non-blank line is column names
      continue;
    }
    std::vector<double> row = parse_csv_row(line, path, lineno);
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(rows.front().size()) + " fields, got " +
                               std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.front().size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

}  // namespace

Dataset load_csv(const std::string& path, Eigen::Index p_outputs, bool header) {
  if (p_outputs < 1) throw std::invalid_argument("load_csv: p_outputs must be >= 1");
  const Eigen::MatrixXd grid = read_csv_grid(path, header);
  if (grid.cols() < p_outputs + 1)
    throw std::runtime_error(path + ": " + std::to_string(grid.cols()) +
                             " columns cannot hold " + std::to_string(p_outputs) +
                             " outputs plus at least one input");
  const Eigen::Index d = grid.cols() - p_outputs;
  Dataset ds;
  ds.x = grid.leftCols(d);
  ds.y = grid.rightCols(p_outputs).transpose();
  return ds;
}

void save_dataset_csv(const Dataset& ds, const std::string& path, bool header) {
  const Eigen::Index n = ds.x.rows();
  if (ds.y.cols() != n) throw StructuralError("save_dataset_csv: X and Y disagree on samples");
  std::ostringstream out;
  if (header) {
    for (Eigen::Index j = 0; j < ds.x.cols(); ++j) out << (j ? "," : "") << "x" << j;
    for (Eigen::Index s = 0; s < ds.y.rows(); ++s) out << ",y" << s;
    out << "\n";
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < ds.x.cols(); ++j)
      out << (j ? "," : "") << format_double(ds.x(i, j));
    for (Eigen::Index s = 0; s < ds.y.rows(); ++s) out << "," << format_double(ds.y(s, i));
    out << "\n";
  }
  atomic_write_file(path, out.str());
}

Eigen::MatrixXd load_matrix_csv(const std::string& path, bool header) {
  return read_csv_grid(path, header);
}

void save_matrix_csv(const Eigen::MatrixXd& m, const std::string& path,
                     const std::vector<std::string>& header_names) {
  if (!header_names.empty() &&
      static_cast<Eigen::Index>(header_names.size()) != m.cols())
    throw std::invalid_argument("save_matrix_csv: header size does not match columns");
  std::ostringstream out;
  if (!header_names.empty()) {
    for (std::size_t j = 0; j < header_names.size(); ++j)
      out << (j ? "," : "") << header_names[j];
    out << "\n";
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
    out << "\n";
  }
  atomic_write_file(path, out.str());
}

// ---------------------------------------------------------------------------

const char* method_name(Method method) {
  switch (method) {
    case Method::Ekl: return "ekl";
    case Method::PtrEkl: return "ptr-ekl";
    case Method::Krr: return "krr";
    case Method::Separable: return "separable";
  }
  return "?";
}

Method method_from_name(const std::string& name) {
  if (name == "ekl") return Method::Ekl;
  if (name == "ptr-ekl") return Method::PtrEkl;
  if (name == "krr") return Method::Krr;
  if (name == "separable") return Method::Separable;
  throw std::invalid_argument("unknown method '" + name + "'");
}

const char* structure_class_name(StructureClass cls) {
  switch (cls) {
    case StructureClass::NoStructure: return "no-structure";
    case StructureClass::Separable: return "separable";
    case StructureClass::LowRankSeparable: return "low-rank-separable";
    case StructureClass::Entangled: return "entangled";
    case StructureClass::EntangledPtr: return "entangled-ptr";
  }
  return "?";
}

StructureClass structure_class_from_name(const std::string& name) {
  if (name == "no-structure") return StructureClass::NoStructure;
  if (name == "separable") return StructureClass::Separable;
  if (name == "low-rank-separable") return StructureClass::LowRankSeparable;
  if (name == "entangled") return StructureClass::Entangled;
  if (name == "entangled-ptr") return StructureClass::EntangledPtr;
  throw std::invalid_argument("unknown structure class '" + name + "'");
}

}  // namespace ekl

// Command line front end: train/predict/evaluate entangled operator-valued
// kernel models, generate synthetic data, run the structure diagnostics and
// the timing benchmark.  Every output file is written atomically, so a failed
// run never leaves a partial file behind.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ekl/harness.hpp"
#include "ekl/io_util.hpp"
#include "ekl/model_io.hpp"
#include "ekl/ovk.hpp"
#include "ekl/separability.hpp"
#include "ekl/solver.hpp"
#include "ekl/tensor.hpp"

namespace {

using namespace ekl;

double parse_number(const std::string& text, const char* what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size())
    throw std::runtime_error(std::string("cannot parse ") + what + " '" + text + "' as a number");
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, sep))
    if (!tok.empty()) out.push_back(tok);
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

/// Accept either bare inputs (d columns) or a full dataset (d + p columns,
/// labels on the right, which are ignored).
Eigen::MatrixXd inputs_for_model(const TrainedModel& tm, const std::string& path, bool header) {
  const Eigen::MatrixXd grid = load_matrix_csv(path, header);
  const Eigen::Index d = tm.em.fmap.input_dim;
  const Eigen::Index p = tm.em.p;
  if (grid.cols() == d) return grid;
  if (grid.cols() == d + p) return grid.leftCols(d);
  throw std::runtime_error(path + ": has " + std::to_string(grid.cols()) +
                           " columns; the model expects " + std::to_string(d) + " inputs (or " +
                           std::to_string(d + p) + " with labels)");
}

void print_ppt(const PptReport& report) {
  std::cout << "trace " << fmt(report.trace) << "\n";
  std::cout << "min_eigenvalue " << fmt(report.min_eigenvalue) << "\n";
  std::cout << "tolerance " << fmt(report.tolerance) << "\n";
  if (report.entangled)
    std::cout << "verdict entangled\n";
  else
    std::cout << "verdict ppt-holds (separability not certified)\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entangled operator-valued kernel regression toolkit"};
  app.require_subcommand(1);

  // ---- train -------------------------------------------------------------
  auto* train = app.add_subcommand("train", "Fit a model on a CSV dataset and save it");
  std::string tr_data, tr_out, tr_kernel = "linear", tr_approx = "exact-linear";
  std::string tr_mode = "ovk", tr_gamma = "cv", tr_lambda = "cv";
  int tr_outputs = 0, tr_features = 0, tr_folds = 5, tr_iters = 500;
  double tr_bandwidth = 1.0, tr_rank_frac = 1.0, tr_tol = 1e-6;
  std::uint64_t tr_seed = 0;
  bool tr_no_header = false;
  train->add_option("--data", tr_data, "training CSV: inputs then outputs, one sample per row")
      ->required();
  train->add_option("--outputs", tr_outputs, "number of output columns (rightmost)")
      ->required()
      ->check(CLI::PositiveNumber);
  train->add_flag("--no-header", tr_no_header, "data file has no header row");
  train->add_option("--kernel", tr_kernel, "scalar kernel: linear | gaussian")
      ->check(CLI::IsMember({"linear", "gaussian"}));
  train->add_option("--bandwidth", tr_bandwidth, "gaussian kernel bandwidth")
      ->check(CLI::PositiveNumber);
  train->add_option("--approx", tr_approx, "feature map: exact-linear | nystrom | rff");
  train->add_option("--features", tr_features, "feature dimension m (nystrom/rff)")
      ->check(CLI::NonNegativeNumber);
  train->add_option("--rank-frac", tr_rank_frac, "factor rank as a fraction of m*p, in (0,1]");
  train->add_option("--mode", tr_mode, "regression head: ovk | ptr")
      ->check(CLI::IsMember({"ovk", "ptr"}));
  train->add_option("--gamma", tr_gamma, "alignment mix in [0,1], or 'cv'");
  train->add_option("--lambda", tr_lambda, "ridge strength > 0, or 'cv'");
  train->add_option("--folds", tr_folds, "cross-validation folds")->check(CLI::Range(2, 100));
  train->add_option("--iters", tr_iters, "max ascent iterations")->check(CLI::PositiveNumber);
  train->add_option("--tol", tr_tol, "gradient norm stopping tolerance")
      ->check(CLI::PositiveNumber);
  train->add_option("--seed", tr_seed, "seed for feature maps, init and fold assignment");
  train->add_option("--out", tr_out, "path for the saved model")->required();
  train->callback([&] {
    const Dataset ds = load_csv(tr_data, tr_outputs, !tr_no_header);
    ModelConfig cfg;
    cfg.kernel.kind = kernel_kind_from_name(tr_kernel);
    cfg.kernel.bandwidth = tr_bandwidth;
    cfg.approx = feature_method_from_name(tr_approx);
    cfg.feature_dim = tr_features;
    cfg.rank_fraction = tr_rank_frac;
    cfg.learn.max_iters = tr_iters;
    cfg.learn.grad_tol = tr_tol;
    cfg.learn.seed = tr_seed;
    const Method method = tr_mode == "ovk" ? Method::Ekl : Method::PtrEkl;

    double lambda = 0.0, gamma = 0.0;
    const bool cv_lambda = tr_lambda == "cv";
    const bool cv_gamma = tr_gamma == "cv";
    if (!cv_lambda) lambda = parse_number(tr_lambda, "--lambda");
    if (!cv_gamma) gamma = parse_number(tr_gamma, "--gamma");
    if (cv_lambda || cv_gamma) {
      CvPlan plan;
      plan.folds = tr_folds;
      plan.seed = tr_seed;
      if (!cv_lambda) plan.lambdas = {lambda};
      if (!cv_gamma) plan.gammas = {gamma};
      const CvResult cv = cross_validate(ds, plan, method, cfg);
      lambda = cv.best_lambda;
      gamma = cv.best_gamma;
      std::cout << "cv_lambda " << fmt(lambda) << "\n";
      std::cout << "cv_gamma " << fmt(gamma) << "\n";
    }

    const FittedModel fm = fit_method(ds, method, cfg, lambda, gamma);
    const TrainedModel tm = make_trained(fm);
    save_model(tm, tr_out);
    std::cout << "objective " << fmt(fm.objective) << "\n";
    std::cout << "dims p=" << tm.em.p << " m=" << tm.em.m << " r=" << tm.em.q.cols()
              << " n=" << tm.phi.cols() << "\n";
    std::cout << "model " << tr_out << "\n";
  });

  // ---- predict -----------------------------------------------------------
  auto* predict = app.add_subcommand("predict", "Predict outputs for a CSV of inputs");
  std::string pr_model, pr_data, pr_out;
  bool pr_no_header = false;
  predict->add_option("--model", pr_model, "saved model file")->required();
  predict->add_option("--data", pr_data, "CSV with inputs (labels, if present, are ignored)")
      ->required();
  predict->add_flag("--no-header", pr_no_header, "data file has no header row");
  predict->add_option("--out", pr_out, "CSV for predictions, one row per sample")->required();
  predict->callback([&] {
    const TrainedModel tm = load_model(pr_model);
    const Eigen::MatrixXd x = inputs_for_model(tm, pr_data, !pr_no_header);
    const Eigen::MatrixXd yhat = predict_trained(tm, x);  // p x t
    std::vector<std::string> names;
    for (Eigen::Index s = 0; s < yhat.rows(); ++s) names.push_back("y" + std::to_string(s));
    save_matrix_csv(yhat.transpose(), pr_out, names);
    std::cout << "samples " << yhat.cols() << "\n";
    std::cout << "predictions " << pr_out << "\n";
  });

  // ---- eval --------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "Score a model on labelled data");
  std::string ev_model, ev_data, ev_baseline;
  double ev_krr_lambda = 0.0;
  bool ev_no_header = false;
  eval->add_option("--model", ev_model, "saved model file")->required();
  eval->add_option("--data", ev_data, "labelled CSV (inputs then outputs)")->required();
  eval->add_flag("--no-header", ev_no_header, "data file has no header row");
  auto* ev_base_opt = eval->add_option("--krr-baseline", ev_baseline,
                                       "training CSV for a ridge baseline with the model's kernel");
  eval->add_option("--krr-lambda", ev_krr_lambda, "ridge strength for the baseline")
      ->needs(ev_base_opt)
      ->check(CLI::PositiveNumber);
  eval->callback([&] {
    const TrainedModel tm = load_model(ev_model);
    const Dataset ds = load_csv(ev_data, tm.em.p, !ev_no_header);
    if (ds.x.cols() != tm.em.fmap.input_dim)
      throw std::runtime_error("evaluation data has " + std::to_string(ds.x.cols()) +
                               " input columns, the model expects " +
                               std::to_string(tm.em.fmap.input_dim));
    const double err = nmse(predict_trained(tm, ds.x), ds.y);
    std::cout << "nmse " << fmt(err) << "\n";
    if (!ev_baseline.empty()) {
      if (!(ev_krr_lambda > 0.0))
        throw std::runtime_error("--krr-baseline requires --krr-lambda");
      const Dataset base = load_csv(ev_baseline, tm.em.p, !ev_no_header);
      ModelConfig bc;
      bc.kernel = tm.em.fmap.kernel;
      const FittedModel kf = fit_method(base, Method::Krr, bc, ev_krr_lambda, 0.0);
      const double err_krr = nmse(predict_method(kf, ds.x), ds.y);
      std::cout << "nmse_krr " << fmt(err_krr) << "\n";
      std::cout << "ni " << fmt(normalized_improvement(err, err_krr)) << "\n";
    }
  });

  // ---- synth -------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "Generate a synthetic multi-output dataset");
  Eigen::Index sy_n = 0, sy_p = 0, sy_d = 0;
  double sy_noise = 0.1;
  std::uint64_t sy_seed = 0;
  std::string sy_out;
  synth->add_option("--n", sy_n, "number of samples")->required()->check(CLI::PositiveNumber);
  synth->add_option("--p", sy_p, "number of outputs")->required()->check(CLI::PositiveNumber);
  synth->add_option("--d", sy_d, "number of inputs")->required()->check(CLI::PositiveNumber);
  synth->add_option("--noise", sy_noise, "noise standard deviation")
      ->check(CLI::NonNegativeNumber);
  synth->add_option("--seed", sy_seed, "generator seed");
  synth->add_option("--out", sy_out, "output CSV (with header)")->required();
  synth->callback([&] {
    const Dataset ds = gen_bilinear(sy_n, sy_p, sy_d, sy_noise, sy_seed);
    save_dataset_csv(ds, sy_out, true);
    std::cout << "n " << sy_n << "\np " << sy_p << "\nd " << sy_d << "\n";
    std::cout << "dataset " << sy_out << "\n";
  });

  // ---- ppt ---------------------------------------------------------------
  auto* ppt = app.add_subcommand(
      "ppt", "Partial-transpose entanglement test on a model's factor or a Gram CSV");
  std::string pp_model, pp_gram;
  Eigen::Index pp_block = 0;
  double pp_tol = 1e-8;
  bool pp_header = false;
  auto* pp_model_opt = ppt->add_option("--model", pp_model, "saved model file");
  auto* pp_gram_opt =
      ppt->add_option("--gram", pp_gram, "CSV with a symmetric PSD block matrix");
  ppt->add_option("--block", pp_block, "block size of the Gram CSV")->needs(pp_gram_opt);
  ppt->add_flag("--header", pp_header, "the Gram CSV has a header row");
  ppt->add_option("--tol", pp_tol, "relative eigenvalue tolerance")->check(CLI::PositiveNumber);
  pp_model_opt->excludes(pp_gram_opt);
  ppt->callback([&] {
    if (!pp_model.empty()) {
      const TrainedModel tm = load_model(pp_model);
      const BlockMatrix d_mat(debug::materialize_d(tm.em.q), tm.em.p);
      print_ppt(ppt_check(d_mat, pp_tol));
    } else if (!pp_gram.empty()) {
      if (pp_block < 1) throw std::runtime_error("--gram requires --block >= 1");
      const BlockMatrix bm(load_matrix_csv(pp_gram, pp_header), pp_block);
      print_ppt(ppt_check(bm, pp_tol));
    } else {
      throw std::runtime_error("ppt needs either --model or --gram");
    }
  });

  // ---- bounds ------------------------------------------------------------
  auto* bounds = app.add_subcommand("bounds", "Complexity and excess-risk bound calculators");
  double bo_beta = 0.0, bo_kappa = -1.0, bo_emp = -1.0, bo_m = -1.0, bo_delta = 0.05;
  Eigen::Index bo_p = 0, bo_n = 0;
  std::string bo_model;
  bounds->add_option("--beta", bo_beta, "bound on the coefficient norm")
      ->required()
      ->check(CLI::NonNegativeNumber);
  auto* bo_kappa_opt =
      bounds->add_option("--kappa", bo_kappa, "bound on the output-summed kernel trace");
  auto* bo_model_opt = bounds->add_option(
      "--model", bo_model, "estimate kappa from a saved model's training features");
  bo_model_opt->excludes(bo_kappa_opt);
  bounds->add_option("--p", bo_p, "number of outputs")->required()->check(CLI::PositiveNumber);
  bounds->add_option("--n", bo_n, "number of samples")->required()->check(CLI::PositiveNumber);
  bounds->add_option("--emp-risk", bo_emp, "empirical risk for the excess-risk bound");
  bounds->add_option("--m-bound", bo_m, "uniform bound on the loss scale");
  bounds->add_option("--delta", bo_delta, "failure probability in (0,1)");
  bounds->callback([&] {
    double kappa = bo_kappa;
    if (!bo_model.empty()) {
      const TrainedModel tm = load_model(bo_model);
      const Eigen::MatrixXd z = low_rank_factor(tm.em, tm.phi);
      const Eigen::Index p = tm.em.p;
      kappa = 0.0;
      for (Eigen::Index i = 0; i < tm.phi.cols(); ++i) {
        const auto zi = z.middleRows(i * p, p);
        kappa = std::max(kappa, (zi * zi.transpose()).trace());
      }
      std::cout << "kappa " << fmt(kappa) << "\n";
    } else if (kappa < 0.0) {
      throw std::runtime_error("bounds needs either --kappa or --model");
    }
    const double rad = rademacher_bound(bo_beta, kappa, bo_p, bo_n);
    std::cout << "rademacher " << fmt(rad) << "\n";
    if (bo_emp >= 0.0 || bo_m >= 0.0) {
      if (bo_emp < 0.0 || bo_m < 0.0)
        throw std::runtime_error("the excess-risk bound needs both --emp-risk and --m-bound");
      std::cout << "generalization "
                << fmt(generalization_bound(bo_emp, bo_m, bo_beta, kappa, bo_p, bo_n, bo_delta))
                << "\n";
    }
  });

  // ---- bench-time --------------------------------------------------------
  auto* bench = app.add_subcommand("bench-time", "Fit/predict wall-time across structure classes");
  std::string be_sizes, be_fractions, be_classes, be_out;
  int be_repeats = 3;
  std::uint64_t be_seed = 0;
  bench->add_option("--sizes", be_sizes, "comma list of NxP pairs, e.g. 400x8,200x16")
      ->required();
  bench->add_option("--fractions", be_fractions, "comma list of m/n fractions in (0,1]")
      ->required();
  bench
      ->add_option("--classes", be_classes,
                   "comma list: no-structure | separable | low-rank-separable | entangled | "
                   "entangled-ptr")
      ->required();
  bench->add_option("--repeats", be_repeats, "timed repetitions per cell (median reported)")
      ->check(CLI::PositiveNumber);
  bench->add_option("--seed", be_seed, "problem generator seed");
  bench->add_option("--out", be_out, "output CSV")->required();
  bench->callback([&] {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> sizes;
    for (const std::string& tok : split(be_sizes, ',')) {
      const auto xs = split(tok, 'x');
      if (xs.size() != 2)
        throw std::runtime_error("cannot parse size '" + tok + "', expected NxP");
      sizes.emplace_back(static_cast<Eigen::Index>(parse_number(xs[0], "--sizes")),
                         static_cast<Eigen::Index>(parse_number(xs[1], "--sizes")));
    }
    std::vector<double> fractions;
    for (const std::string& tok : split(be_fractions, ','))
      fractions.push_back(parse_number(tok, "--fractions"));
    std::vector<StructureClass> classes;
    for (const std::string& tok : split(be_classes, ','))
      classes.push_back(structure_class_from_name(tok));

    const std::vector<TimingCell> cells =
        timing_benchmark(sizes, fractions, classes, be_repeats, be_seed);
    std::ostringstream out;
    out << "class,n,p,m,r,fit_seconds,predict_seconds\n";
    for (const TimingCell& c : cells) {
      std::ostringstream line;
      line << structure_class_name(c.cls) << "," << c.n << "," << c.p << "," << c.m << ","
           << c.r << "," << fmt(c.fit_seconds) << "," << fmt(c.predict_seconds);
      out << line.str() << "\n";
      std::cout << line.str() << "\n";
    }
    atomic_write_file(be_out, out.str());
    std::cout << "table " << be_out << "\n";
  });

  // ---- reduce ------------------------------------------------------------
  auto* reduce = app.add_subcommand(
      "reduce", "Write the model's r-dimensional reduced representation of inputs");
  std::string re_model, re_data, re_out;
  bool re_no_header = false;
  reduce->add_option("--model", re_model, "saved model file")->required();
  reduce->add_option("--data", re_data, "CSV with inputs (labels, if present, are ignored)")
      ->required();
  reduce->add_flag("--no-header", re_no_header, "data file has no header row");
  reduce->add_option("--out", re_out, "CSV, one row per sample with its p x r block column-stacked")
      ->required();
  reduce->callback([&] {
    const TrainedModel tm = load_model(re_model);
    const Eigen::MatrixXd x = inputs_for_model(tm, re_data, !re_no_header);
    const Eigen::MatrixXd z_t = reduce_dimensions(tm.em, apply_feature_map(tm.em.fmap, x));
    const Eigen::Index p = tm.em.p;
    const Eigen::Index r = z_t.cols();
    const Eigen::Index t = x.rows();
    Eigen::MatrixXd red(t, p * r);
    for (Eigen::Index i = 0; i < t; ++i)
      for (Eigen::Index j = 0; j < r; ++j)
        for (Eigen::Index s = 0; s < p; ++s) red(i, j * p + s) = z_t(i * p + s, j);
    std::vector<std::string> names;
    for (Eigen::Index j = 0; j < p * r; ++j) names.push_back("c" + std::to_string(j));
    save_matrix_csv(red, re_out, names);
    std::cout << "shape " << t << "x" << p * r << "\n";
    std::cout << "reduced " << re_out << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "sslcox/csv.hpp"
#include "sslcox/model_io.hpp"
#include "sslcox/simgen.hpp"
#include "sslcox/tuning.hpp"

using namespace sslcox;

namespace {

SimConfig read_sim_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open config '" + path + "'");
  SimConfig cfg;
  std::string line;
  int ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\r' || line.back() == '\t'))
      line.pop_back();
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw input_error(path + ":" + std::to_string(ln) + ": expected key=value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
      while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.pop_back();
    };
    trim(key);
    trim(value);
    try {
      if (key == "n_train") cfg.n_train = std::stoi(value);
      else if (key == "n_test") cfg.n_test = std::stoi(value);
      else if (key == "p") cfg.p = std::stoi(value);
      else if (key == "ar_rho") cfg.ar_rho = std::stod(value);
      else if (key == "censor_target") cfg.censor_target = std::stod(value);
      else if (key == "event_scale") cfg.event_scale = std::stod(value);
      else if (key == "event_shape") cfg.event_shape = std::stod(value);
      else if (key == "censor_shape") cfg.censor_shape = std::stod(value);
      else if (key == "seed") cfg.seed = std::stoull(value);
      else throw input_error(path + ":" + std::to_string(ln) + ": unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw input_error(path + ":" + std::to_string(ln) + ": bad value for '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

std::vector<std::string> default_names(int p) {
  std::vector<std::string> names;
  names.reserve(p);
  for (int j = 1; j <= p; ++j) names.push_back("x" + std::to_string(j));
  return names;
}

void require_events(const SurvivalData& data) {
  if (data.n_events() < 1) throw input_error("dataset has no events (all status 0)");
}

struct PriorFlags {
  double s0 = 0.05;
  double s1 = 0.5;
  double a = 1.0;
  double b = 1.0;
  std::string hierarchy = "dependent";

  PriorConfig to_prior() const {
    PriorConfig prior;
    prior.s0 = s0;
    prior.s1 = s1;
    prior.a = a;
    prior.b = b;
    if (hierarchy == "dependent")
      prior.hierarchy = IndicatorHierarchy::dependent;
    else if (hierarchy == "independent")
      prior.hierarchy = IndicatorHierarchy::independent;
    else
      throw input_error("--hierarchy must be 'dependent' or 'independent'");
    prior.validate();
    return prior;
  }
};

void add_control_flags(CLI::App* cmd, FitControl& ctrl) {
  cmd->add_option("--epsilon", ctrl.epsilon, "EM convergence tolerance");
  cmd->add_option("--max-em-iter", ctrl.max_em_iter, "maximum EM iterations");
  cmd->add_option("--max-cd-iter", ctrl.max_cd_iter, "maximum coordinate-descent iterations");
  cmd->add_option("--cd-tol", ctrl.cd_tol, "coordinate-descent change tolerance");
}

void write_fit_report(const std::string& path, const AdditiveCoxModel& model) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write '" + path + "'");
  out << "additive Cox fit (spike-and-slab lasso)\n";
  out << "s0=" << format_double(model.prior.s0) << " s1=" << format_double(model.prior.s1)
      << " a=" << model.prior.a << " b=" << model.prior.b << " hierarchy="
      << (model.prior.hierarchy == IndicatorHierarchy::dependent ? "dependent" : "independent")
      << "\n";
  out << "converged=" << (model.converged ? "yes" : "no") << " iterations=" << model.n_iter
      << " deviance=" << format_double(model.deviance) << "\n\n";

  out << "deviance trace:\n";
  for (std::size_t i = 0; i < model.deviance_trace.size(); ++i)
    out << "  iter " << i + 1 << ": " << format_double(model.deviance_trace[i]) << "\n";

  int selected = 0;
  for (const auto sel : model.selection)
    if (sel != EffectType::none) ++selected;
  out << "\nselected predictors: " << selected << " of " << model.n_predictors() << "\n";
  out << "predictor,selection,theta,p_linear,p_nonlinear\n";
  for (int j = 0; j < model.n_predictors(); ++j)
    out << model.predictor_names[j] << ',' << effect_name(model.selection[j]) << ','
        << format_double(model.theta(j)) << ',' << format_double(model.p_linear(j)) << ','
        << format_double(model.p_nonlinear(j)) << "\n";
}

int cmd_simulate(const std::string& config_path, const std::string& prefix,
                 bool seed_given, std::uint64_t seed) {
  SimConfig cfg = read_sim_config(config_path);
  if (seed_given) cfg.seed = seed;
  Scenario scenario;
  const Replicate rep = generate_replicate(cfg, scenario);

  const auto names = default_names(cfg.p);
  write_dataset_csv(prefix + "_train.csv", rep.train, names);
  if (cfg.n_test > 0) write_dataset_csv(prefix + "_test.csv", rep.test, names);

  std::ofstream truth(prefix + "_truth.csv");
  if (!truth) throw input_error("cannot write '" + prefix + "_truth.csv'");
  truth << "column,active,label\n";
  for (int j = 0; j < cfg.p; ++j)
    truth << names[j] << ',' << (rep.truth[j] != EffectType::none ? 1 : 0) << ','
          << effect_name(rep.truth[j]) << "\n";

  std::cout << "wrote " << prefix << "_train.csv";
  if (cfg.n_test > 0) std::cout << ", " << prefix << "_test.csv";
  std::cout << ", " << prefix << "_truth.csv (censor scale "
            << format_double(rep.censor_scale) << ")\n";
  return 0;
}

int cmd_fit(const std::string& data_path, const std::string& model_path,
            const std::string& report_path, const PriorFlags& pf, int n_bases,
            const FitControl& ctrl) {
  const DatasetFile file = read_dataset_csv(data_path);
  require_events(file.data);
  const PriorConfig prior = pf.to_prior();
  SplineSpec sspec;
  sspec.n_bases = n_bases;

  AdditiveBases bases = build_additive_bases(file.data.covariates, sspec);
  const FitResult fr = fit(file.data, bases.design, prior, ctrl);
  const AdditiveCoxModel model = assemble_model(file.predictor_names, std::move(bases.transforms),
                                                bases.design, fr, prior, file.data);
  save_model(model_path, model);
  if (!report_path.empty()) write_fit_report(report_path, model);

  int selected = 0;
  for (const auto sel : fr.selection)
    if (sel != EffectType::none) ++selected;
  std::cout << "fit " << (fr.converged ? "converged" : "did NOT converge") << " in "
            << fr.trace.n_iter << " iterations; deviance " << format_double(fr.deviance)
            << "; " << selected << " of " << file.data.p() << " predictors selected\n";
  return 0;
}

int cmd_cv(const std::string& data_path, const std::string& table_path,
           const std::string& model_path, const PriorFlags& pf, int n_bases, int folds,
           int grid_size, const std::string& metric, std::uint64_t seed,
           const FitControl& ctrl) {
  const DatasetFile file = read_dataset_csv(data_path);
  require_events(file.data);
  const PriorConfig prior = pf.to_prior();
  SplineSpec sspec;
  sspec.n_bases = n_bases;

  PathSpec pspec;
  pspec.s0_grid = default_s0_grid(grid_size);
  pspec.s1 = pf.s1;
  pspec.n_folds = folds;
  pspec.seed = seed;
  if (metric == "deviance")
    pspec.metric = CvMetric::deviance;
  else if (metric == "cindex")
    pspec.metric = CvMetric::c_index;
  else
    throw input_error("--metric must be 'deviance' or 'cindex'");

  const CvResult res = cv_path(file.data, sspec, pspec, prior, ctrl);
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";

  std::ofstream table(table_path);
  if (!table) throw input_error("cannot write '" + table_path + "'");
  table << "s0,mean,se,n_converged,excluded\n";
  for (const auto& cell : res.table)
    table << format_double(cell.s0) << ',' << format_double(cell.mean) << ','
          << format_double(cell.se) << ',' << cell.n_converged << ','
          << (cell.excluded ? 1 : 0) << "\n";

  PriorConfig best_prior = prior;
  best_prior.s0 = res.best_s0;
  best_prior.s1 = pspec.s1;
  const AdditiveCoxModel model =
      assemble_model(file.predictor_names, std::vector<SplineTransform>(res.transforms),
                     res.design, res.best_fit, best_prior, file.data);
  save_model(model_path, model);

  std::cout << "best s0 = " << format_double(res.best_s0) << " by " << metric << "; wrote "
            << table_path << " and " << model_path << "\n";
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& data_path,
                const std::string& out_path) {
  const AdditiveCoxModel model = load_model(model_path);
  const DatasetFile file = read_dataset_csv(data_path);
  if (file.predictor_names != model.predictor_names)
    throw input_error("data columns do not match the model's predictors");

  const Eigen::VectorXd eta = model.predict_eta(file.data.covariates);
  std::ofstream out(out_path);
  if (!out) throw input_error("cannot write '" + out_path + "'");
  out << "eta,relative_risk,baseline_cumhaz\n";
  for (int i = 0; i < file.data.n(); ++i)
    out << format_double(eta(i)) << ',' << format_double(std::exp(eta(i))) << ','
        << format_double(model.baseline.cumulative(file.data.time(i))) << "\n";
  std::cout << "wrote " << out_path << " (" << file.data.n() << " rows)\n";
  return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& data_path,
                 const std::string& metrics_path, const std::string& km_path) {
  const AdditiveCoxModel model = load_model(model_path);
  const DatasetFile file = read_dataset_csv(data_path);
  if (file.predictor_names != model.predictor_names)
    throw input_error("data columns do not match the model's predictors");
  require_events(file.data);

  const Eigen::VectorXd eta = model.predict_eta(file.data.covariates);
  const double dev = deviance(file.data, eta);
  const double cindex = c_index(file.data, eta);

  std::ofstream metrics(metrics_path);
  if (!metrics) throw input_error("cannot write '" + metrics_path + "'");
  metrics << "metric,value\n";
  metrics << "deviance," << format_double(dev) << "\n";
  metrics << "c_index," << format_double(cindex) << "\n";

  if (!km_path.empty()) {
    const auto groups = median_risk_groups(eta);
    std::ofstream km(km_path);
    if (!km) throw input_error("cannot write '" + km_path + "'");
    km << "group,time,survival\n";
    for (const RiskGroup g : {RiskGroup::low, RiskGroup::high}) {
      std::vector<int> keep;
      for (int i = 0; i < file.data.n(); ++i)
        if (groups[i] == g) keep.push_back(i);
      if (keep.empty()) continue;
      Eigen::VectorXd t(keep.size());
      Eigen::VectorXi s(keep.size());
      for (std::size_t k = 0; k < keep.size(); ++k) {
        t(k) = file.data.time(keep[k]);
        s(k) = file.data.status(keep[k]);
      }
      const KaplanMeierCurve curve = kaplan_meier(t, s);
      const char* label = g == RiskGroup::low ? "low" : "high";
      for (std::size_t k = 0; k < curve.time.size(); ++k)
        km << label << ',' << format_double(curve.time[k]) << ','
           << format_double(curve.survival[k]) << "\n";
    }
  }
  std::cout << "deviance " << format_double(dev) << ", c-index " << format_double(cindex)
            << "\n";
  return 0;
}

int cmd_filter(const std::string& data_path, int top_k, const std::string& out_path) {
  const DatasetFile file = read_dataset_csv(data_path);
  const auto keep = variance_filter(file.data.covariates, top_k);

  SurvivalData filtered;
  filtered.time = file.data.time;
  filtered.status = file.data.status;
  filtered.covariates.resize(file.data.n(), keep.size());
  std::vector<std::string> names;
  for (std::size_t k = 0; k < keep.size(); ++k) {
    filtered.covariates.col(k) = file.data.covariates.col(keep[k]);
    names.push_back(file.predictor_names[keep[k]]);
  }
  write_dataset_csv(out_path, filtered, names);
  std::cout << "kept " << keep.size() << " of " << file.data.p()
            << " predictors (descending variance) -> " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"additive Cox proportional hazards with a two-part spike-and-slab lasso prior"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate a synthetic train/test replicate");
  std::string sim_config, sim_prefix;
  std::uint64_t sim_seed = 0;
  sim->add_option("config", sim_config, "key=value config file")->required();
  sim->add_option("--out", sim_prefix, "output file prefix")->required();
  auto* sim_seed_opt = sim->add_option("--seed", sim_seed, "override the config seed");

  // fit
  auto* fitc = app.add_subcommand("fit", "fit the model at a fixed spike scale");
  std::string fit_data, fit_model = "model.json", fit_report;
  PriorFlags fit_prior;
  int fit_bases = 10;
  FitControl fit_ctrl;
  fitc->add_option("data", fit_data, "training CSV (time,status,predictors)")->required();
  fitc->add_option("--out", fit_model, "output model file");
  fitc->add_option("--report", fit_report, "write a human-readable fit report");
  fitc->add_option("--s0", fit_prior.s0, "spike scale");
  fitc->add_option("--s1", fit_prior.s1, "slab scale");
  fitc->add_option("--a", fit_prior.a, "Beta hyperparameter a");
  fitc->add_option("--b", fit_prior.b, "Beta hyperparameter b");
  fitc->add_option("--hierarchy", fit_prior.hierarchy, "dependent|independent");
  fitc->add_option("--n-bases", fit_bases, "spline basis functions per predictor");
  add_control_flags(fitc, fit_ctrl);

  // cv
  auto* cvc = app.add_subcommand("cv", "cross-validate the spike scale and refit");
  std::string cv_data, cv_table = "cv.csv", cv_model = "model.json", cv_metric = "deviance";
  PriorFlags cv_prior;
  int cv_bases = 10, cv_folds = 5, cv_grid = 20;
  std::uint64_t cv_seed = 0;
  FitControl cv_ctrl;
  cvc->add_option("data", cv_data, "training CSV")->required();
  cvc->add_option("--out-table", cv_table, "per-s0 metric table CSV");
  cvc->add_option("--out-model", cv_model, "refit best model file");
  cvc->add_option("--folds", cv_folds, "cross-validation folds");
  cvc->add_option("--grid-size", cv_grid, "number of s0 grid points");
  cvc->add_option("--metric", cv_metric, "deviance|cindex");
  cvc->add_option("--seed", cv_seed, "fold-assignment seed");
  cvc->add_option("--s1", cv_prior.s1, "slab scale");
  cvc->add_option("--a", cv_prior.a, "Beta hyperparameter a");
  cvc->add_option("--b", cv_prior.b, "Beta hyperparameter b");
  cvc->add_option("--hierarchy", cv_prior.hierarchy, "dependent|independent");
  cvc->add_option("--n-bases", cv_bases, "spline basis functions per predictor");
  add_control_flags(cvc, cv_ctrl);

  // predict
  auto* pred = app.add_subcommand("predict", "linear predictor and risk for new data");
  std::string pred_model, pred_data, pred_out = "predictions.csv";
  pred->add_option("--model", pred_model, "model file")->required();
  pred->add_option("--data", pred_data, "CSV to predict on")->required();
  pred->add_option("--out", pred_out, "output CSV");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "deviance, c-index and risk-group KM curves");
  std::string eval_model, eval_data, eval_metrics = "metrics.csv", eval_km = "km.csv";
  eval->add_option("--model", eval_model, "model file")->required();
  eval->add_option("--data", eval_data, "evaluation CSV")->required();
  eval->add_option("--out-metrics", eval_metrics, "metrics CSV");
  eval->add_option("--out-km", eval_km, "Kaplan-Meier curve CSV ('' to skip)");

  // filter
  auto* filt = app.add_subcommand("filter", "keep the top-k predictors by variance");
  std::string filt_data, filt_out = "filtered.csv";
  int filt_k = 200;
  filt->add_option("data", filt_data, "input CSV")->required();
  filt->add_option("--top-k", filt_k, "number of predictors to keep");
  filt->add_option("--out", filt_out, "output CSV");

  try {
    app.parse(argc, argv);
    if (sim->parsed())
      return cmd_simulate(sim_config, sim_prefix, !sim_seed_opt->empty(), sim_seed);
    if (fitc->parsed())
      return cmd_fit(fit_data, fit_model, fit_report, fit_prior, fit_bases, fit_ctrl);
    if (cvc->parsed())
      return cmd_cv(cv_data, cv_table, cv_model, cv_prior, cv_bases, cv_folds, cv_grid,
                    cv_metric, cv_seed, cv_ctrl);
    if (pred->parsed()) return cmd_predict(pred_model, pred_data, pred_out);
    if (eval->parsed()) return cmd_evaluate(eval_model, eval_data, eval_metrics, eval_km);
    if (filt->parsed()) return cmd_filter(filt_data, filt_k, filt_out);
    return 1;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const tuning_error& e) {
    std::cerr << "tuning failure: " << e.what() << "\n";
    return 3;
  }
}

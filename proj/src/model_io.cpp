#include "sslcox/model_io.hpp"

#include <fstream>

#include "json.hpp"

namespace sslcox {

using nlohmann::json;

namespace {

json vec_to_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vec_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json mat_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd mat_from_json(const json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  const Eigen::Index nr = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index nc = nr > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
  Eigen::MatrixXd m(nr, nc);
  for (Eigen::Index i = 0; i < nr; ++i)
    for (Eigen::Index c = 0; c < nc; ++c) m(i, c) = rows[i][c];
  return m;
}

}  // namespace

Eigen::VectorXd AdditiveCoxModel::predict_eta(const Eigen::MatrixXd& covariates) const {
  return evaluate_design(transforms, covariates) * beta;
}

AdditiveCoxModel assemble_model(const std::vector<std::string>& names,
                                std::vector<SplineTransform> transforms,
                                const AdditiveDesign& design, const FitResult& fit,
                                const PriorConfig& prior, const SurvivalData& train) {
  AdditiveCoxModel m;
  m.predictor_names = names;
  m.transforms = std::move(transforms);
  m.beta = fit.beta;
  m.theta = fit.theta;
  m.p_linear = fit.p_linear;
  m.p_nonlinear = fit.p_nonlinear;
  m.selection = fit.selection;
  m.prior = prior;
  m.converged = fit.converged;
  m.n_iter = fit.trace.n_iter;
  m.deviance = fit.deviance;
  m.deviance_trace = fit.trace.deviances;
  m.baseline = breslow_baseline(train, design.X * fit.beta);
  return m;
}

std::string model_to_json(const AdditiveCoxModel& model) {
  json j;
  j["format_version"] = AdditiveCoxModel::format_version;
  j["predictor_names"] = model.predictor_names;

  json transforms = json::array();
  for (const auto& t : model.transforms) {
    json jt;
    jt["knots"] = t.knots;
    jt["degree"] = t.degree;
    jt["column_means"] = vec_to_json(t.column_means);
    jt["linear_vec"] = vec_to_json(t.linear_vec);
    jt["nonlinear_vecs"] = mat_to_json(t.nonlinear_vecs);
    jt["scale_factors"] = vec_to_json(t.scale_factors);
    jt["linear_sd"] = t.linear_sd;
    transforms.push_back(std::move(jt));
  }
  j["transforms"] = std::move(transforms);

  j["beta"] = vec_to_json(model.beta);
  j["theta"] = vec_to_json(model.theta);
  j["p_linear"] = vec_to_json(model.p_linear);
  j["p_nonlinear"] = vec_to_json(model.p_nonlinear);

  std::vector<std::string> labels;
  labels.reserve(model.selection.size());
  for (EffectType e : model.selection) labels.emplace_back(effect_name(e));
  j["selection"] = labels;

  j["prior"] = {{"s0", model.prior.s0},
                {"s1", model.prior.s1},
                {"a", model.prior.a},
                {"b", model.prior.b},
                {"hierarchy", model.prior.hierarchy == IndicatorHierarchy::dependent
                                  ? "dependent"
                                  : "independent"}};
  j["fit"] = {{"converged", model.converged},
              {"n_iter", model.n_iter},
              {"deviance", model.deviance},
              {"deviance_trace", model.deviance_trace}};
  j["baseline"] = {{"event_times", model.baseline.event_times},
                   {"increments", model.baseline.increments}};
  return j.dump(2);
}

AdditiveCoxModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw input_error(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    const int version = j.at("format_version").get<int>();
    if (version > AdditiveCoxModel::format_version)
      throw input_error("model file has format version " + std::to_string(version) +
                        "; this build reads up to version " +
                        std::to_string(AdditiveCoxModel::format_version));

    AdditiveCoxModel m;
    m.predictor_names = j.at("predictor_names").get<std::vector<std::string>>();
    for (const auto& jt : j.at("transforms")) {
      SplineTransform t;
      t.knots = jt.at("knots").get<std::vector<double>>();
      t.degree = jt.at("degree").get<int>();
      t.column_means = vec_from_json(jt.at("column_means"));
      t.linear_vec = vec_from_json(jt.at("linear_vec"));
      t.nonlinear_vecs = mat_from_json(jt.at("nonlinear_vecs"));
      t.scale_factors = vec_from_json(jt.at("scale_factors"));
      t.linear_sd = jt.at("linear_sd").get<double>();
      m.transforms.push_back(std::move(t));
    }
    m.beta = vec_from_json(j.at("beta"));
    m.theta = vec_from_json(j.at("theta"));
    m.p_linear = vec_from_json(j.at("p_linear"));
    m.p_nonlinear = vec_from_json(j.at("p_nonlinear"));
    for (const auto& s : j.at("selection")) {
      const std::string label = s.get<std::string>();
      m.selection.push_back(label == "linear" ? EffectType::linear
                            : label == "nonlinear" ? EffectType::nonlinear
                                                   : EffectType::none);
    }
    const json& prior = j.at("prior");
    m.prior.s0 = prior.at("s0").get<double>();
    m.prior.s1 = prior.at("s1").get<double>();
    m.prior.a = prior.at("a").get<double>();
    m.prior.b = prior.at("b").get<double>();
    m.prior.hierarchy = prior.at("hierarchy").get<std::string>() == "independent"
                            ? IndicatorHierarchy::independent
                            : IndicatorHierarchy::dependent;
    const json& fit = j.at("fit");
    m.converged = fit.at("converged").get<bool>();
    m.n_iter = fit.at("n_iter").get<int>();
    m.deviance = fit.at("deviance").get<double>();
    m.deviance_trace = fit.at("deviance_trace").get<std::vector<double>>();
    m.baseline.event_times = j.at("baseline").at("event_times").get<std::vector<double>>();
    m.baseline.increments = j.at("baseline").at("increments").get<std::vector<double>>();
    return m;
  } catch (const json::exception& e) {
    throw input_error(std::string("model file is missing fields: ") + e.what());
  }
}

void save_model(const std::string& path, const AdditiveCoxModel& model) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write '" + path + "'");
  out << model_to_json(model) << '\n';
  if (!out) throw input_error("failed while writing '" + path + "'");
}

AdditiveCoxModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return model_from_json(text);
}

}  // namespace sslcox

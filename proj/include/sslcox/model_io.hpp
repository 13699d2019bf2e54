#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "sslcox/cox.hpp"
#include "sslcox/ssl.hpp"

namespace sslcox {

// A fitted additive Cox model bundled with everything prediction needs:
// the per-predictor spline transforms, coefficients, and the Breslow
// baseline hazard from the training data.
struct AdditiveCoxModel {
  static constexpr int format_version = 1;

  std::vector<std::string> predictor_names;
  std::vector<SplineTransform> transforms;
  Eigen::VectorXd beta;  // flat over the concatenated design columns
  Eigen::VectorXd theta;
  Eigen::VectorXd p_linear, p_nonlinear;
  std::vector<EffectType> selection;
  PriorConfig prior;
  bool converged = false;
  int n_iter = 0;
  double deviance = 0.0;  // in-sample, final EM iteration
  std::vector<double> deviance_trace;
  BaselineHazard baseline;

  int n_predictors() const { return static_cast<int>(transforms.size()); }

  Eigen::VectorXd predict_eta(const Eigen::MatrixXd& covariates) const;
};

AdditiveCoxModel assemble_model(const std::vector<std::string>& names,
                                std::vector<SplineTransform> transforms,
                                const AdditiveDesign& design, const FitResult& fit,
                                const PriorConfig& prior, const SurvivalData& train);

std::string model_to_json(const AdditiveCoxModel& model);
AdditiveCoxModel model_from_json(const std::string& text);

void save_model(const std::string& path, const AdditiveCoxModel& model);
AdditiveCoxModel load_model(const std::string& path);

}  // namespace sslcox

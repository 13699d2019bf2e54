#pragma once

#include <Eigen/Core>
#include <vector>

#include "sslcox/bspline.hpp"
#include "sslcox/cox.hpp"
#include "sslcox/effects.hpp"
#include "sslcox/survival.hpp"

namespace sslcox {

enum class IndicatorHierarchy {
  dependent,   // nonlinear inclusion conditional on linear inclusion
  independent  // both indicators Bernoulli(theta) on their own
};

// Two-part spike-and-slab LASSO prior: double-exponential spike DE(0,s0)
// and slab DE(0,s1), Beta(a,b) hyperprior on the inclusion probability.
struct PriorConfig {
  double s0 = 0.05;
  double s1 = 0.5;
  double a = 1.0;
  double b = 1.0;
  IndicatorHierarchy hierarchy = IndicatorHierarchy::dependent;

  void validate() const;
};

struct FitControl {
  double epsilon = 1e-5;   // relative deviance-change convergence criterion
  int max_em_iter = 200;
  int max_cd_iter = 50;    // cap on both outer approximations and inner sweeps
  double cd_tol = 1e-7;    // coefficient/eta change tolerance

  void validate() const;
};

// Column layout of the concatenated per-predictor [linear | nonlinear]
// design blocks.
struct AdditiveDesign {
  Eigen::MatrixXd X;
  std::vector<int> linear_col;                   // per predictor
  std::vector<std::pair<int, int>> nl_cols;      // per predictor: (first, count)

  int n_predictors() const { return static_cast<int>(linear_col.size()); }
  int n_cols() const { return static_cast<int>(X.cols()); }

  static AdditiveDesign from_bases(const std::vector<ReparamBasis>& bases);
};

// Per-predictor spline bases plus the assembled design, built in one shot
// from a covariate matrix.
struct AdditiveBases {
  std::vector<SplineTransform> transforms;
  AdditiveDesign design;
};

AdditiveBases build_additive_bases(const Eigen::MatrixXd& covariates, const SplineSpec& spec);

// Design rows for new data under fitted transforms.
Eigen::MatrixXd evaluate_design(const std::vector<SplineTransform>& transforms,
                                const Eigen::MatrixXd& covariates);

// Everything the EM iteration tracks: coefficients (flat over design
// columns), inclusion probabilities, theta, equivalent l1 penalties.
struct ModelState {
  Eigen::VectorXd beta;
  Eigen::VectorXd theta;
  Eigen::VectorXd p_linear, p_nonlinear;
  Eigen::VectorXd lambda_linear, lambda_nonlinear;

  static ModelState initial(const AdditiveDesign& design, double theta0 = 0.5);
};

// E-step: posterior inclusion probabilities of the latent indicators and
// the implied per-coefficient l1 penalties, all in log space.
void e_step(ModelState& state, const AdditiveDesign& design, const PriorConfig& prior);

// per-column penalties: lambda_linear for linear columns, the shared
// lambda_nonlinear for every column of a predictor's nonlinear block
Eigen::VectorXd column_lambdas(const ModelState& state, const AdditiveDesign& design);

inline double soft_threshold(double v, double g) {
  const double m = std::abs(v) - g;
  return m > 0.0 ? (v > 0.0 ? m : -m) : 0.0;
}

struct MStepDiagnostics {
  int n_outer = 0;
  bool converged = false;
  double kkt_residual = 0.0;
};

// Penalized Cox coordinate descent: outer quadratic approximations of the
// partial likelihood, inner cyclic soft-threshold updates. lambda(c) is the
// MAP-scale l1 weight of column c (the prior contributes once per
// coefficient, so the penalty is not multiplied by n).
MStepDiagnostics m_step_cd(const SurvivalData& data, const AdditiveDesign& design,
                           Eigen::VectorXd& beta, const Eigen::VectorXd& lambda,
                           const FitControl& control);

// Exact KKT residual of the l1-penalized partial likelihood at beta:
// for zero coefficients the subgradient-bound violation, for nonzero ones
// the stationarity-equation residual.
double kkt_residual(const SurvivalData& data, const AdditiveDesign& design,
                    const Eigen::VectorXd& beta, const Eigen::VectorXd& lambda);

// closed-form conjugate update of the inclusion probabilities
void update_theta(ModelState& state, const PriorConfig& prior);

// Expected log joint posterior (the EM surrogate): indicator terms enter
// through their conditional expectations held in `state`.
double em_objective(const SurvivalData& data, const AdditiveDesign& design,
                    const ModelState& state, const PriorConfig& prior);

struct FitTrace {
  std::vector<double> deviances;
  std::vector<double> objectives;
  int n_iter = 0;
  bool converged = false;
};

struct FitResult {
  Eigen::VectorXd beta;  // flat over design columns
  Eigen::VectorXd theta;
  Eigen::VectorXd p_linear, p_nonlinear;
  std::vector<EffectType> selection;
  double deviance = 0.0;
  bool converged = false;
  FitTrace trace;

  double beta_linear(const AdditiveDesign& design, int j) const {
    return beta(design.linear_col[j]);
  }
  Eigen::VectorXd beta_nonlinear(const AdditiveDesign& design, int j) const {
    const auto [first, count] = design.nl_cols[j];
    return beta.segment(first, count);
  }
};

// EM-coordinate-descent loop. Non-convergence within max_em_iter is
// reported through the result, not thrown.
FitResult fit(const SurvivalData& data, const AdditiveDesign& design,
              const PriorConfig& prior, const FitControl& control,
              const Eigen::VectorXd* beta_init = nullptr,
              const Eigen::VectorXd* theta_init = nullptr);

std::vector<EffectType> classify_selection(const Eigen::VectorXd& beta,
                                           const AdditiveDesign& design);

struct PathPoint {
  double s0;
  FitResult fit;
};

// Fits the s0 grid in the given order (largest spike scale first), carrying
// beta and theta forward as warm starts.
std::vector<PathPoint> fit_path(const SurvivalData& data, const AdditiveDesign& design,
                                const std::vector<double>& s0_grid, const PriorConfig& prior,
                                const FitControl& control);

}  // namespace sslcox

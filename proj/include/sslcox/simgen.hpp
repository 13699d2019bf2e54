#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "sslcox/effects.hpp"
#include "sslcox/rng.hpp"
#include "sslcox/survival.hpp"

namespace sslcox {

// One synthetic-data setting. A config plus its seed fully determines a
// replicate. Event times follow a proportional-hazards Weibull with hazard
// scale * shape * t^(shape-1) * exp(eta); censoring times are Weibull in
// the conventional time-scale parameterization C = scale * E^(1/shape),
// the scale being calibrated to hit the target censoring rate.
struct SimConfig {
  int n_train = 200;
  int n_test = 1000;
  int p = 4;
  double ar_rho = 0.0;          // AR(1) covariate correlation
  double censor_target = 0.30;  // desired P(C < T)
  double event_scale = 1.0;
  double event_shape = 1.2;
  double censor_shape = 0.8;
  std::uint64_t seed = 0;

  void validate() const;
};

// The four active signals; every predictor past the fourth is inert.
struct Scenario {
  static constexpr int n_active = 4;

  // j is the 0-based predictor index
  static double effect(int j, double x);
  static EffectType truth_label(int j);
};

// iid rows from MVN(0, Sigma), Sigma_ij = rho^|i-j|, via Cholesky
Eigen::MatrixXd draw_covariates(int n, int p, double rho, Rng& rng);

Eigen::VectorXd linear_predictor(const Eigen::MatrixXd& covariates, const Scenario& scenario);

// inverse transform of one PH Weibull event time from a uniform draw
double weibull_ph_time(double u, double eta, const SimConfig& config);

// inverse-transform sampling of the PH Weibull event times
Eigen::VectorXd draw_event_times(const Eigen::VectorXd& eta, const SimConfig& config, Rng& rng);

// Censoring-Weibull scale such that P(C < T) hits the target within 0.002,
// found by bisection over a common-random-number Monte Carlo estimate.
double calibrate_censor_scale(const SimConfig& config, const Scenario& scenario);

// Per-config calibration with the batch-level median fallback: configs
// whose calibration fails reuse the median of the successful scales.
std::vector<double> calibrate_censor_scales(const std::vector<SimConfig>& configs,
                                            const Scenario& scenario);

struct Replicate {
  SurvivalData train;
  SurvivalData test;
  std::vector<EffectType> truth;  // per column
  double censor_scale = 0.0;
};

Replicate generate_replicate(const SimConfig& config, const Scenario& scenario);

}  // namespace sslcox

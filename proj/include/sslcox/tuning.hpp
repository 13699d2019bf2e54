#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "sslcox/ssl.hpp"

namespace sslcox {

enum class CvMetric { deviance, c_index };

struct PathSpec {
  std::vector<double> s0_grid;  // traversal order: largest spike scale first
  double s1 = 0.5;
  int n_folds = 5;
  CvMetric metric = CvMetric::deviance;
  std::uint64_t seed = 0;

  void validate(int n_events) const;
};

// geometric sequence from 0.1 down to 0.005
std::vector<double> default_s0_grid(int n_points);

// Event-stratified fold assignment: events are dealt round-robin first so
// every fold sees events, then censored subjects continue the deal.
std::vector<int> kfold_split(int n, int n_folds, std::uint64_t seed,
                             const Eigen::VectorXi& status);

struct CvCell {
  double s0 = 0.0;
  std::vector<double> fold_values;  // out-of-fold metric per fold
  double mean = 0.0;
  double se = 0.0;
  int n_converged = 0;
  bool excluded = false;  // no fold converged at this s0
};

struct CvResult {
  std::vector<CvCell> table;  // one row per grid point, traversal order
  double best_s0 = 0.0;
  FitResult best_fit;                        // refit on the full data
  std::vector<SplineTransform> transforms;   // full-data transforms of the refit
  AdditiveDesign design;                     // full-data design of the refit
  std::vector<int> folds;
  std::vector<std::string> warnings;
};

// Cross-validated spike-scale selection. Out-of-fold deviance uses the
// Verweij-van Houwelingen difference -2[pl(all) - pl(train)]; the C-index
// is computed on held-out linear predictors. Ties in the mean metric break
// toward the larger (sparser) s0.
CvResult cv_path(const SurvivalData& data, const SplineSpec& sspec, const PathSpec& pspec,
                 const PriorConfig& prior_template, const FitControl& control);

// Indices of the k columns with largest sample variance, descending,
// ties broken by original column order.
std::vector<int> variance_filter(const Eigen::MatrixXd& covariates, int k);

}  // namespace sslcox

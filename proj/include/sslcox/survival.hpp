#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "sslcox/errors.hpp"

namespace sslcox {

// Right-censored survival sample: observed time = min(event, censoring),
// status 1 = event observed, 0 = censored.
struct SurvivalData {
  Eigen::VectorXd time;
  Eigen::VectorXi status;
  Eigen::MatrixXd covariates;  // n x p, may have zero columns

  SurvivalData() = default;
  SurvivalData(Eigen::VectorXd t, Eigen::VectorXi s, Eigen::MatrixXd x);

  int n() const { return static_cast<int>(time.size()); }
  int p() const { return static_cast<int>(covariates.cols()); }
  int n_events() const { return status.sum(); }

  // rows in `keep` order (used by CV fold splits)
  SurvivalData subset(const std::vector<int>& keep) const;
};

// Validates sizes, positivity of times, 0/1 status, finiteness.
// Does not require events to be present; fitting checks that separately.
void validate_survival(const SurvivalData& data);

}  // namespace sslcox

#include "sslcox/survival.hpp"

#include <cmath>

namespace sslcox {

SurvivalData::SurvivalData(Eigen::VectorXd t, Eigen::VectorXi s, Eigen::MatrixXd x)
    : time(std::move(t)), status(std::move(s)), covariates(std::move(x)) {
  validate_survival(*this);
}

SurvivalData SurvivalData::subset(const std::vector<int>& keep) const {
  SurvivalData out;
  const int m = static_cast<int>(keep.size());
  out.time.resize(m);
  out.status.resize(m);
  out.covariates.resize(m, covariates.cols());
  for (int i = 0; i < m; ++i) {
    out.time(i) = time(keep[i]);
    out.status(i) = status(keep[i]);
    out.covariates.row(i) = covariates.row(keep[i]);
  }
  return out;
}

void validate_survival(const SurvivalData& data) {
  const int n = data.n();
  if (n == 0) throw input_error("survival data is empty");
  if (data.status.size() != n)
    throw input_error("time and status lengths differ");
  if (data.covariates.rows() != 0 && data.covariates.rows() != n)
    throw input_error("covariate rows do not match number of subjects");
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(data.time(i)) || data.time(i) <= 0.0)
      throw input_error("time must be positive and finite (row " + std::to_string(i + 1) + ")");
    if (data.status(i) != 0 && data.status(i) != 1)
      throw input_error("status must be 0 or 1 (row " + std::to_string(i + 1) + ")");
  }
  if (!data.covariates.allFinite())
    throw input_error("covariates contain non-finite values");
}

}  // namespace sslcox

#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "sslcox/survival.hpp"

namespace sslcox {

// Risk sets for the partial likelihood, shared by the likelihood, score
// and baseline-hazard computations. Subjects are sorted by observed time;
// the risk set of an event time is a suffix of that ordering, so censored
// subjects tied with an event stay at risk for it.
struct RiskSetIndex {
  std::vector<int> order;           // subject indices, time ascending
  std::vector<double> event_times;  // distinct event times, ascending
  std::vector<int> risk_begin;      // offset into `order` where each risk set starts
  std::vector<int> n_events;        // events at each event time (Breslow ties)
};

RiskSetIndex build_risk_index(const SurvivalData& data);

// Breslow-form partial log-likelihood. Returns 0 for all-censored data
// (the empty sum); risk-set sums are log-sum-exp stabilized.
double partial_loglik(const SurvivalData& data, const Eigen::VectorXd& eta);

// Gradient of the partial log-likelihood in eta and the diagonal
// quadratic-approximation weights (negative second derivative, floored at
// 1e-8 so weighted least-squares steps stay finite).
std::pair<Eigen::VectorXd, Eigen::VectorXd> score_and_hessdiag(const SurvivalData& data,
                                                               const Eigen::VectorXd& eta);

inline double deviance(const SurvivalData& data, const Eigen::VectorXd& eta) {
  return -2.0 * partial_loglik(data, eta);
}

// Baseline hazard increments at each distinct event time.
struct BaselineHazard {
  std::vector<double> event_times;
  std::vector<double> increments;

  // step interpolation of the cumulative hazard
  double cumulative(double t) const;
};

BaselineHazard breslow_baseline(const SurvivalData& data, const Eigen::VectorXd& eta);

// Harrell's concordance over pairs (i, j) with status_i = 1 and t_i < t_j;
// ties in risk count one half. Throws if no pair is comparable.
double c_index(const SurvivalData& data, const Eigen::VectorXd& risk);

// Product-limit survival estimate; first point is (0, 1).
struct KaplanMeierCurve {
  std::vector<double> time;
  std::vector<double> survival;
};

KaplanMeierCurve kaplan_meier(const Eigen::VectorXd& time, const Eigen::VectorXi& status);

enum class RiskGroup { low = 0, high = 1 };

// risk <= median -> low (even n: midpoint of the middle two)
std::vector<RiskGroup> median_risk_groups(const Eigen::VectorXd& risk);

}  // namespace sslcox

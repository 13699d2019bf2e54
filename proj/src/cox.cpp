#include "sslcox/cox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sslcox {

RiskSetIndex build_risk_index(const SurvivalData& data) {
  const int n = data.n();
  RiskSetIndex idx;
  idx.order.resize(n);
  std::iota(idx.order.begin(), idx.order.end(), 0);
  std::stable_sort(idx.order.begin(), idx.order.end(),
                   [&](int a, int b) { return data.time(a) < data.time(b); });

  int i = 0;
  while (i < n) {
    int j = i;
    int events = 0;
    const double t = data.time(idx.order[i]);
    while (j < n && data.time(idx.order[j]) == t) {
      events += data.status(idx.order[j]);
      ++j;
    }
    if (events > 0) {
      idx.event_times.push_back(t);
      idx.risk_begin.push_back(i);
      idx.n_events.push_back(events);
    }
    i = j;
  }
  return idx;
}

namespace {

// suffix sums of exp(eta - max_eta) over the time-sorted order, one value
// per distinct event time
std::vector<double> risk_sums(const SurvivalData& data, const RiskSetIndex& idx,
                              const Eigen::VectorXd& eta, double eta_max) {
  const int n = data.n();
  const int m = static_cast<int>(idx.event_times.size());
  std::vector<double> sums(m, 0.0);
  double acc = 0.0;
  int e = m - 1;
  for (int k = n - 1; k >= 0 && e >= 0; --k) {
    acc += std::exp(eta(idx.order[k]) - eta_max);
    if (k == idx.risk_begin[e]) {
      sums[e] = acc;
      --e;
    }
  }
  return sums;
}

}  // namespace

double partial_loglik(const SurvivalData& data, const Eigen::VectorXd& eta) {
  if (!eta.allFinite()) throw numerical_error("linear predictor is not finite");
  const RiskSetIndex idx = build_risk_index(data);
  const int m = static_cast<int>(idx.event_times.size());
  if (m == 0) return 0.0;

  const double eta_max = eta.maxCoeff();
  const std::vector<double> sums = risk_sums(data, idx, eta, eta_max);

  double pl = 0.0;
  for (int e = 0; e < m; ++e) {
    const double log_denom = eta_max + std::log(sums[e]);
    // every event tied at this time contributes its own numerator
    for (int k = idx.risk_begin[e];
         k < data.n() && data.time(idx.order[k]) == idx.event_times[e]; ++k) {
      const int i = idx.order[k];
      if (data.status(i) == 1) pl += eta(i) - log_denom;
    }
  }
  return pl;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> score_and_hessdiag(const SurvivalData& data,
                                                               const Eigen::VectorXd& eta) {
  if (!eta.allFinite()) throw numerical_error("linear predictor is not finite");
  const int n = data.n();
  const RiskSetIndex idx = build_risk_index(data);
  const int m = static_cast<int>(idx.event_times.size());

  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1e-8);
  if (m == 0) return {u, w};

  const double eta_max = eta.maxCoeff();
  const std::vector<double> sums = risk_sums(data, idx, eta, eta_max);

  // cum1/cum2 accumulate sum over event times s <= t_i of d_s/S(s) and
  // d_s/S(s)^2 in the shifted scale; subjects are visited time-ascending
  double cum1 = 0.0, cum2 = 0.0;
  int e = 0;
  for (int k = 0; k < n; ++k) {
    if (e < m && k == idx.risk_begin[e]) {
      cum1 += idx.n_events[e] / sums[e];
      cum2 += idx.n_events[e] / (sums[e] * sums[e]);
      ++e;
    }
    const int i = idx.order[k];
    const double r = std::exp(eta(i) - eta_max);
    u(i) = data.status(i) - r * cum1;
    w(i) = std::max(r * cum1 - r * r * cum2, 1e-8);
  }
  return {u, w};
}

double BaselineHazard::cumulative(double t) const {
  double h = 0.0;
  for (std::size_t k = 0; k < event_times.size() && event_times[k] <= t; ++k)
    h += increments[k];
  return h;
}

BaselineHazard breslow_baseline(const SurvivalData& data, const Eigen::VectorXd& eta) {
  if (!eta.allFinite()) throw numerical_error("linear predictor is not finite");
  const RiskSetIndex idx = build_risk_index(data);
  const int m = static_cast<int>(idx.event_times.size());
  BaselineHazard bh;
  bh.event_times = idx.event_times;
  bh.increments.resize(m);
  if (m == 0) return bh;

  const double eta_max = eta.maxCoeff();
  const std::vector<double> sums = risk_sums(data, idx, eta, eta_max);
  for (int e = 0; e < m; ++e)
    bh.increments[e] = idx.n_events[e] / (sums[e] * std::exp(eta_max));
  return bh;
}

double c_index(const SurvivalData& data, const Eigen::VectorXd& risk) {
  const int n = data.n();
  double concordant = 0.0;
  long comparable = 0;
  for (int i = 0; i < n; ++i) {
    if (data.status(i) != 1) continue;
    for (int j = 0; j < n; ++j) {
      if (data.time(i) >= data.time(j)) continue;
      ++comparable;
      if (risk(i) > risk(j))
        concordant += 1.0;
      else if (risk(i) == risk(j))
        concordant += 0.5;
    }
  }
  if (comparable == 0) throw input_error("concordance undefined: no comparable pairs");
  return concordant / comparable;
}

KaplanMeierCurve kaplan_meier(const Eigen::VectorXd& time, const Eigen::VectorXi& status) {
  const int n = static_cast<int>(time.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return time(a) < time(b); });

  KaplanMeierCurve km;
  km.time.push_back(0.0);
  km.survival.push_back(1.0);
  double surv = 1.0;
  int k = 0;
  while (k < n) {
    const double t = time(order[k]);
    int events = 0, ties = 0;
    while (k + ties < n && time(order[k + ties]) == t) {
      events += status(order[k + ties]);
      ++ties;
    }
    const int at_risk = n - k;
    if (events > 0) {
      surv *= 1.0 - static_cast<double>(events) / at_risk;
      km.time.push_back(t);
      km.survival.push_back(surv);
    }
    k += ties;
  }
  return km;
}

std::vector<RiskGroup> median_risk_groups(const Eigen::VectorXd& risk) {
  const int n = static_cast<int>(risk.size());
  std::vector<double> sorted(risk.data(), risk.data() + n);
  std::sort(sorted.begin(), sorted.end());
  const double median = (n % 2 == 1) ? sorted[n / 2]
                                     : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  std::vector<RiskGroup> groups(n);
  for (int i = 0; i < n; ++i)
    groups[i] = risk(i) <= median ? RiskGroup::low : RiskGroup::high;
  return groups;
}

}  // namespace sslcox

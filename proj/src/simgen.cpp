#include "sslcox/simgen.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace sslcox {

namespace {
constexpr std::uint64_t kTrainStream = 1;
constexpr std::uint64_t kTestStream = 2;
constexpr std::uint64_t kCalibStream = 3;
constexpr int kCalibDraws = 100000;
constexpr double kCalibRateTol = 0.002;
}  // namespace

void SimConfig::validate() const {
  if (p < Scenario::n_active) throw input_error("p must be at least 4");
  if (n_train < 1 || n_test < 0) throw input_error("invalid sample sizes");
  if (!(censor_target > 0.0 && censor_target < 1.0))
    throw input_error("censor_target must lie in (0,1)");
  if (!(event_scale > 0.0 && event_shape > 0.0 && censor_shape > 0.0))
    throw input_error("Weibull parameters must be positive");
  if (!(ar_rho > -1.0 && ar_rho < 1.0)) throw input_error("ar_rho must lie in (-1,1)");
}

double Scenario::effect(int j, double x) {
  switch (j) {
    case 0: return (x + 1.0) * (x + 1.0) / 5.0;
    case 1: return std::exp(x + 1.0) / 25.0;
    case 2: return 3.0 * std::sin(x) / 2.0;
    case 3: return (1.4 * x + 0.5) / 2.0;
    default: return 0.0;
  }
}

EffectType Scenario::truth_label(int j) {
  if (j >= 0 && j < 3) return EffectType::nonlinear;
  if (j == 3) return EffectType::linear;
  return EffectType::none;
}

Eigen::MatrixXd draw_covariates(int n, int p, double rho, Rng& rng) {
  Eigen::MatrixXd X(n, p);
  if (rho == 0.0) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < p; ++j) X(i, j) = rng.normal();
    return X;
  }
  Eigen::MatrixXd sigma(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) sigma(i, j) = std::pow(rho, std::abs(i - j));
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw numerical_error("AR covariance is not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();
  Eigen::VectorXd z(p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) z(j) = rng.normal();
    X.row(i) = (L * z).transpose();
  }
  return X;
}

Eigen::VectorXd linear_predictor(const Eigen::MatrixXd& covariates, const Scenario&) {
  const int n = static_cast<int>(covariates.rows());
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
  const int active = std::min<int>(Scenario::n_active, covariates.cols());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < active; ++j) eta(i) += Scenario::effect(j, covariates(i, j));
  return eta;
}

double weibull_ph_time(double u, double eta, const SimConfig& config) {
  return std::pow(-std::log(u) / (config.event_scale * std::exp(eta)),
                  1.0 / config.event_shape);
}

Eigen::VectorXd draw_event_times(const Eigen::VectorXd& eta, const SimConfig& config,
                                 Rng& rng) {
  const int n = static_cast<int>(eta.size());
  Eigen::VectorXd t(n);
  for (int i = 0; i < n; ++i) t(i) = weibull_ph_time(rng.uniform(), eta(i), config);
  return t;
}

double calibrate_censor_scale(const SimConfig& config, const Scenario& scenario) {
  config.validate();
  Rng rng = Rng(config.seed).spawn(kCalibStream);

  // common random numbers: fixed event times and censoring "shapes" make
  // the rate curve exactly monotone in the scale
  Eigen::MatrixXd x = draw_covariates(kCalibDraws, Scenario::n_active, config.ar_rho, rng);
  Eigen::VectorXd eta = linear_predictor(x, scenario);
  Eigen::VectorXd t_event = draw_event_times(eta, config, rng);
  Eigen::VectorXd w_censor(kCalibDraws);
  for (int i = 0; i < kCalibDraws; ++i)
    w_censor(i) = std::pow(rng.exponential(), 1.0 / config.censor_shape);

  auto rate = [&](double scale) {
    int censored = 0;
    for (int i = 0; i < kCalibDraws; ++i)
      if (scale * w_censor(i) < t_event(i)) ++censored;
    return static_cast<double>(censored) / kCalibDraws;
  };

  std::ostringstream trace;
  double lo = 1e-9, hi = 1.0;
  double rate_lo = rate(lo), rate_hi = rate(hi);
  trace << "bracket: rate(" << lo << ")=" << rate_lo;
  int expand = 0;
  while (rate_hi > config.censor_target && expand < 64) {
    lo = hi;
    rate_lo = rate_hi;
    hi *= 4.0;
    rate_hi = rate(hi);
    ++expand;
  }
  trace << ", rate(" << hi << ")=" << rate_hi;
  if (rate_lo < config.censor_target || rate_hi > config.censor_target)
    throw numerical_error("censoring calibration bracket failure; " + trace.str());

  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double r = rate(mid);
    if (!(r <= rate_lo && r >= rate_hi))
      throw numerical_error("censoring rate is not monotone on the bracket; " + trace.str());
    if (std::abs(r - config.censor_target) <= kCalibRateTol) return mid;
    if (r > config.censor_target) {
      lo = mid;
      rate_lo = r;
    } else {
      hi = mid;
      rate_hi = r;
    }
  }
  trace << "; final bracket [" << lo << ", " << hi << "]";
  throw numerical_error("censoring calibration did not converge; " + trace.str());
}

std::vector<double> calibrate_censor_scales(const std::vector<SimConfig>& configs,
                                            const Scenario& scenario) {
  std::vector<double> scales(configs.size(), -1.0);
  std::vector<double> ok;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    try {
      scales[i] = calibrate_censor_scale(configs[i], scenario);
      ok.push_back(scales[i]);
    } catch (const numerical_error&) {
      // filled with the batch median below
    }
  }
  if (ok.empty()) throw numerical_error("censoring calibration failed for every replicate");
  std::sort(ok.begin(), ok.end());
  const double median = ok.size() % 2 == 1
                            ? ok[ok.size() / 2]
                            : 0.5 * (ok[ok.size() / 2 - 1] + ok[ok.size() / 2]);
  for (double& s : scales)
    if (s < 0.0) s = median;
  return scales;
}

namespace {

SurvivalData draw_dataset(int n, const SimConfig& config, const Scenario& scenario,
                          double censor_scale, Rng& rng) {
  Eigen::MatrixXd x = draw_covariates(n, config.p, config.ar_rho, rng);
  Eigen::VectorXd eta = linear_predictor(x, scenario);
  Eigen::VectorXd t_event = draw_event_times(eta, config, rng);
  Eigen::VectorXd time(n);
  Eigen::VectorXi status(n);
  for (int i = 0; i < n; ++i) {
    const double c = censor_scale * std::pow(rng.exponential(), 1.0 / config.censor_shape);
    // event wins ties: status = I(T <= C)
    status(i) = t_event(i) <= c ? 1 : 0;
    time(i) = std::min(t_event(i), c);
  }
  return SurvivalData(std::move(time), std::move(status), std::move(x));
}

}  // namespace

Replicate generate_replicate(const SimConfig& config, const Scenario& scenario) {
  config.validate();
  Replicate rep;
  rep.censor_scale = calibrate_censor_scale(config, scenario);

  Rng rng_train = Rng(config.seed).spawn(kTrainStream);
  rep.train = draw_dataset(config.n_train, config, scenario, rep.censor_scale, rng_train);
  if (config.n_test > 0) {
    Rng rng_test = Rng(config.seed).spawn(kTestStream);
    rep.test = draw_dataset(config.n_test, config, scenario, rep.censor_scale, rng_test);
  }
  rep.truth.resize(config.p);
  for (int j = 0; j < config.p; ++j) rep.truth[j] = Scenario::truth_label(j);
  return rep;
}

}  // namespace sslcox

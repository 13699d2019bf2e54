#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>

#include "sslcox/cox.hpp"
#include "sslcox/rng.hpp"

using namespace sslcox;

namespace {

SurvivalData make_data(std::initializer_list<double> times, std::initializer_list<int> statuses) {
  Eigen::VectorXd t(static_cast<int>(times.size()));
  Eigen::VectorXi s(static_cast<int>(statuses.size()));
  int i = 0;
  for (double v : times) t(i++) = v;
  i = 0;
  for (int v : statuses) s(i++) = v;
  return SurvivalData(t, s, Eigen::MatrixXd(t.size(), 0));
}

SurvivalData random_fixture(int n, Rng& rng, bool with_ties) {
  Eigen::VectorXd t(n);
  Eigen::VectorXi s(n);
  for (int i = 0; i < n; ++i) {
    t(i) = with_ties ? 1.0 + rng.below(6) : rng.exponential();
    s(i) = rng.uniform() < 0.7 ? 1 : 0;
  }
  if (s.sum() == 0) s(0) = 1;
  return SurvivalData(t, s, Eigen::MatrixXd(n, 0));
}

Eigen::VectorXd random_eta(int n, Rng& rng) {
  Eigen::VectorXd eta(n);
  for (int i = 0; i < n; ++i) eta(i) = rng.normal();
  return eta;
}

}  // namespace

TEST_CASE("partial likelihood hand values") {
  // single subject with an event: it is its own full risk set
  auto d1 = make_data({1.0}, {1});
  Eigen::VectorXd eta1(1);
  eta1(0) = 2.7;
  CHECK(partial_loglik(d1, eta1) == doctest::Approx(0.0).epsilon(1e-12));

  // two events, flat eta: log(1/2) + log(1)
  auto d2 = make_data({1.0, 2.0}, {1, 1});
  CHECK(partial_loglik(d2, Eigen::VectorXd::Zero(2)) ==
        doctest::Approx(-0.6931471805599453).epsilon(1e-9));

  // event then censoring, eta = [log 3, 0]: log(3/4)
  auto d3 = make_data({1.0, 2.0}, {1, 0});
  Eigen::VectorXd eta3(2);
  eta3 << std::log(3.0), 0.0;
  CHECK(partial_loglik(d3, eta3) == doctest::Approx(-0.2876820724517809).epsilon(1e-9));
}

TEST_CASE("all-censored data gives an empty sum") {
  auto d = make_data({1.0, 2.0, 3.0}, {0, 0, 0});
  CHECK(partial_loglik(d, Eigen::VectorXd::Zero(3)) == 0.0);
  CHECK(deviance(d, Eigen::VectorXd::Zero(3)) == 0.0);
}

TEST_CASE("location invariance of the partial likelihood") {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    auto d = random_fixture(40, rng, trial % 2 == 0);
    const Eigen::VectorXd eta = random_eta(40, rng);
    const double shift = rng.normal() * 3.0;
    const double a = partial_loglik(d, eta);
    const double b = partial_loglik(d, eta.array() + shift);
    CHECK(std::abs(a - b) < 1e-9);
  }
}

TEST_CASE("score matches central finite differences") {
  Rng rng(37);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 30;
    auto d = random_fixture(n, rng, trial >= 4);
    const Eigen::VectorXd eta = random_eta(n, rng);
    const auto [u, w] = score_and_hessdiag(d, eta);

    const double h = 1e-5;
    Eigen::VectorXd fd(n);
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd ep = eta, em = eta;
      ep(i) += h;
      em(i) -= h;
      fd(i) = (partial_loglik(d, ep) - partial_loglik(d, em)) / (2.0 * h);
    }
    const double scale = std::max(1e-8, fd.cwiseAbs().maxCoeff());
    CHECK((u - fd).cwiseAbs().maxCoeff() / scale < 1e-6);

    // score sums to zero (location invariance)
    CHECK(std::abs(u.sum()) < 1e-10);
  }
}

TEST_CASE("single subject score and floored curvature") {
  auto d = make_data({1.0}, {1});
  const auto [u, w] = score_and_hessdiag(d, Eigen::VectorXd::Zero(1));
  CHECK(u(0) == doctest::Approx(0.0));
  CHECK(w(0) == doctest::Approx(1e-8));
}

TEST_CASE("two events at eta zero: score is [1/2, -1/2]") {
  auto d = make_data({1.0, 2.0}, {1, 1});
  const auto [u, w] = score_and_hessdiag(d, Eigen::VectorXd::Zero(2));
  CHECK(u(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(u(1) == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("breslow baseline increments") {
  auto d1 = make_data({1.0}, {1});
  const auto bh1 = breslow_baseline(d1, Eigen::VectorXd::Zero(1));
  REQUIRE(bh1.increments.size() == 1);
  CHECK(bh1.increments[0] == doctest::Approx(1.0));

  auto d2 = make_data({1.0, 2.0}, {1, 1});
  const auto bh2 = breslow_baseline(d2, Eigen::VectorXd::Zero(2));
  REQUIRE(bh2.increments.size() == 2);
  CHECK(bh2.increments[0] == doctest::Approx(0.5));
  CHECK(bh2.increments[1] == doctest::Approx(1.0));

  // doubling exp(eta) halves every increment
  Eigen::VectorXd shifted = Eigen::VectorXd::Constant(2, std::log(2.0));
  const auto bh3 = breslow_baseline(d2, shifted);
  CHECK(bh3.increments[0] == doctest::Approx(0.25));
  CHECK(bh3.increments[1] == doctest::Approx(0.5));

  // at eta = 0 the increments reproduce Nelson-Aalen d/|R|
  Rng rng(41);
  auto d = random_fixture(50, rng, true);
  const auto bh = breslow_baseline(d, Eigen::VectorXd::Zero(50));
  const auto idx = build_risk_index(d);
  for (std::size_t e = 0; e < idx.event_times.size(); ++e) {
    const int at_risk = 50 - idx.risk_begin[e];
    CHECK(bh.increments[e] ==
          doctest::Approx(static_cast<double>(idx.n_events[e]) / at_risk).epsilon(1e-12));
  }
}

TEST_CASE("deviance is minus twice the partial likelihood") {
  auto d2 = make_data({1.0, 2.0}, {1, 1});
  CHECK(deviance(d2, Eigen::VectorXd::Zero(2)) ==
        doctest::Approx(1.3862943611198906).epsilon(1e-9));

  Rng rng(43);
  for (int trial = 0; trial < 5; ++trial) {
    auto d = random_fixture(25, rng, false);
    const Eigen::VectorXd eta = random_eta(25, rng);
    CHECK(deviance(d, eta) == -2.0 * partial_loglik(d, eta));
  }
}

TEST_CASE("concordance index") {
  auto d = make_data({1.0, 2.0, 3.0}, {1, 1, 1});
  Eigen::VectorXd perfect(3), inverted(3), flat(3);
  perfect << 3, 2, 1;
  inverted << 1, 2, 3;
  flat << 1, 1, 1;
  CHECK(c_index(d, perfect) == doctest::Approx(1.0));
  CHECK(c_index(d, inverted) == doctest::Approx(0.0));
  CHECK(c_index(d, flat) == doctest::Approx(0.5));

  // no comparable pairs
  auto dc = make_data({1.0, 1.0}, {1, 1});
  Eigen::VectorXd r2(2);
  r2 << 1, 2;
  CHECK_THROWS_AS(c_index(dc, r2), input_error);

  // complement identity when no risk ties exist
  Rng rng(47);
  auto dr = random_fixture(30, rng, false);
  const Eigen::VectorXd risk = random_eta(30, rng);
  CHECK(c_index(dr, risk) + c_index(dr, -risk) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("kaplan-meier estimates") {
  // event at 1, censored at 2
  Eigen::VectorXd t1(2);
  Eigen::VectorXi s1(2);
  t1 << 1.0, 2.0;
  s1 << 1, 0;
  const auto km1 = kaplan_meier(t1, s1);
  REQUIRE(km1.time.size() == 2);
  CHECK(km1.survival[0] == 1.0);
  CHECK(km1.survival[1] == doctest::Approx(0.5));

  // no events: survival stays 1
  Eigen::VectorXi s0 = Eigen::VectorXi::Zero(2);
  const auto km0 = kaplan_meier(t1, s0);
  CHECK(km0.time.size() == 1);
  CHECK(km0.survival[0] == 1.0);

  // four distinct event times: steps 0.75, 0.5, 0.25, 0
  Eigen::VectorXd t4(4);
  Eigen::VectorXi s4(4);
  t4 << 1, 2, 3, 4;
  s4 << 1, 1, 1, 1;
  const auto km4 = kaplan_meier(t4, s4);
  REQUIRE(km4.survival.size() == 5);
  CHECK(km4.survival[1] == doctest::Approx(0.75));
  CHECK(km4.survival[2] == doctest::Approx(0.5));
  CHECK(km4.survival[3] == doctest::Approx(0.25));
  CHECK(km4.survival[4] == doctest::Approx(0.0));

  // monotone, in [0,1], starts at 1
  Rng rng(53);
  Eigen::VectorXd tr(60);
  Eigen::VectorXi sr(60);
  for (int i = 0; i < 60; ++i) {
    tr(i) = rng.exponential();
    sr(i) = rng.uniform() < 0.6;
  }
  const auto km = kaplan_meier(tr, sr);
  CHECK(km.survival.front() == 1.0);
  for (std::size_t k = 1; k < km.survival.size(); ++k) {
    CHECK(km.survival[k] <= km.survival[k - 1]);
    CHECK(km.survival[k] >= 0.0);
  }
}

TEST_CASE("median risk groups") {
  Eigen::VectorXd r1(4);
  r1 << 1, 2, 3, 4;
  const auto g1 = median_risk_groups(r1);
  CHECK(g1[0] == RiskGroup::low);
  CHECK(g1[1] == RiskGroup::low);
  CHECK(g1[2] == RiskGroup::high);
  CHECK(g1[3] == RiskGroup::high);

  Eigen::VectorXd r2 = Eigen::VectorXd::Constant(5, 2.5);
  for (const auto g : median_risk_groups(r2)) CHECK(g == RiskGroup::low);

  Eigen::VectorXd r3(3);
  r3 << 5, 1, 3;
  const auto g3 = median_risk_groups(r3);
  CHECK(g3[0] == RiskGroup::high);
  CHECK(g3[1] == RiskGroup::low);
  CHECK(g3[2] == RiskGroup::low);
}

TEST_CASE("risk sets are nested and contain their events") {
  Rng rng(59);
  auto d = random_fixture(40, rng, true);
  const auto idx = build_risk_index(d);
  for (std::size_t e = 1; e < idx.event_times.size(); ++e) {
    CHECK(idx.event_times[e] > idx.event_times[e - 1]);
    CHECK(idx.risk_begin[e] > idx.risk_begin[e - 1]);
  }
  // every subject in the risk set has time >= the event time
  for (std::size_t e = 0; e < idx.event_times.size(); ++e)
    for (int k = idx.risk_begin[e]; k < d.n(); ++k)
      CHECK(d.time(idx.order[k]) >= idx.event_times[e]);
}

TEST_CASE("input validation") {
  Eigen::VectorXd t(2);
  Eigen::VectorXi s(2);
  t << 1.0, -1.0;
  s << 1, 0;
  CHECK_THROWS_AS(SurvivalData(t, s, Eigen::MatrixXd(2, 0)), input_error);

  t << 1.0, 2.0;
  s << 1, 2;
  CHECK_THROWS_AS(SurvivalData(t, s, Eigen::MatrixXd(2, 0)), input_error);

  s << 1, 0;
  SurvivalData ok(t, s, Eigen::MatrixXd(2, 0));
  Eigen::VectorXd bad_eta(2);
  bad_eta << 0.0, std::nan("");
  CHECK_THROWS_AS(partial_loglik(ok, bad_eta), numerical_error);
}

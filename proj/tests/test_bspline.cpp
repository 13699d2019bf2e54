#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>

#include "sslcox/bspline.hpp"
#include "sslcox/cox.hpp"
#include "sslcox/rng.hpp"
#include "sslcox/ssl.hpp"

using namespace sslcox;

namespace {

Eigen::VectorXd linspace(double a, double b, int n) {
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x(i) = a + (b - a) * i / (n - 1);
  return x;
}

}  // namespace

TEST_CASE("centered basis columns have mean zero") {
  const Eigen::VectorXd x = linspace(0.0, 1.0, 21);
  SplineSpec spec;
  spec.n_bases = 10;
  const RawBasis raw = build_raw_basis(x, spec);
  CHECK(raw.basis.rows() == 21);
  CHECK(raw.basis.cols() == 10);
  for (int k = 0; k < 10; ++k)
    CHECK(std::abs(raw.basis.col(k).mean()) < 1e-10);
}

TEST_CASE("penalty vanishes on coefficient vectors reproducing a straight line") {
  const Eigen::VectorXd x = linspace(-1.0, 2.0, 40);
  SplineSpec spec;
  spec.n_bases = 8;
  const RawBasis raw = build_raw_basis(x, spec);

  // coefficients of f(t) = 2t + 3 in the B-spline basis via least squares
  Eigen::MatrixXd uncentered = raw.basis;
  uncentered.rowwise() += raw.column_means.transpose();
  const Eigen::VectorXd target = 2.0 * x.array() + 3.0;
  const Eigen::VectorXd coef = uncentered.colPivHouseholderQr().solve(target);
  CHECK((uncentered * coef - target).cwiseAbs().maxCoeff() < 1e-8);

  const double quad = coef.dot(raw.penalty * coef);
  CHECK(std::abs(quad) < 1e-9);
}

TEST_CASE("penalty matches a high-resolution trapezoid integration of d2 products") {
  // knots spread over [0,1]; compare the exact Gram matrix against a
  // 1e5-point trapezoid rule applied to the second derivatives
  const Eigen::VectorXd x = linspace(0.0, 1.0, 41);
  SplineSpec spec;
  spec.n_bases = 6;
  const RawBasis raw = build_raw_basis(x, spec);
  const int K = spec.n_bases;

  const int grid_n = 100001;
  Eigen::MatrixXd oracle = Eigen::MatrixXd::Zero(K, K);
  const double a = raw.knots.front(), b = raw.knots.back();
  const double h = (b - a) / (grid_n - 1);
  Eigen::VectorXd prev = bspline_row(raw.knots, raw.degree, a, 2);
  for (int g = 1; g < grid_n; ++g) {
    const Eigen::VectorXd cur = bspline_row(raw.knots, raw.degree, a + g * h, 2);
    oracle += 0.5 * h * (prev * prev.transpose() + cur * cur.transpose());
    prev = cur;
  }
  CHECK((oracle - raw.penalty).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("reparameterization of a diagonal penalty") {
  // hand-built raw basis with S = diag(0, 2): column 1 is the linear
  // direction, column 2 carries all the curvature
  RawBasis raw;
  const int n = 12;
  raw.degree = 3;
  Eigen::VectorXd t = linspace(-1.0, 1.0, n);
  raw.basis.resize(n, 2);
  raw.basis.col(0) = t;
  raw.basis.col(1) = t.array().square();
  raw.column_means = raw.basis.colwise().mean();
  raw.basis.rowwise() -= raw.column_means.transpose();
  raw.penalty = Eigen::MatrixXd::Zero(2, 2);
  raw.penalty(1, 1) = 2.0;

  const ReparamBasis rep = reparameterize(raw);
  CHECK(rep.k_nonlinear == 1);

  // linear column = centered column 1, standardized
  double mean = raw.basis.col(0).mean();
  double ss = (raw.basis.col(0).array() - mean).square().sum();
  const Eigen::VectorXd expected_lin = raw.basis.col(0) / std::sqrt(ss / (n - 1));
  CHECK((rep.linear_col - expected_lin).cwiseAbs().maxCoeff() < 1e-12);

  // nonlinear column = column 2 scaled by 1/sqrt(2)
  const Eigen::VectorXd expected_nl = raw.basis.col(1) / std::sqrt(2.0);
  CHECK((rep.nonlinear_cols.col(0) - expected_nl).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(rep.scale_factors(0) == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("a null space that survives centering in two directions is refused") {
  RawBasis raw;
  const int n = 15;
  raw.degree = 3;
  Eigen::VectorXd t = linspace(-1.0, 1.0, n);
  raw.basis.resize(n, 3);
  raw.basis.col(0) = t;
  raw.basis.col(1) = t.array().square();
  raw.basis.col(2) = t.array().cube();
  raw.column_means = raw.basis.colwise().mean();
  raw.basis.rowwise() -= raw.column_means.transpose();
  raw.penalty = Eigen::MatrixXd::Zero(3, 3);
  raw.penalty(2, 2) = 1.0;  // null space = span{col 1, col 2}, both survive

  CHECK_THROWS_AS(reparameterize(raw), numerical_error);
}

TEST_CASE("scale factors invert the nonzero eigenvalues") {
  Rng rng(7);
  Eigen::VectorXd x(60);
  for (int i = 0; i < 60; ++i) x(i) = rng.normal();
  SplineSpec spec;
  const RawBasis raw = build_raw_basis(x, spec);
  const ReparamBasis rep = reparameterize(raw);
  for (int k = 0; k < rep.k_nonlinear; ++k)
    CHECK(rep.scale_factors(k) * rep.scale_factors(k) * rep.eigenvalues(k) ==
          doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("ten-basis cubic spline splits into 1 linear + 8 nonlinear columns") {
  const Eigen::VectorXd x = linspace(0.0, 1.0, 50);
  SplineSpec spec;
  spec.n_bases = 10;
  const RawBasis raw = build_raw_basis(x, spec);
  const ReparamBasis rep = reparameterize(raw);
  CHECK(rep.k_nonlinear == 8);
  CHECK(rep.linear_col.size() == 50);
  CHECK(std::abs(rep.linear_col.mean()) < 1e-10);

  // unit sample SD of the linear column
  double ss = 0.0;
  for (int i = 0; i < 50; ++i)
    ss += (rep.linear_col(i) - rep.linear_col.mean()) * (rep.linear_col(i) - rep.linear_col.mean());
  CHECK(std::sqrt(ss / 49) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("penalty reconstruction U^T S U = D") {
  Rng rng(11);
  Eigen::VectorXd x(80);
  for (int i = 0; i < 80; ++i) x(i) = rng.normal() * 2.0;
  SplineSpec spec;
  const RawBasis raw = build_raw_basis(x, spec);
  const ReparamBasis rep = reparameterize(raw);
  const Eigen::MatrixXd d =
      rep.eigenvectors.transpose() * raw.penalty * rep.eigenvectors;
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(d.rows(), d.cols());
  for (int k = 0; k < rep.k_nonlinear; ++k) expected(k, k) = rep.eigenvalues(k);
  CHECK((d - expected).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("span preservation: raw and reparameterized fits agree") {
  Rng rng(13);
  Eigen::VectorXd x(70);
  for (int i = 0; i < 70; ++i) x(i) = rng.normal();
  SplineSpec spec;
  const RawBasis raw = build_raw_basis(x, spec);
  const ReparamBasis rep = reparameterize(raw);

  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd coef(spec.n_bases);
    for (int k = 0; k < spec.n_bases; ++k) coef(k) = rng.normal();
    const Eigen::VectorXd fitted_raw = raw.basis * coef;

    // transformed coefficients: project onto the rotated directions
    const int kj = rep.k_nonlinear;
    const double lin_coef = rep.eigenvectors.col(kj).dot(coef) * rep.linear_sd;
    Eigen::VectorXd fitted_rep = rep.linear_col * lin_coef;
    for (int k = 0; k < kj; ++k) {
      const double c = rep.eigenvectors.col(k).dot(coef) / rep.scale_factors(k);
      fitted_rep += rep.nonlinear_cols.col(k) * c;
    }
    // the constant-direction component is annihilated by centering
    CHECK((fitted_raw - fitted_rep).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("every design column has training mean zero") {
  Rng rng(17);
  Eigen::VectorXd x(64);
  for (int i = 0; i < 64; ++i) x(i) = rng.uniform() * 4.0 - 2.0;
  SplineSpec spec;
  const RawBasis raw = build_raw_basis(x, spec);
  const ReparamBasis rep = reparameterize(raw);
  CHECK(std::abs(rep.linear_col.mean()) < 1e-10);
  for (int k = 0; k < rep.k_nonlinear; ++k)
    CHECK(std::abs(rep.nonlinear_cols.col(k).mean()) < 1e-10);
}

TEST_CASE("evaluate_transform round-trips the training design") {
  Rng rng(19);
  Eigen::VectorXd x(55);
  for (int i = 0; i < 55; ++i) x(i) = rng.normal();
  SplineSpec spec;
  const RawBasis raw = build_raw_basis(x, spec);
  const ReparamBasis rep = reparameterize(raw);
  const Eigen::MatrixXd design = evaluate_basis(raw, rep, x);

  CHECK((design.col(0) - rep.linear_col).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((design.rightCols(rep.k_nonlinear) - rep.nonlinear_cols).cwiseAbs().maxCoeff() <
        1e-12);

  // a single training point reproduces its row
  Eigen::VectorXd one(1);
  one(0) = x(10);
  const Eigen::MatrixXd row = evaluate_basis(raw, rep, one);
  CHECK((row.row(0) - design.row(10)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("points beyond the knots are extended linearly") {
  const Eigen::VectorXd x = linspace(0.0, 1.0, 30);
  SplineSpec spec;
  spec.n_bases = 6;
  const RawBasis raw = build_raw_basis(x, spec);

  // finite-difference slope at the boundary, from inside the domain
  const double h = 1e-6;
  const Eigen::VectorXd at_hi = bspline_row(raw.knots, raw.degree, 1.0, 0);
  const Eigen::VectorXd inside = bspline_row(raw.knots, raw.degree, 1.0 - h, 0);
  const Eigen::VectorXd slope_fd = (at_hi - inside) / h;

  for (const double step : {0.25, 1.0, 3.0}) {
    const Eigen::VectorXd far = bspline_row(raw.knots, raw.degree, 1.0 + step, 0);
    const Eigen::VectorXd expected = at_hi + step * slope_fd;
    CHECK((far - expected).cwiseAbs().maxCoeff() < 1e-4 * (1.0 + step));
  }

  // left side as well
  const Eigen::VectorXd at_lo = bspline_row(raw.knots, raw.degree, 0.0, 0);
  const Eigen::VectorXd inside_lo = bspline_row(raw.knots, raw.degree, h, 0);
  const Eigen::VectorXd slope_lo = (inside_lo - at_lo) / h;
  const Eigen::VectorXd far_lo = bspline_row(raw.knots, raw.degree, -2.0, 0);
  CHECK((far_lo - (at_lo - 2.0 * slope_lo)).cwiseAbs().maxCoeff() < 3e-4);
}

TEST_CASE("input validation") {
  SplineSpec spec;
  Eigen::VectorXd bad(30);
  bad.setConstant(1.0);
  CHECK_THROWS_AS(build_raw_basis(bad, spec), input_error);

  Eigen::VectorXd with_nan = linspace(0, 1, 30);
  with_nan(3) = std::nan("");
  CHECK_THROWS_AS(build_raw_basis(with_nan, spec), input_error);

  Eigen::VectorXd too_short = linspace(0, 1, 8);
  CHECK_THROWS_AS(build_raw_basis(too_short, spec), input_error);

  SplineSpec tiny;
  tiny.n_bases = 3;
  CHECK_THROWS_AS(tiny.validate(), input_error);
}

TEST_CASE("unpenalized fit invariance between raw and reparameterized designs") {
  // n=50, one predictor: maximum partial likelihood via coordinate descent
  // with zero penalty must give the same in-sample linear predictor for
  // the raw centered basis and the reparameterized one
  Rng rng(23);
  const int n = 50;
  Eigen::VectorXd x(n), time(n);
  Eigen::VectorXi status(n);
  for (int i = 0; i < n; ++i) {
    x(i) = rng.normal();
    time(i) = std::pow(-std::log(rng.uniform()) / std::exp(0.8 * x(i)), 1.0 / 1.2);
    status(i) = rng.uniform() < 0.75 ? 1 : 0;
  }
  SurvivalData data(time, status, x);

  SplineSpec spec;
  spec.n_bases = 8;
  const RawBasis raw = build_raw_basis(x, spec);
  const ReparamBasis rep = reparameterize(raw);

  FitControl ctrl;
  ctrl.max_cd_iter = 4000;

  // raw design: reuse the CD machinery with a single synthetic "predictor"
  AdditiveDesign d_raw;
  d_raw.X = raw.basis;
  d_raw.linear_col = {0};
  d_raw.nl_cols = {{1, spec.n_bases - 1}};
  Eigen::VectorXd beta_raw = Eigen::VectorXd::Zero(spec.n_bases);
  m_step_cd(data, d_raw, beta_raw, Eigen::VectorXd::Zero(spec.n_bases), ctrl);

  AdditiveDesign d_rep;
  d_rep.X.resize(n, 1 + rep.k_nonlinear);
  d_rep.X.col(0) = rep.linear_col;
  d_rep.X.rightCols(rep.k_nonlinear) = rep.nonlinear_cols;
  d_rep.linear_col = {0};
  d_rep.nl_cols = {{1, rep.k_nonlinear}};
  Eigen::VectorXd beta_rep = Eigen::VectorXd::Zero(1 + rep.k_nonlinear);
  m_step_cd(data, d_rep, beta_rep, Eigen::VectorXd::Zero(1 + rep.k_nonlinear), ctrl);

  const Eigen::VectorXd eta_raw = d_raw.X * beta_raw;
  const Eigen::VectorXd eta_rep = d_rep.X * beta_rep;
  CHECK((eta_raw - eta_rep).cwiseAbs().maxCoeff() < 1e-6);
}

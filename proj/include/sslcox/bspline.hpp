#pragma once

#include <Eigen/Core>
#include <vector>

#include "sslcox/errors.hpp"

namespace sslcox {

// Cubic B-spline smooth with knots at evenly spaced quantiles of the
// training values.
struct SplineSpec {
  int n_bases = 10;  // number of basis functions K
  int degree = 3;    // cubic

  void validate() const;
};

// Basis evaluated at the training points, column-centered so that each
// smooth satisfies the zero-mean identifiability constraint, plus the
// exact second-derivative Gram penalty.
struct RawBasis {
  Eigen::MatrixXd basis;         // n x K, centered
  Eigen::MatrixXd penalty;       // K x K, symmetric PSD
  std::vector<double> knots;     // padded knot vector (boundary knots repeated)
  int degree = 3;
  Eigen::VectorXd column_means;  // means subtracted from each column
};

// Result of absorbing the smoothing penalty into the design:
// one unpenalized linear column (unit SD) and K_j nonlinear columns
// scaled so their implied penalty is the identity.
struct ReparamBasis {
  Eigen::VectorXd linear_col;      // n
  Eigen::MatrixXd nonlinear_cols;  // n x K_j
  Eigen::MatrixXd eigenvectors;    // K x K: [u_1..u_Kj | v_lin | v_const]
  Eigen::VectorXd eigenvalues;     // K, descending
  Eigen::VectorXd scale_factors;   // K_j, = 1/sqrt(eigenvalue)
  double linear_sd = 1.0;
  int k_nonlinear = 0;
};

// Everything needed to reproduce the design on new data.
struct SplineTransform {
  std::vector<double> knots;
  int degree = 3;
  Eigen::VectorXd column_means;
  Eigen::VectorXd linear_vec;      // K, rotation for the linear column
  Eigen::MatrixXd nonlinear_vecs;  // K x K_j
  Eigen::VectorXd scale_factors;   // K_j
  double linear_sd = 1.0;

  int k_nonlinear() const { return static_cast<int>(scale_factors.size()); }
  int n_cols() const { return 1 + k_nonlinear(); }
};

RawBasis build_raw_basis(const Eigen::VectorXd& x, const SplineSpec& spec);

ReparamBasis reparameterize(const RawBasis& raw);

SplineTransform make_transform(const RawBasis& raw, const ReparamBasis& rep);

// Evaluates the fitted design at new points: centered by the stored
// training means, rotated, scaled. Points beyond the boundary knots are
// extended linearly.
Eigen::MatrixXd evaluate_transform(const SplineTransform& t, const Eigen::VectorXd& x_new);

inline Eigen::MatrixXd evaluate_basis(const RawBasis& raw, const ReparamBasis& rep,
                                      const Eigen::VectorXd& x_new) {
  return evaluate_transform(make_transform(raw, rep), x_new);
}

// --- low-level pieces, exposed for tests ---

// Padded knot vector with interior knots at evenly spaced quantiles.
std::vector<double> quantile_knots(const Eigen::VectorXd& x, const SplineSpec& spec);

// All K basis values (deriv = 0) or derivative values at t. For deriv = 0,
// t outside the boundary knots is extended linearly from the boundary.
Eigen::VectorXd bspline_row(const std::vector<double>& knots, int degree, double t, int deriv);

// Exact integral of products of second derivatives over the knot range.
Eigen::MatrixXd second_derivative_penalty(const std::vector<double>& knots, int degree);

}  // namespace sslcox

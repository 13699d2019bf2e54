#include "sslcox/bspline.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <set>

namespace sslcox {

namespace {

// index of the span containing t: knots[s] <= t < knots[s+1],
// clamped so the boundary value t = knots[K] lands in the last span
int find_span(const std::vector<double>& knots, int degree, double t) {
  const int n_basis = static_cast<int>(knots.size()) - degree - 1;
  if (t >= knots[n_basis]) return n_basis - 1;
  if (t <= knots[degree]) return degree;
  const auto it = std::upper_bound(knots.begin() + degree, knots.begin() + n_basis + 1, t);
  return static_cast<int>(it - knots.begin()) - 1;
}

// Values and derivatives of the degree+1 basis functions that are nonzero
// on span `span`, up to derivative order `n_ders` (standard triangular
// B-spline recurrence with the derivative back-substitution).
void ders_basis_funs(int span, double t, int degree, int n_ders,
                     const std::vector<double>& knots,
                     Eigen::MatrixXd& ders) {
  const int p = degree;
  Eigen::MatrixXd ndu(p + 1, p + 1);
  Eigen::VectorXd left(p + 1), right(p + 1);
  Eigen::MatrixXd a(2, p + 1);

  ndu(0, 0) = 1.0;
  for (int j = 1; j <= p; ++j) {
    left(j) = t - knots[span + 1 - j];
    right(j) = knots[span + j] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu(j, r) = right(r + 1) + left(j - r);
      const double temp = ndu(r, j - 1) / ndu(j, r);
      ndu(r, j) = saved + right(r + 1) * temp;
      saved = left(j - r) * temp;
    }
    ndu(j, j) = saved;
  }

  ders.setZero(n_ders + 1, p + 1);
  for (int j = 0; j <= p; ++j) ders(0, j) = ndu(j, p);

  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a(0, 0) = 1.0;
    for (int k = 1; k <= n_ders; ++k) {
      double d = 0.0;
      const int rk = r - k;
      const int pk = p - k;
      if (r >= k) {
        a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
        d = a(s2, 0) * ndu(rk, pk);
      }
      const int j1 = (rk >= -1) ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
        d += a(s2, j) * ndu(rk + j, pk);
      }
      if (r <= pk) {
        a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
        d += a(s2, k) * ndu(r, pk);
      }
      ders(k, r) = d;
      std::swap(s1, s2);
    }
  }

  double factor = p;
  for (int k = 1; k <= n_ders; ++k) {
    for (int j = 0; j <= p; ++j) ders(k, j) *= factor;
    factor *= (p - k);
  }
}

Eigen::VectorXd row_at(const std::vector<double>& knots, int degree, double t, int deriv) {
  const int n_basis = static_cast<int>(knots.size()) - degree - 1;
  const int span = find_span(knots, degree, t);
  Eigen::MatrixXd ders;
  ders_basis_funs(span, t, degree, deriv, knots, ders);
  Eigen::VectorXd row = Eigen::VectorXd::Zero(n_basis);
  for (int j = 0; j <= degree; ++j) row(span - degree + j) = ders(deriv, j);
  return row;
}

double sample_sd(const Eigen::VectorXd& v) {
  const int n = static_cast<int>(v.size());
  const double mean = v.mean();
  double ss = 0.0;
  for (int i = 0; i < n; ++i) ss += (v(i) - mean) * (v(i) - mean);
  return std::sqrt(ss / (n - 1));
}

// flip so the largest-magnitude component is positive (deterministic sign)
void canonical_sign(Eigen::Ref<Eigen::VectorXd> v) {
  int imax = 0;
  for (int i = 1; i < v.size(); ++i)
    if (std::abs(v(i)) > std::abs(v(imax))) imax = i;
  if (v(imax) < 0.0) v = -v;
}

}  // namespace

void SplineSpec::validate() const {
  if (n_bases < 4) throw input_error("n_bases must be at least 4");
  if (degree != 3) throw input_error("only cubic splines (degree 3) are supported");
}

std::vector<double> quantile_knots(const Eigen::VectorXd& x, const SplineSpec& spec) {
  spec.validate();
  const int n = static_cast<int>(x.size());
  std::vector<double> sorted(x.data(), x.data() + n);
  std::sort(sorted.begin(), sorted.end());

  auto quantile = [&](double q) {
    const double h = q * (n - 1);
    const int lo = static_cast<int>(std::floor(h));
    const int hi = std::min(lo + 1, n - 1);
    return sorted[lo] + (h - lo) * (sorted[hi] - sorted[lo]);
  };

  const int n_interior = spec.n_bases - spec.degree - 1;
  std::vector<double> breaks;
  breaks.reserve(n_interior + 2);
  for (int i = 0; i <= n_interior + 1; ++i)
    breaks.push_back(quantile(static_cast<double>(i) / (n_interior + 1)));
  for (std::size_t i = 1; i < breaks.size(); ++i)
    if (!(breaks[i] > breaks[i - 1]))
      throw input_error("degenerate predictor: quantile knots are not strictly increasing");

  std::vector<double> knots;
  knots.reserve(breaks.size() + 2 * spec.degree);
  for (int i = 0; i < spec.degree; ++i) knots.push_back(breaks.front());
  knots.insert(knots.end(), breaks.begin(), breaks.end());
  for (int i = 0; i < spec.degree; ++i) knots.push_back(breaks.back());
  return knots;
}

Eigen::VectorXd bspline_row(const std::vector<double>& knots, int degree, double t, int deriv) {
  const double lo = knots[degree];
  const double hi = knots[knots.size() - degree - 1];
  if (deriv == 0 && (t < lo || t > hi)) {
    // linear extension beyond the boundary knots
    const double b = (t < lo) ? lo : hi;
    return row_at(knots, degree, b, 0) + (t - b) * row_at(knots, degree, b, 1);
  }
  return row_at(knots, degree, std::clamp(t, lo, hi), deriv);
}

Eigen::MatrixXd second_derivative_penalty(const std::vector<double>& knots, int degree) {
  const int n_basis = static_cast<int>(knots.size()) - degree - 1;
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n_basis, n_basis);
  // second derivatives of cubic B-splines are piecewise linear, so 2-point
  // Gauss-Legendre per span integrates their products exactly
  const double gauss_offset = 0.5 / std::sqrt(3.0);
  for (int s = degree; s < n_basis; ++s) {
    const double a = knots[s], b = knots[s + 1];
    if (!(b > a)) continue;
    const double w = b - a;
    const double mid = 0.5 * (a + b);
    for (const double node : {mid - gauss_offset * w, mid + gauss_offset * w}) {
      const Eigen::VectorXd d2 = row_at(knots, degree, node, 2);
      S.selfadjointView<Eigen::Lower>().rankUpdate(d2, 0.5 * w);
    }
  }
  S.triangularView<Eigen::StrictlyUpper>() = S.transpose();
  return S;
}

RawBasis build_raw_basis(const Eigen::VectorXd& x, const SplineSpec& spec) {
  spec.validate();
  const int n = static_cast<int>(x.size());
  if (!x.allFinite()) throw input_error("predictor contains non-finite values");
  if (n < spec.n_bases + 2)
    throw input_error("need at least n_bases + 2 observations to build a spline basis");
  std::set<double> distinct(x.data(), x.data() + n);
  if (static_cast<int>(distinct.size()) < spec.n_bases)
    throw input_error("degenerate predictor: fewer distinct values than basis functions");

  RawBasis raw;
  raw.degree = spec.degree;
  raw.knots = quantile_knots(x, spec);
  raw.basis.resize(n, spec.n_bases);
  for (int i = 0; i < n; ++i)
    raw.basis.row(i) = bspline_row(raw.knots, spec.degree, x(i), 0).transpose();
  raw.penalty = second_derivative_penalty(raw.knots, spec.degree);
  raw.column_means = raw.basis.colwise().mean();
  raw.basis.rowwise() -= raw.column_means.transpose();
  return raw;
}

ReparamBasis reparameterize(const RawBasis& raw) {
  const int K = static_cast<int>(raw.penalty.rows());
  Eigen::MatrixXd S = 0.5 * (raw.penalty + raw.penalty.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success)
    throw numerical_error("penalty eigendecomposition failed");

  // reorder descending
  Eigen::VectorXd evals(K);
  Eigen::MatrixXd evecs(K, K);
  for (int i = 0; i < K; ++i) {
    evals(i) = es.eigenvalues()(K - 1 - i);
    evecs.col(i) = es.eigenvectors().col(K - 1 - i);
  }

  const double lam_max = evals(0);
  if (!(lam_max > 0.0)) throw numerical_error("penalty matrix has no positive eigenvalues");
  const double tol = 1e-10 * lam_max;
  int n_zero = 0;
  for (int i = K - 1; i >= 0 && evals(i) <= tol; --i) ++n_zero;
  if (n_zero == 0)
    throw numerical_error("penalty null space is empty; no linear direction exists");

  // Null-space directions whose centered design image vanishes were
  // absorbed by the zero-mean constraint (the constant); exactly one
  // direction with a nonzero image may remain, and it becomes the linear
  // column. The split is read off an SVD of the image block.
  const Eigen::MatrixXd null_block = evecs.rightCols(n_zero);
  const Eigen::MatrixXd image = raw.basis * null_block;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(image, Eigen::ComputeThinV);
  const double smax = svd.singularValues()(0);
  const double image_scale = std::max(1.0, raw.basis.cwiseAbs().maxCoeff());
  int live = 0;
  for (int k = 0; k < svd.singularValues().size(); ++k)
    if (svd.singularValues()(k) > 1e-7 * std::max(smax, image_scale)) ++live;
  if (live != 1)
    throw numerical_error("penalty null space keeps dimension " + std::to_string(live) +
                          " after centering; expected exactly 1 linear direction");

  Eigen::VectorXd v_lin = null_block * svd.matrixV().col(0);
  v_lin.normalize();
  canonical_sign(v_lin);

  ReparamBasis rep;
  rep.k_nonlinear = K - n_zero;
  rep.eigenvalues = evals;
  rep.eigenvectors.resize(K, K);
  rep.scale_factors.resize(rep.k_nonlinear);
  rep.nonlinear_cols.resize(raw.basis.rows(), rep.k_nonlinear);
  for (int k = 0; k < rep.k_nonlinear; ++k) {
    Eigen::VectorXd u = evecs.col(k);
    canonical_sign(u);
    rep.eigenvectors.col(k) = u;
    rep.scale_factors(k) = 1.0 / std::sqrt(evals(k));
    rep.nonlinear_cols.col(k) = raw.basis * u * rep.scale_factors(k);
  }
  rep.eigenvectors.col(rep.k_nonlinear) = v_lin;
  // remaining null directions (the centering-removed ones), orthonormal
  for (int k = 1; k < n_zero; ++k) {
    Eigen::VectorXd v = null_block * svd.matrixV().col(k);
    v.normalize();
    canonical_sign(v);
    rep.eigenvectors.col(rep.k_nonlinear + k) = v;
  }

  Eigen::VectorXd lin_raw = raw.basis * v_lin;
  rep.linear_sd = sample_sd(lin_raw);
  if (!(rep.linear_sd > 0.0))
    throw numerical_error("degenerate linear column after reparameterization");
  rep.linear_col = lin_raw / rep.linear_sd;
  return rep;
}

SplineTransform make_transform(const RawBasis& raw, const ReparamBasis& rep) {
  SplineTransform t;
  t.knots = raw.knots;
  t.degree = raw.degree;
  t.column_means = raw.column_means;
  t.linear_vec = rep.eigenvectors.col(rep.k_nonlinear);
  t.nonlinear_vecs = rep.eigenvectors.leftCols(rep.k_nonlinear);
  t.scale_factors = rep.scale_factors;
  t.linear_sd = rep.linear_sd;
  return t;
}

Eigen::MatrixXd evaluate_transform(const SplineTransform& t, const Eigen::VectorXd& x_new) {
  if (!x_new.allFinite()) throw input_error("prediction points contain non-finite values");
  const int m = static_cast<int>(x_new.size());
  const int kj = t.k_nonlinear();
  Eigen::MatrixXd out(m, 1 + kj);
  for (int i = 0; i < m; ++i) {
    Eigen::VectorXd b = bspline_row(t.knots, t.degree, x_new(i), 0) - t.column_means;
    out(i, 0) = b.dot(t.linear_vec) / t.linear_sd;
    for (int k = 0; k < kj; ++k)
      out(i, 1 + k) = b.dot(t.nonlinear_vecs.col(k)) * t.scale_factors(k);
  }
  return out;
}

}  // namespace sslcox

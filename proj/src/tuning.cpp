#include "sslcox/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sslcox/rng.hpp"

namespace sslcox {

void PathSpec::validate(int n_events) const {
  if (s0_grid.empty()) throw input_error("s0 grid is empty");
  for (std::size_t i = 0; i < s0_grid.size(); ++i) {
    if (!(s0_grid[i] > 0.0 && s0_grid[i] < s1))
      throw input_error("s0 grid values must lie in (0, s1)");
    if (i > 0 && !(s0_grid[i] < s0_grid[i - 1]))
      throw input_error("s0 grid must be strictly decreasing");
  }
  if (n_folds < 2) throw input_error("need at least 2 folds");
  if (n_folds > n_events)
    throw input_error("more folds than events; reduce --folds");
}

std::vector<double> default_s0_grid(int n_points) {
  if (n_points < 2) throw input_error("s0 grid needs at least 2 points");
  const double hi = 0.1, lo = 0.005;
  std::vector<double> grid(n_points);
  const double ratio = std::pow(lo / hi, 1.0 / (n_points - 1));
  double v = hi;
  for (int i = 0; i < n_points; ++i) {
    grid[i] = v;
    v *= ratio;
  }
  grid.back() = lo;
  return grid;
}

namespace {

std::vector<int> try_split(int n, int n_folds, Rng& rng, const Eigen::VectorXi& status) {
  std::vector<int> events, censored;
  for (int i = 0; i < n; ++i)
    (status(i) == 1 ? events : censored).push_back(i);

  auto shuffle = [&](std::vector<int>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i)
      std::swap(v[i], v[rng.below(i + 1)]);
  };
  shuffle(events);
  shuffle(censored);

  std::vector<int> fold(n, -1);
  int at = 0;
  for (int i : events) fold[i] = at++ % n_folds;
  for (int i : censored) fold[i] = at++ % n_folds;
  return fold;
}

}  // namespace

std::vector<int> kfold_split(int n, int n_folds, std::uint64_t seed,
                             const Eigen::VectorXi& status) {
  if (n_folds < 2 || n_folds > n) throw input_error("invalid fold count");
  Rng rng(derive_seed(seed, 0x666f6c64));  // "fold"
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::vector<int> fold = try_split(n, n_folds, rng, status);
    std::vector<int> fold_events(n_folds, 0);
    for (int i = 0; i < n; ++i)
      if (status(i) == 1) ++fold_events[fold[i]];
    if (std::all_of(fold_events.begin(), fold_events.end(), [](int e) { return e > 0; }))
      return fold;
  }
  throw tuning_error("could not stratify folds: a fold has no events");
}

namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

double se_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (v.size() - 1) / v.size());
}

}  // namespace

CvResult cv_path(const SurvivalData& data, const SplineSpec& sspec, const PathSpec& pspec,
                 const PriorConfig& prior_template, const FitControl& control) {
  validate_survival(data);
  if (data.n_events() < 1) throw input_error("dataset has no events");
  pspec.validate(data.n_events());

  PriorConfig prior = prior_template;
  prior.s1 = pspec.s1;

  CvResult res;
  res.folds = kfold_split(data.n(), pspec.n_folds, pspec.seed, data.status);

  const int n_points = static_cast<int>(pspec.s0_grid.size());
  res.table.resize(n_points);
  for (int g = 0; g < n_points; ++g) res.table[g].s0 = pspec.s0_grid[g];

  for (int f = 0; f < pspec.n_folds; ++f) {
    std::vector<int> train_idx, test_idx;
    for (int i = 0; i < data.n(); ++i)
      (res.folds[i] == f ? test_idx : train_idx).push_back(i);
    const SurvivalData train = data.subset(train_idx);
    const SurvivalData test = data.subset(test_idx);

    AdditiveBases bases = build_additive_bases(train.covariates, sspec);
    const auto path = fit_path(train, bases.design, pspec.s0_grid, prior, control);

    const Eigen::MatrixXd design_eval =
        pspec.metric == CvMetric::deviance
            ? evaluate_design(bases.transforms, data.covariates)
            : evaluate_design(bases.transforms, test.covariates);

    for (int g = 0; g < n_points; ++g) {
      const FitResult& fr = path[g].fit;
      double value;
      if (pspec.metric == CvMetric::deviance) {
        // Verweij-van Houwelingen out-of-fold deviance
        const double pl_all = partial_loglik(data, design_eval * fr.beta);
        const double pl_train = partial_loglik(train, bases.design.X * fr.beta);
        value = -2.0 * (pl_all - pl_train);
      } else {
        value = c_index(test, design_eval * fr.beta);
      }
      res.table[g].fold_values.push_back(value);
      if (fr.converged) ++res.table[g].n_converged;
    }
  }

  int best = -1;
  for (int g = 0; g < n_points; ++g) {
    CvCell& cell = res.table[g];
    cell.mean = mean_of(cell.fold_values);
    cell.se = se_of(cell.fold_values, cell.mean);
    if (cell.n_converged == 0) {
      cell.excluded = true;
      res.warnings.push_back("s0=" + std::to_string(cell.s0) +
                             " excluded: no fold converged");
      continue;
    }
    if (best < 0) {
      best = g;
      continue;
    }
    // grid runs largest s0 first, so strict improvement keeps ties sparse
    const bool better = pspec.metric == CvMetric::deviance
                            ? cell.mean < res.table[best].mean
                            : cell.mean > res.table[best].mean;
    if (better) best = g;
  }
  if (best < 0) throw tuning_error("every s0 grid point was excluded; tuning failed");
  res.best_s0 = res.table[best].s0;

  // refit on the full data, warm-started down the same path
  AdditiveBases full = build_additive_bases(data.covariates, sspec);
  std::vector<double> prefix(pspec.s0_grid.begin(), pspec.s0_grid.begin() + best + 1);
  auto full_path = fit_path(data, full.design, prefix, prior, control);
  res.best_fit = std::move(full_path.back().fit);
  res.transforms = std::move(full.transforms);
  res.design = std::move(full.design);
  return res;
}

std::vector<int> variance_filter(const Eigen::MatrixXd& covariates, int k) {
  const int p = static_cast<int>(covariates.cols());
  const int n = static_cast<int>(covariates.rows());
  if (k < 1) throw input_error("top-k must be positive");
  std::vector<double> var(p, 0.0);
  for (int j = 0; j < p; ++j) {
    const double mean = covariates.col(j).mean();
    var[j] = (covariates.col(j).array() - mean).square().sum() / std::max(1, n - 1);
  }
  std::vector<int> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return var[a] > var[b]; });
  order.resize(std::min(k, p));
  return order;
}

}  // namespace sslcox

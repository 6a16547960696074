#pragma once

// Penalty selection: K-fold cross-validation over a (lambda, gamma) grid
// with inadmissible points masked out, plus the default grid construction.
//
// The CV loss of a grid point is the mean, over folds, of the entrywise l1
// distance between the estimate fitted on the held-in rows and the sample
// covariance of the held-out rows (each side centered by its own mean).
// Comparisons always happen on the covariance scale whatever the variant.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "jpen/errors.hpp"
#include "jpen/estimators.hpp"
#include "jpen/matrix.hpp"
#include "jpen/penalty.hpp"
#include "jpen/rng.hpp"

namespace jpen {

enum class CvVariant {
  jpen_correlation,
  jpen_direct,
  jpen_weighted,
  baseline_soft,    // lambda only; the gamma axis is inert
  baseline_shrink,  // gamma only; the lambda axis is inert
};

inline const char* cv_variant_name(CvVariant v) {
  switch (v) {
    case CvVariant::jpen_correlation: return "jpen-correlation";
    case CvVariant::jpen_direct: return "jpen-direct";
    case CvVariant::jpen_weighted: return "jpen-weighted";
    case CvVariant::baseline_soft: return "baseline-soft";
    case CvVariant::baseline_shrink: return "baseline-shrink";
  }
  return "unknown";
}

struct CvPlan {
  int folds = 5;
  std::vector<double> lambda_grid;
  std::vector<double> gamma_grid;
  std::uint64_t seed = 0;
};

struct CvResult {
  double lambda = 0.0;
  double gamma = 0.0;
  double loss = 0.0;
  // Row-major over (lambda index, gamma index).  Masked points carry NaN.
  std::vector<double> loss_surface;
  std::vector<std::uint8_t> admissible;
  CvPlan plan;
  CvVariant variant = CvVariant::jpen_correlation;
};

namespace detail {

inline void check_grid(const std::vector<double>& g, const char* name) {
  if (g.empty())
    throw ParameterError(std::string("CvPlan: ") + name + " grid is empty");
  double prev = 0.0;
  for (double v : g) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw ParameterError(std::string("CvPlan: ") + name +
                           " grid entries must be positive and finite");
    if (!(v > prev))
      throw ParameterError(std::string("CvPlan: ") + name +
                           " grid must be strictly ascending");
    prev = v;
  }
}

inline void check_plan(const CvPlan& plan) {
  if (plan.folds < 2)
    throw ParameterError("CvPlan: need at least 2 folds, got " +
                         std::to_string(plan.folds));
  check_grid(plan.lambda_grid, "lambda");
  check_grid(plan.gamma_grid, "gamma");
}

// Log-spaced grid with both endpoints exact.
inline std::vector<double> geomspace(double lo, double hi, int points) {
  if (!(lo > 0.0) || !(hi > lo))
    throw ParameterError("geomspace: need 0 < lo < hi");
  if (points < 2) throw ParameterError("geomspace: need at least 2 points");
  std::vector<double> g(points);
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < points; ++i)
    g[i] = std::exp(llo + (lhi - llo) * i / (points - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

}  // namespace detail

// Seeded shuffle of 0..n-1 cut into `folds` near-equal contiguous slices;
// the first n%folds folds get the extra row.
inline std::vector<std::vector<int>> make_folds(int n, int folds,
                                                std::uint64_t seed) {
  if (folds < 2) throw ParameterError("make_folds: need at least 2 folds");
  if (n < 2 * folds)
    throw ValidationError("make_folds: need n >= 2*folds so every fold has "
                          "at least 2 rows, got n=" + std::to_string(n) +
                          ", folds=" + std::to_string(folds));
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  rng.shuffle(idx);
  std::vector<std::vector<int>> out(folds);
  const int base = n / folds;
  const int extra = n % folds;
  int at = 0;
  for (int f = 0; f < folds; ++f) {
    const int size = base + (f < extra ? 1 : 0);
    out[f].assign(idx.begin() + at, idx.begin() + at + size);
    at += size;
  }
  return out;
}

// Cross-validated selection of (lambda, gamma).  Grid points failing the
// admissibility test (built from the full-sample base matrix) are skipped;
// ties in loss break toward larger lambda, then larger gamma.  Throws
// ExhaustedGridError when the mask removes everything.
inline CvResult cv_select(const DataMatrix& data, const CvPlan& plan,
                          CvVariant variant) {
  detail::check_plan(plan);
  const int n = data.n();
  const auto folds = make_folds(n, plan.folds, plan.seed);

  // Admissibility mask from the full sample.
  const SymMatrix s_full = sample_covariance(data);
  const bool jpen_variant = variant == CvVariant::jpen_correlation ||
                            variant == CvVariant::jpen_direct ||
                            variant == CvVariant::jpen_weighted;
  PenaltyRegion region = variant == CvVariant::jpen_direct
                             ? PenaltyRegion::for_covariance(s_full)
                             : PenaltyRegion::for_correlation(
                                   to_correlation(s_full).k);

  const int nl = static_cast<int>(plan.lambda_grid.size());
  const int ng = static_cast<int>(plan.gamma_grid.size());
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(nl) * ng, 1);
  if (jpen_variant)
    for (int a = 0; a < nl; ++a)
      for (int b = 0; b < ng; ++b)
        mask[static_cast<std::size_t>(a) * ng + b] =
            is_admissible(region, plan.lambda_grid[a], plan.gamma_grid[b])
                ? 1
                : 0;

  // Per-fold train/holdout covariances (and weights where needed), computed
  // once and reused across the grid.
  struct FoldData {
    SymMatrix s_train;
    SymMatrix s_holdout;
    std::vector<double> weights;  // weighted variant only
  };
  std::vector<FoldData> fold_data;
  fold_data.reserve(folds.size());
  for (const auto& holdout : folds) {
    std::vector<int> train;
    train.reserve(n - holdout.size());
    std::vector<bool> held(n, false);
    for (int r : holdout) held[r] = true;
    for (int r = 0; r < n; ++r)
      if (!held[r]) train.push_back(r);
    FoldData fd{sample_covariance(data.subset(train)),
                sample_covariance(data.subset(holdout)),
                {}};
    if (variant == CvVariant::jpen_weighted)
      fd.weights = choose_weights(fd.s_train);
    fold_data.push_back(std::move(fd));
  }

  auto fit = [&](const FoldData& fd, double lambda,
                 double gamma) -> SymMatrix {
    EstimatorConfig cfg{lambda, gamma, {}};
    switch (variant) {
      case CvVariant::jpen_correlation:
        return jpen_covariance_from_correlation(fd.s_train, cfg, false).matrix;
      case CvVariant::jpen_direct:
        return jpen_covariance_direct(fd.s_train, cfg, false).matrix;
      case CvVariant::jpen_weighted:
        cfg.weights = fd.weights;
        return jpen_covariance_weighted(fd.s_train, cfg, false).matrix;
      case CvVariant::baseline_soft:
        return baseline_soft_threshold(fd.s_train, lambda);
      case CvVariant::baseline_shrink:
        return baseline_eigen_shrink(fd.s_train, gamma);
    }
    throw Error("cv_select: unreachable variant");
  };

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> surface(static_cast<std::size_t>(nl) * ng, nan);
  // Baselines depend on only one axis; cache by the live index.
  std::vector<double> lambda_only(nl, nan), gamma_only(ng, nan);

  CvResult result;
  result.plan = plan;
  result.variant = variant;
  bool found = false;
  double best = std::numeric_limits<double>::infinity();
  int best_a = -1, best_b = -1;

  for (int a = 0; a < nl; ++a) {
    for (int b = 0; b < ng; ++b) {
      const std::size_t at = static_cast<std::size_t>(a) * ng + b;
      if (!mask[at]) continue;
      double loss;
      if (variant == CvVariant::baseline_soft && !std::isnan(lambda_only[a])) {
        loss = lambda_only[a];
      } else if (variant == CvVariant::baseline_shrink &&
                 !std::isnan(gamma_only[b])) {
        loss = gamma_only[b];
      } else {
        double total = 0.0;
        for (const auto& fd : fold_data)
          total += l1_norm(difference(
              fit(fd, plan.lambda_grid[a], plan.gamma_grid[b]), fd.s_holdout));
        loss = total / static_cast<double>(fold_data.size());
        if (variant == CvVariant::baseline_soft) lambda_only[a] = loss;
        if (variant == CvVariant::baseline_shrink) gamma_only[b] = loss;
      }
      surface[at] = loss;
      // <= plus ascending iteration = ties resolve to the largest lambda,
      // then the largest gamma.
      if (!found || loss <= best) {
        found = true;
        best = loss;
        best_a = a;
        best_b = b;
      }
    }
  }

  if (!found)
    throw ExhaustedGridError(
        "cv_select: no admissible (lambda, gamma) grid point; widen the "
        "gamma range upward and retry");

  result.lambda = plan.lambda_grid[best_a];
  result.gamma = plan.gamma_grid[best_b];
  result.loss = best;
  result.loss_surface = std::move(surface);
  result.admissible = std::move(mask);
  return result;
}

// Default grid anchored at g = sqrt(log(p)/n): gamma log-spaced over
// [g/10, 10g], lambda log-spaced up to just inside the exact admissible
// boundary at the largest gamma (where the admissible interval is widest).
inline CvPlan default_grid_for_region(const PenaltyRegion& region, int p,
                                      int n, int points,
                                      std::uint64_t seed = 0) {
  if (p < 2) throw ParameterError("default_grid: need p >= 2");
  if (n < 1) throw ParameterError("default_grid: need n >= 1");
  if (points < 2) throw ParameterError("default_grid: need points >= 2");
  const double g = std::sqrt(std::log(static_cast<double>(p)) / n);
  CvPlan plan;
  plan.seed = seed;
  plan.gamma_grid = detail::geomspace(0.1 * g, 10.0 * g, points);
  const double hi = admissible_lambda_upper(region, plan.gamma_grid.back());
  if (!(hi > 0.0))
    throw ExhaustedGridError(
        "default_grid: no positive lambda is admissible even at the largest "
        "gamma; the base matrix is too far from positive definite");
  plan.lambda_grid = detail::geomspace(0.02 * hi, 0.98 * hi, points);
  return plan;
}

inline CvPlan default_grid(const SymMatrix& k, int n, int points,
                           std::uint64_t seed = 0) {
  const int p = k.dim();
  return default_grid_for_region(PenaltyRegion::for_correlation(k), p, n,
                                 points, seed);
}

}  // namespace jpen

#pragma once

// Joint-penalty (JPEN) estimators.  Each variant minimizes a Frobenius
// fidelity term plus an l1 penalty on off-diagonal entries (sparsity) and a
// penalty on the variance of the eigenvalues (conditioning), under a trace
// constraint.  All of them reduce to one closed-form kernel: soft-threshold
// the off-diagonal entries at lambda/2, damp by 1/(1+gamma), and pull each
// diagonal entry toward the mean diagonal t by the same damping.
//
// Exactness contracts worth knowing about:
//  * correlation estimates have unit diagonal, so their trace is exactly p;
//  * covariance estimates conserve trace(S) exactly: when gamma > 0 the last
//    diagonal slot is assigned as (target trace) - (sum of the others),
//    which is the same algebra arranged so floating point cannot drift;
//  * at gamma == 0 the diagonal is copied verbatim and at lambda == 0 no
//    thresholding happens, so the boundary reductions are bitwise.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "jpen/errors.hpp"
#include "jpen/matrix.hpp"
#include "jpen/penalty.hpp"

namespace jpen {

struct EstimatorConfig {
  double lambda = 0.0;
  double gamma = 0.0;
  // Eigenvalue weights for the weighted variant; empty means "derive from
  // the data with choose_weights".  Must be positive and sum to 1.
  std::vector<double> weights;
};

enum class Variant {
  correlation,             // threshold/shrink the correlation, scale back
  direct,                  // threshold/shrink the covariance itself
  weighted,                // weighted eigenvalue shrinkage on the correlation
  precision_correlation,   // invert the correlation pilot, re-estimate
  precision_direct,        // invert the covariance pilot, re-estimate
};

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::correlation: return "correlation";
    case Variant::direct: return "direct";
    case Variant::weighted: return "weighted";
    case Variant::precision_correlation: return "precision-correlation";
    case Variant::precision_direct: return "precision-direct";
  }
  return "unknown";
}

struct CovarianceEstimate {
  SymMatrix matrix;
  EstimatorConfig config;
  Variant variant;
  // True only when lambda and gamma are both strictly positive and the pair
  // passed the penalty-region test for this variant's base matrix.
  bool admissible = false;
};

struct PrecisionEstimate {
  SymMatrix matrix;
  EstimatorConfig config;
  Variant variant;
  bool admissible = false;
};

namespace detail {

inline void check_config(const EstimatorConfig& cfg) {
  if (!(cfg.lambda >= 0.0) || !std::isfinite(cfg.lambda))
    throw ParameterError("estimator: lambda must be >= 0, got " +
                         std::to_string(cfg.lambda));
  if (!(cfg.gamma >= 0.0) || !std::isfinite(cfg.gamma))
    throw ParameterError("estimator: gamma must be >= 0, got " +
                         std::to_string(cfg.gamma));
}

inline void check_weights(const std::vector<double>& w, int p) {
  if (static_cast<int>(w.size()) != p)
    throw DimensionError("weights: expected " + std::to_string(p) +
                         " entries, got " + std::to_string(w.size()));
  double sum = 0.0;
  for (double v : w) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw ParameterError("weights: entries must be positive and finite");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-8)
    throw ParameterError("weights: must sum to 1, got " + std::to_string(sum));
}

// Shared closed-form kernel.  Off-diagonal:
//   sign(b_ij) * max(|b_ij| - lambda/2, 0) / (1 + gamma)
// Diagonal: (b_ii + gamma * t) / (1 + gamma); for gamma > 0 the last entry
// is nudged (by at most a few ulps) so the left-to-right diagonal sum equals
// trace(base) bit-for-bit.
inline SymMatrix threshold_shrink(const SymMatrix& base, double lambda,
                                  double gamma, double t) {
  const int p = base.dim();
  const double damp = 1.0 + gamma;
  const double half = 0.5 * lambda;
  SymMatrix out(p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < i; ++j) {
      const double v = base(i, j);
      const double mag = std::abs(v) - half;
      out.set(i, j, mag > 0.0 ? (v > 0.0 ? mag : -mag) / damp : 0.0);
    }
  if (gamma == 0.0) {
    for (int i = 0; i < p; ++i) out.set(i, i, base(i, i));
    return out;
  }
  const double target = base.trace();
  for (int i = 0; i < p; ++i)
    out.set(i, i, (base(i, i) + gamma * t) / damp);
  if (p == 1) {
    out.set(0, 0, target);
    return out;
  }
  // Exact conservation: walk the last entry along the double grid until the
  // left-to-right diagonal sum hits the target bit-for-bit.  When the prefix
  // sum carries a bit one place below the total's ulp, every exact sum is a
  // round-to-even midpoint and the sweep reaches only every other
  // representable total, so an odd-mantissa target is unreachable from that
  // prefix.  A skip is detected as a sign crossing without equality; nudging
  // the penultimate entry one ulp clears the offending prefix bit, after
  // which the sweep lands on exact grid points and must hit.
  const double inf = std::numeric_limits<double>::infinity();
  const auto prefix = [&] {
    double a = 0.0;
    for (int i = 0; i + 1 < p; ++i) a += out(i, i);
    return a;
  };
  for (int attempt = 0; attempt < 64; ++attempt) {
    const double partial = prefix();
    double last = target - partial;
    for (int k = 0; k < 128; ++k) {
      const double total = partial + last;
      if (total == target) {
        out.set(p - 1, p - 1, last);
        return out;
      }
      const double stepped = std::nextafter(last, total < target ? inf : -inf);
      const double moved = partial + stepped;
      if ((moved < target) != (total < target) && moved != target) break;
      last = stepped;
    }
    out.set(p - 2, p - 2, std::nextafter(out(p - 2, p - 2), inf));
  }
  out.set(p - 1, p - 1, target - prefix());
  return out;
}

// Covariance back-scaling of a correlation-scale estimate: off-diagonal
// entries get scale_i * scale_j; diagonal entries multiply S_ii directly by
// R_ii so a unit R_ii reproduces S_ii exactly.
inline SymMatrix scale_to_covariance(const SymMatrix& r,
                                     const std::vector<double>& scale,
                                     const SymMatrix& s) {
  const int p = r.dim();
  SymMatrix out(p);
  for (int i = 0; i < p; ++i) {
    out.set(i, i, s(i, i) * r(i, i));
    for (int j = 0; j < i; ++j) out.set(i, j, scale[i] * scale[j] * r(i, j));
  }
  return out;
}

// Precision back-scaling: divides instead of multiplies.
inline SymMatrix scale_to_precision(const SymMatrix& z,
                                    const std::vector<double>& scale,
                                    const SymMatrix& s) {
  const int p = z.dim();
  SymMatrix out(p);
  for (int i = 0; i < p; ++i) {
    out.set(i, i, z(i, i) / s(i, i));
    for (int j = 0; j < i; ++j) out.set(i, j, z(i, j) / (scale[i] * scale[j]));
  }
  return out;
}

inline bool admissible_flag(const PenaltyRegion& region,
                            const EstimatorConfig& cfg) {
  if (!(cfg.lambda > 0.0) || !(cfg.gamma > 0.0)) return false;
  return is_admissible(region, cfg.lambda, cfg.gamma);
}

}  // namespace detail

// ---- correlation scale ------------------------------------------------

// Closed-form minimizer over correlation-like matrices with unit diagonal:
// off-diagonal soft-threshold at lambda/2 damped by 1/(1+gamma), diagonal
// (K_ii + gamma) / (1 + gamma), which is exactly 1 when K_ii == 1, so the
// trace-p constraint holds by construction.
inline SymMatrix jpen_correlation(const SymMatrix& k,
                                  const EstimatorConfig& cfg) {
  detail::check_config(cfg);
  const int p = k.dim();
  for (int i = 0; i < p; ++i)
    if (std::abs(k(i, i) - 1.0) > 1e-10)
      throw ValidationError("jpen_correlation: not a correlation matrix "
                            "(diagonal entry " + std::to_string(i) + " is " +
                            std::to_string(k(i, i)) + ", expected 1)");
  const double damp = 1.0 + cfg.gamma;
  const double half = 0.5 * cfg.lambda;
  SymMatrix out(p);
  for (int i = 0; i < p; ++i) {
    out.set(i, i, (k(i, i) + cfg.gamma) / damp);
    for (int j = 0; j < i; ++j) {
      const double v = k(i, j);
      const double mag = std::abs(v) - half;
      out.set(i, j, mag > 0.0 ? (v > 0.0 ? mag : -mag) / damp : 0.0);
    }
  }
  return out;
}

// Data-driven eigenvalue weights: sort the diagonal of S ascending into e,
// keep e_i below 1 as-is and replace entries at or above 1 by their
// reciprocal, then normalize to sum 1.  Small weights end up on the
// best-conditioned directions.  Returned in ascending-diagonal order.
inline std::vector<double> choose_weights(const SymMatrix& s) {
  const int p = s.dim();
  std::vector<double> e(p);
  for (int i = 0; i < p; ++i) {
    e[i] = s(i, i);
    if (!(e[i] > 0.0))
      throw DegenerateVarianceError(
          "choose_weights: variance at index " + std::to_string(i) +
              " is not positive",
          i);
  }
  std::sort(e.begin(), e.end());
  int k = -1;
  for (int i = 0; i < p; ++i)
    if (e[i] < 1.0) k = i;
  std::vector<double> w(p);
  double sum = 0.0;
  for (int i = 0; i < p; ++i) {
    w[i] = (i <= k) ? e[i] : 1.0 / e[i];
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

// Weighted variant: soft-threshold the off-diagonal, then shrink the
// eigenvalues kappa_i -> (kappa_i + gamma*a_i) / (1 + gamma*a_i) with the
// weights sorted ascending against the descending eigenvalues (small weight
// on large eigenvalue), and finally rescale the spectrum multiplicatively so
// the trace returns to p.  At gamma == 0 the eigen step is the identity and
// is skipped, making the reduction to the plain soft-threshold bitwise.
inline SymMatrix jpen_weighted_correlation(const SymMatrix& k,
                                           const EstimatorConfig& cfg) {
  detail::check_config(cfg);
  const int p = k.dim();
  for (int i = 0; i < p; ++i)
    if (std::abs(k(i, i) - 1.0) > 1e-10)
      throw ValidationError(
          "jpen_weighted_correlation: not a correlation matrix");
  std::vector<double> w = cfg.weights;
  detail::check_weights(w, p);
  SymMatrix thresholded = soft_threshold_offdiag(k, 0.5 * cfg.lambda);
  if (cfg.gamma == 0.0) return thresholded;

  std::sort(w.begin(), w.end());  // ascending, to pair with descending kappa
  EigenDecomposition dec = eigen_decomposition(thresholded);
  Eigen::VectorXd d(p);
  double sum = 0.0;
  for (int i = 0; i < p; ++i) {
    d(i) = (dec.values[i] + cfg.gamma * w[i]) / (1.0 + cfg.gamma * w[i]);
    sum += d(i);
  }
  if (!(sum > 0.0))
    throw NumericalError(
        "jpen_weighted_correlation: shrunk spectrum has non-positive trace");
  d *= static_cast<double>(p) / sum;
  Eigen::MatrixXd rebuilt =
      dec.vectors * d.asDiagonal() * dec.vectors.transpose();
  SymMatrix out(p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j <= i; ++j) out.set(i, j, rebuilt(i, j));
  return out;
}

// ---- covariance scale ---------------------------------------------------

// Estimate the correlation, then scale back to covariance units.  The
// diagonal of S is reproduced exactly (R_ii == 1), so trace is conserved.
inline CovarianceEstimate jpen_covariance_from_correlation(
    const SymMatrix& s, const EstimatorConfig& cfg,
    bool with_admissibility = true) {
  Correlation corr = to_correlation(s);
  SymMatrix r = jpen_correlation(corr.k, cfg);
  CovarianceEstimate est{detail::scale_to_covariance(r, corr.scale, s), cfg,
                         Variant::correlation, false};
  if (with_admissibility)
    est.admissible = detail::admissible_flag(
        PenaltyRegion::for_correlation(std::move(corr.k)), cfg);
  return est;
}

// Threshold/shrink the covariance itself; t is the mean diagonal, and
// trace(S) is conserved exactly.
inline CovarianceEstimate jpen_covariance_direct(const SymMatrix& s,
                                                 const EstimatorConfig& cfg,
                                                 bool with_admissibility = true) {
  detail::check_config(cfg);
  const double t = s.trace() / s.dim();
  CovarianceEstimate est{detail::threshold_shrink(s, cfg.lambda, cfg.gamma, t),
                         cfg, Variant::direct, false};
  if (with_admissibility)
    est.admissible =
        detail::admissible_flag(PenaltyRegion::for_covariance(s), cfg);
  return est;
}

// Weighted estimate on the correlation scale, scaled back to covariance
// units.  Weights default to choose_weights(S) when the config leaves them
// empty.
inline CovarianceEstimate jpen_covariance_weighted(
    const SymMatrix& s, const EstimatorConfig& cfg,
    bool with_admissibility = true) {
  detail::check_config(cfg);
  EstimatorConfig used = cfg;
  if (used.weights.empty()) used.weights = choose_weights(s);
  Correlation corr = to_correlation(s);
  SymMatrix r = jpen_weighted_correlation(corr.k, used);
  CovarianceEstimate est{detail::scale_to_covariance(r, corr.scale, s), used,
                         Variant::weighted, false};
  if (with_admissibility)
    est.admissible = detail::admissible_flag(
        PenaltyRegion::for_correlation(std::move(corr.k)), used);
  return est;
}

// ---- precision scale ------------------------------------------------------

// Threshold/shrink an inverted pilot M; t is the mean diagonal of M and
// trace(M) is conserved exactly.  Same kernel as the covariance estimators,
// exposed separately because callers hold M, not data.
inline SymMatrix jpen_inverse_correlation(const SymMatrix& m,
                                          const EstimatorConfig& cfg) {
  detail::check_config(cfg);
  const double t = m.trace() / m.dim();
  return detail::threshold_shrink(m, cfg.lambda, cfg.gamma, t);
}

// Two-stage pipeline on the correlation scale: fit a correlation pilot with
// cov_cfg, invert it, threshold/shrink the inverse with prec_cfg, then scale
// back to precision units (dividing by the scales).
inline PrecisionEstimate jpen_precision_from_correlation(
    const SymMatrix& s, const EstimatorConfig& cov_cfg,
    const EstimatorConfig& prec_cfg, bool with_admissibility = true) {
  detail::check_config(prec_cfg);
  Correlation corr = to_correlation(s);
  SymMatrix r = jpen_correlation(corr.k, cov_cfg);
  SymMatrix m = inverse_spd(r);
  SymMatrix z = jpen_inverse_correlation(m, prec_cfg);
  PrecisionEstimate est{detail::scale_to_precision(z, corr.scale, s), prec_cfg,
                        Variant::precision_correlation, false};
  if (with_admissibility)
    est.admissible = detail::admissible_flag(
        PenaltyRegion::for_inverse(std::move(m)), prec_cfg);
  return est;
}

// Same pipeline on the covariance scale: direct covariance pilot, inverted,
// thresholded/shrunk.  No back-scaling is involved.
inline PrecisionEstimate jpen_precision_direct(
    const SymMatrix& s, const EstimatorConfig& cov_cfg,
    const EstimatorConfig& prec_cfg, bool with_admissibility = true) {
  detail::check_config(prec_cfg);
  CovarianceEstimate pilot = jpen_covariance_direct(s, cov_cfg, false);
  SymMatrix m = inverse_spd(pilot.matrix);
  SymMatrix z = jpen_inverse_correlation(m, prec_cfg);
  PrecisionEstimate est{std::move(z), prec_cfg, Variant::precision_direct,
                        false};
  if (with_admissibility)
    est.admissible = detail::admissible_flag(
        PenaltyRegion::for_inverse(std::move(m)), prec_cfg);
  return est;
}

// ---- baselines --------------------------------------------------------

// Pure soft-thresholding (no eigenvalue shrinkage).  Shares the kernel with
// the joint estimators, so jpen_*(lambda, 0) reproduces it bitwise.
inline SymMatrix baseline_soft_threshold(const SymMatrix& s, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw ParameterError("baseline_soft_threshold: lambda must be >= 0");
  return detail::threshold_shrink(s, lambda, 0.0, 0.0);
}

// Pure ridge-style shrinkage toward the scaled identity:
// (S + gamma*t*I) / (1 + gamma) with t the mean diagonal.  Shares the kernel
// with the joint estimators, so jpen_covariance_direct(0, gamma) reproduces
// it bitwise; its smallest eigenvalue is at least gamma*t/(1+gamma).
inline SymMatrix baseline_eigen_shrink(const SymMatrix& s, double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma))
    throw ParameterError("baseline_eigen_shrink: gamma must be >= 0");
  return detail::threshold_shrink(s, 0.0, gamma, s.trace() / s.dim());
}

}  // namespace jpen

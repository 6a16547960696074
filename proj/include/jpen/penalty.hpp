#pragma once

// Admissibility of a penalty pair (lambda, gamma).  A pair is admissible for
// a base matrix B (correlation, covariance, or inverted pilot) when
//
//   sigma_min( (B + gamma*t*I) - (lambda/2) * sign(B + gamma*t*I) ) > pdTol,
//
// with t the diagonal shift scale of the base.  This is the exact condition
// under which the closed-form estimate stays positive definite; lambda_max()
// is the simpler sufficient (not necessary) bound used to anchor grids.

#include <cmath>
#include <string>

#include "jpen/errors.hpp"
#include "jpen/matrix.hpp"

namespace jpen {

struct PenaltyRegion {
  SymMatrix base;
  double shift = 1.0;      // t: 1 for correlations, mean diagonal otherwise
  double c12 = 0.5;        // constant in the sufficient bound; >= 0.5
  double pd_tol = 1e-8;    // strictness of the PD test; > 0

  static PenaltyRegion for_correlation(SymMatrix k) {
    return make(std::move(k), 1.0);
  }

  static PenaltyRegion for_covariance(SymMatrix s) {
    const double t = s.trace() / s.dim();
    return make(std::move(s), t);
  }

  // `m` is the already-inverted pilot estimate.
  static PenaltyRegion for_inverse(SymMatrix m) {
    const double t = m.trace() / m.dim();
    return make(std::move(m), t);
  }

  static PenaltyRegion make(SymMatrix base, double shift, double c12 = 0.5,
                            double pd_tol = 1e-8) {
    if (!(c12 >= 0.5))
      throw ParameterError("PenaltyRegion: c12 must be >= 0.5, got " +
                           std::to_string(c12));
    if (!(pd_tol > 0.0))
      throw ParameterError("PenaltyRegion: pdTol must be > 0, got " +
                           std::to_string(pd_tol));
    if (!std::isfinite(shift))
      throw ParameterError("PenaltyRegion: non-finite shift");
    return PenaltyRegion{std::move(base), shift, c12, pd_tol};
  }
};

inline void check_positive_pair(double lambda, double gamma,
                                const char* where) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ParameterError(std::string(where) + ": lambda must be > 0, got " +
                         std::to_string(lambda));
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw ParameterError(std::string(where) + ": gamma must be > 0, got " +
                         std::to_string(gamma));
}

inline bool is_admissible(const PenaltyRegion& region, double lambda,
                          double gamma) {
  check_positive_pair(lambda, gamma, "is_admissible");
  const SymMatrix shifted =
      add_scaled_identity(region.base, gamma * region.shift);
  const SymMatrix sgn = sign_matrix(shifted);
  const int p = shifted.dim();
  SymMatrix probe(p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j <= i; ++j)
      probe.set(i, j, shifted(i, j) - 0.5 * lambda * sgn(i, j));
  return eigenvalues(probe).min() > region.pd_tol;
}

// Sufficient bound: every lambda strictly below
//   sigma_min(base + gamma*t*I) / (c12 * sigma_max(sign(base)))
// is admissible.  The actual admissible interval usually extends further;
// see admissible_lambda_upper() for its exact endpoint.
inline double lambda_max(const PenaltyRegion& region, double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw ParameterError("lambda_max: gamma must be > 0, got " +
                         std::to_string(gamma));
  const double den = region.c12 * operator_norm(sign_matrix(region.base));
  if (!(den > 0.0))
    throw ValidationError(
        "lambda_max: sign(base) has no mass (zero matrix); bound undefined");
  const SymMatrix shifted =
      add_scaled_identity(region.base, gamma * region.shift);
  return eigenvalues(shifted).min() / den;
}

// Exact upper endpoint of the admissible lambda interval at a fixed gamma,
// located by bisection.  Returns 0 when no positive lambda is admissible
// (the shifted base itself fails the PD test).  The admissible set is an
// interval in lambda: sigma_min of the probe matrix is concave in lambda,
// so a level set above pd_tol cannot split.
inline double admissible_lambda_upper(const PenaltyRegion& region,
                                      double gamma, int iterations = 48) {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw ParameterError("admissible_lambda_upper: gamma must be > 0");
  const SymMatrix shifted =
      add_scaled_identity(region.base, gamma * region.shift);
  if (!(eigenvalues(shifted).min() > region.pd_tol)) return 0.0;

  double lo = 0.0;
  double hi = 1.0;
  int guard = 0;
  while (is_admissible(region, hi, gamma)) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 200)
      throw NumericalError(
          "admissible_lambda_upper: admissible interval appears unbounded");
  }
  for (int k = 0; k < iterations; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (is_admissible(region, mid, gamma))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace jpen

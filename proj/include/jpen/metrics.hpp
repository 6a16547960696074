#pragma once

// Evaluation metrics: average relative error of the Gaussian log-likelihood
// (ARE), norm errors, sparsity recovery, condition number, and the report
// struct benchmarks aggregate.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "jpen/errors.hpp"
#include "jpen/matrix.hpp"

namespace jpen {

// Gaussian log-likelihood of covariance `sigma` against sample covariance
// `s` for n observations: -(n/2) * (log det sigma + tr(s * sigma^-1)
// + p*log(2*pi)).  Throws when sigma is not PD.
inline double gaussian_log_likelihood(const SymMatrix& s,
                                      const SymMatrix& sigma, int n) {
  if (s.dim() != sigma.dim())
    throw DimensionError("gaussian_log_likelihood: dimension mismatch");
  if (n < 1) throw ParameterError("gaussian_log_likelihood: need n >= 1");
  const int p = s.dim();
  const Eigen::MatrixXd l = cholesky(sigma);
  double logdet = 0.0;
  for (int i = 0; i < p; ++i) logdet += 2.0 * std::log(l(i, i));
  // tr(s * sigma^-1) via two triangular solves.
  Eigen::MatrixXd x = l.triangularView<Eigen::Lower>().solve(s.to_dense());
  x = l.transpose().triangularView<Eigen::Upper>().solve(x);
  const double trace_term = x.trace();
  const double log2pi = 1.8378770664093454835606594728112;
  return -0.5 * n * (logdet + trace_term + p * log2pi);
}

// Same likelihood parametrized by a precision matrix, avoiding the inverse:
// log det sigma = -log det omega and tr(s*sigma^-1) = tr(s*omega).
inline double gaussian_log_likelihood_precision(const SymMatrix& s,
                                                const SymMatrix& omega,
                                                int n) {
  if (s.dim() != omega.dim())
    throw DimensionError("gaussian_log_likelihood_precision: dimension mismatch");
  if (n < 1)
    throw ParameterError("gaussian_log_likelihood_precision: need n >= 1");
  const int p = s.dim();
  const Eigen::MatrixXd l = cholesky(omega);  // also certifies PD
  double logdet = 0.0;
  for (int i = 0; i < p; ++i) logdet += 2.0 * std::log(l(i, i));
  double trace_term = 0.0;
  for (int i = 0; i < p; ++i) {
    trace_term += s(i, i) * omega(i, i);
    for (int j = 0; j < i; ++j) trace_term += 2.0 * s(i, j) * omega(i, j);
  }
  const double log2pi = 1.8378770664093454835606594728112;
  return -0.5 * n * (-logdet + trace_term + p * log2pi);
}

namespace detail {

inline double relative_error(double value, double reference) {
  const double den = std::abs(reference);
  if (den < 1e-12)
    throw NumericalError(
        "are: reference log-likelihood is too close to zero (" +
        std::to_string(reference) + "); the ratio is undefined");
  return std::abs(value - reference) / den;
}

}  // namespace detail

// |logL(S, est) - logL(S, truth)| / |logL(S, truth)|.  The sample size
// cancels between numerator and denominator, so any positive n gives the
// same value.
inline double are(const SymMatrix& s, const SymMatrix& estimate,
                  const SymMatrix& truth, int n) {
  return detail::relative_error(gaussian_log_likelihood(s, estimate, n),
                                gaussian_log_likelihood(s, truth, n));
}

// ARE for precision estimates, comparing the likelihoods the two precision
// matrices induce.
inline double are_precision(const SymMatrix& s, const SymMatrix& estimate,
                            const SymMatrix& truth, int n) {
  return detail::relative_error(
      gaussian_log_likelihood_precision(s, estimate, n),
      gaussian_log_likelihood_precision(s, truth, n));
}

struct NormErrors {
  double operator_norm = 0.0;
  double frobenius = 0.0;
  double l1 = 0.0;
};

inline NormErrors norm_errors(const SymMatrix& estimate,
                              const SymMatrix& truth) {
  const SymMatrix diff = difference(estimate, truth);
  return NormErrors{jpen::operator_norm(diff), frobenius_norm(diff),
                    l1_norm(diff)};
}

struct SparsityRecovery {
  double zero_recovery_rate = 1.0;  // 1 when the truth has no zeros
  double false_zero_rate = 0.0;     // 0 when the truth has no nonzeros
  int true_zero_pairs = 0;
  int true_nonzero_pairs = 0;
};

// Fraction of truly-zero off-diagonal positions estimated as zero (within
// tol), and fraction of truly-nonzero positions wrongly zeroed.  Counted
// over unordered pairs; symmetric inputs make that equal to the positional
// fraction.
inline SparsityRecovery sparsity_recovery(const SymMatrix& estimate,
                                          const SymPattern& pattern,
                                          double tol = 1e-12) {
  if (estimate.dim() != pattern.dim())
    throw DimensionError("sparsity_recovery: dimension mismatch");
  if (!(tol >= 0.0))
    throw ParameterError("sparsity_recovery: tolerance must be >= 0");
  const int p = estimate.dim();
  int zeros = 0, zeros_hit = 0, nonzeros = 0, nonzeros_missed = 0;
  for (int i = 1; i < p; ++i)
    for (int j = 0; j < i; ++j) {
      const bool est_zero = std::abs(estimate(i, j)) <= tol;
      if (pattern(i, j)) {
        ++zeros;
        if (est_zero) ++zeros_hit;
      } else {
        ++nonzeros;
        if (est_zero) ++nonzeros_missed;
      }
    }
  SparsityRecovery out;
  out.true_zero_pairs = zeros;
  out.true_nonzero_pairs = nonzeros;
  out.zero_recovery_rate =
      zeros == 0 ? 1.0 : static_cast<double>(zeros_hit) / zeros;
  out.false_zero_rate =
      nonzeros == 0 ? 0.0 : static_cast<double>(nonzeros_missed) / nonzeros;
  return out;
}

// Largest over smallest eigenvalue; PD input required.
inline double condition_number(const SymMatrix& m) {
  const EigenSpectrum spec = eigenvalues(m);
  if (!(spec.min() > 0.0))
    throw NotPositiveDefiniteError(
        "condition_number: smallest eigenvalue " +
        std::to_string(spec.min()) + " is not positive");
  return spec.max() / spec.min();
}

// Everything a benchmark replicate records about one estimate.  Wall time
// lives here (and in the optional timing file) but is deliberately kept out
// of the primary result serialization, which must be byte-deterministic.
struct EvalReport {
  std::string method;
  std::string family;
  int p = 0;
  int n = 0;
  int replicate = 0;
  std::uint64_t seed = 0;
  double lambda = 0.0;
  double gamma = 0.0;
  double are = 0.0;
  NormErrors errors;
  SparsityRecovery recovery;
  bool recovery_defined = true;
  double condition = 0.0;
  double eig_min = 0.0;
  double eig_max = 0.0;
  double wall_time_ms = 0.0;
};

}  // namespace jpen

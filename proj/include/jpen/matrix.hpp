#pragma once

// Dense symmetric-matrix core: packed storage, sample covariance, correlation
// scaling, soft-thresholding, eigen-decompositions, Cholesky, norms.
// Everything downstream (estimators, tuning, metrics, classification) builds
// on the types in this header.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "jpen/errors.hpp"

namespace jpen {

namespace detail {

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

inline void require_finite(double v, const std::string& where) {
  if (!std::isfinite(v))
    throw ValidationError(where + ": non-finite value (NaN or Inf)");
}

}  // namespace detail

// Symmetric p x p matrix stored as the packed lower triangle (row-major,
// p*(p+1)/2 doubles).  A single slot backs both (i,j) and (j,i), so the
// matrix cannot drift out of symmetry; set() rejects NaN/Inf.
class SymMatrix {
 public:
  SymMatrix() = default;

  explicit SymMatrix(int p) : p_(checked_dim(p)) {
    data_.assign(static_cast<std::size_t>(p_) * (p_ + 1) / 2, 0.0);
  }

  static SymMatrix identity(int p) {
    SymMatrix m(p);
    for (int i = 0; i < p; ++i) m.set(i, i, 1.0);
    return m;
  }

  // Builds from a dense matrix; rejects non-square, non-finite, or
  // asymmetric input (tolerance relative to the largest magnitude entry).
  static SymMatrix from_dense(const Eigen::MatrixXd& m,
                              double sym_tol = 1e-12) {
    if (m.rows() != m.cols())
      throw DimensionError("from_dense: matrix is " +
                           std::to_string(m.rows()) + "x" +
                           std::to_string(m.cols()) + ", expected square");
    const int p = static_cast<int>(m.rows());
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    SymMatrix out(p);
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j <= i; ++j) {
        const double a = m(i, j);
        const double b = m(j, i);
        detail::require_finite(a, "from_dense");
        detail::require_finite(b, "from_dense");
        if (std::abs(a - b) > sym_tol * scale)
          throw ValidationError(
              "from_dense: asymmetric at (" + std::to_string(i) + "," +
              std::to_string(j) + "): " + std::to_string(a) + " vs " +
              std::to_string(b));
        out.set(i, j, a);
      }
    }
    return out;
  }

  int dim() const { return p_; }

  double operator()(int i, int j) const { return data_[index(i, j)]; }

  void set(int i, int j, double v) {
    detail::require_finite(v, "SymMatrix::set");
    data_[index(i, j)] = v;
  }

  // Sequential left-to-right sum over the diagonal.  Exact-conservation
  // contracts elsewhere rely on this fixed summation order.
  double trace() const {
    double t = 0.0;
    for (int i = 0; i < p_; ++i) t += (*this)(i, i);
    return t;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  Eigen::MatrixXd to_dense() const {
    Eigen::MatrixXd m(p_, p_);
    for (int i = 0; i < p_; ++i)
      for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = (*this)(i, j);
    return m;
  }

  const std::vector<double>& packed() const { return data_; }

 private:
  static int checked_dim(int p) {
    if (p < 1)
      throw DimensionError("SymMatrix: dimension must be >= 1, got " +
                           std::to_string(p));
    return p;
  }

  std::size_t index(int i, int j) const {
    if (i < j) std::swap(i, j);
    if (i < 0 || i >= p_)
      throw DimensionError("SymMatrix: index out of range");
    return static_cast<std::size_t>(i) * (i + 1) / 2 + j;
  }

  int p_ = 0;
  std::vector<double> data_;
};

// Symmetric boolean flag matrix (diagonal slots always false).  Used to
// record which off-diagonal positions of a ground-truth matrix are zero.
class SymPattern {
 public:
  SymPattern() = default;

  explicit SymPattern(int p) : p_(p) {
    if (p < 1) throw DimensionError("SymPattern: dimension must be >= 1");
    flags_.assign(static_cast<std::size_t>(p) * (p + 1) / 2, 0);
  }

  int dim() const { return p_; }

  bool operator()(int i, int j) const {
    if (i == j) return false;
    return flags_[index(i, j)] != 0;
  }

  void set(int i, int j, bool v) {
    if (i == j) throw ParameterError("SymPattern: diagonal is not part of the pattern");
    flags_[index(i, j)] = v ? 1 : 0;
  }

  // Number of flagged unordered off-diagonal pairs.
  int count() const {
    int c = 0;
    for (int i = 1; i < p_; ++i)
      for (int j = 0; j < i; ++j)
        if ((*this)(i, j)) ++c;
    return c;
  }

 private:
  std::size_t index(int i, int j) const {
    if (i < j) std::swap(i, j);
    if (i < 0 || i >= p_) throw DimensionError("SymPattern: index out of range");
    return static_cast<std::size_t>(i) * (i + 1) / 2 + j;
  }

  int p_ = 0;
  std::vector<std::uint8_t> flags_;
};

// n x p matrix of observations (rows are samples).  At least two rows are
// required so a sample covariance is always well defined downstream.
class DataMatrix {
 public:
  explicit DataMatrix(Eigen::MatrixXd rows) : rows_(std::move(rows)) {
    if (rows_.rows() < 2)
      throw DimensionError("DataMatrix: need at least 2 observations, got " +
                           std::to_string(rows_.rows()));
    if (rows_.cols() < 1)
      throw DimensionError("DataMatrix: need at least 1 variable");
    if (!rows_.allFinite())
      throw ValidationError("DataMatrix: non-finite value (NaN or Inf)");
  }

  int n() const { return static_cast<int>(rows_.rows()); }
  int p() const { return static_cast<int>(rows_.cols()); }
  const Eigen::MatrixXd& rows() const { return rows_; }

  DataMatrix subset(const std::vector<int>& idx) const {
    Eigen::MatrixXd out(static_cast<int>(idx.size()), p());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (idx[k] < 0 || idx[k] >= n())
        throw DimensionError("DataMatrix::subset: row index out of range");
      out.row(static_cast<int>(k)) = rows_.row(idx[k]);
    }
    return DataMatrix(std::move(out));
  }

 private:
  Eigen::MatrixXd rows_;
};

// Eigenvalues sorted descending, plus their mean.
struct EigenSpectrum {
  std::vector<double> values;
  double mean = 0.0;

  double min() const { return values.back(); }
  double max() const { return values.front(); }
};

struct EigenDecomposition {
  std::vector<double> values;   // descending
  Eigen::MatrixXd vectors;      // columns aligned with `values`
};

// Result of rescaling a covariance to correlation form: the correlation
// matrix K plus the per-variable scale sqrt(S_ii) needed to map back.
struct Correlation {
  SymMatrix k;
  std::vector<double> scale;
};

// ---- operations -----------------------------------------------------------

// Sample covariance with denominator n (not n-1), matching the estimators'
// population-style normalization.  Uses a rank-update so only the lower
// triangle is ever computed; the result is symmetric by storage.
inline SymMatrix sample_covariance(const DataMatrix& data) {
  const int n = data.n();
  const int p = data.p();
  Eigen::RowVectorXd mean = data.rows().colwise().mean();
  Eigen::MatrixXd centered = data.rows().rowwise() - mean;
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(p, p);
  c.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(), 1.0 / n);
  SymMatrix s(p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j <= i; ++j) s.set(i, j, c(i, j));
  return s;
}

// K_ij = S_ij / sqrt(S_ii S_jj); the diagonal is set to exactly 1.  A zero
// or negative diagonal entry has no correlation scale and is rejected.
inline Correlation to_correlation(const SymMatrix& s) {
  const int p = s.dim();
  std::vector<double> scale(p);
  for (int i = 0; i < p; ++i) {
    const double v = s(i, i);
    if (v <= 0.0)
      throw DegenerateVarianceError(
          "to_correlation: variance " + std::to_string(v) +
              " at index " + std::to_string(i) + " is not positive",
          i);
    scale[i] = std::sqrt(v);
  }
  SymMatrix k(p);
  for (int i = 0; i < p; ++i) {
    k.set(i, i, 1.0);
    for (int j = 0; j < i; ++j) k.set(i, j, s(i, j) / (scale[i] * scale[j]));
  }
  return Correlation{std::move(k), std::move(scale)};
}

// Soft-threshold applied to off-diagonal entries only:
// m_ij -> sign(m_ij) * max(|m_ij| - t, 0).  The diagonal passes through.
inline SymMatrix soft_threshold_offdiag(const SymMatrix& m, double t) {
  if (!(t >= 0.0))
    throw ParameterError("soft_threshold_offdiag: threshold must be >= 0, got " +
                         std::to_string(t));
  const int p = m.dim();
  SymMatrix out(p);
  for (int i = 0; i < p; ++i) {
    out.set(i, i, m(i, i));
    for (int j = 0; j < i; ++j) {
      const double v = m(i, j);
      const double mag = std::abs(v) - t;
      out.set(i, j, mag > 0.0 ? (v > 0.0 ? mag : -mag) : 0.0);
    }
  }
  return out;
}

// Entrywise sign in {-1, 0, +1}.
inline SymMatrix sign_matrix(const SymMatrix& m) {
  const int p = m.dim();
  SymMatrix out(p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j <= i; ++j) {
      const double v = m(i, j);
      out.set(i, j, v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0));
    }
  return out;
}

inline EigenSpectrum eigenvalues(const SymMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      m.to_dense(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw NumericalError("eigenvalues: eigen-solver failed to converge");
  const int p = m.dim();
  EigenSpectrum spec;
  spec.values.resize(p);
  double sum = 0.0;
  for (int i = 0; i < p; ++i) {
    spec.values[i] = solver.eigenvalues()(p - 1 - i);  // descending
    sum += spec.values[i];
  }
  spec.mean = sum / p;
  return spec;
}

inline EigenDecomposition eigen_decomposition(const SymMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.to_dense());
  if (solver.info() != Eigen::Success)
    throw NumericalError("eigen_decomposition: eigen-solver failed to converge");
  const int p = m.dim();
  EigenDecomposition dec;
  dec.values.resize(p);
  dec.vectors.resize(p, p);
  for (int i = 0; i < p; ++i) {
    dec.values[i] = solver.eigenvalues()(p - 1 - i);
    dec.vectors.col(i) = solver.eigenvectors().col(p - 1 - i);
  }
  return dec;
}

// Lower-triangular Cholesky factor L with A = L L^T.  Hand-rolled so a
// failure can report which pivot went non-positive.
inline Eigen::MatrixXd cholesky(const SymMatrix& a) {
  const int p = a.dim();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(p, p);
  for (int j = 0; j < p; ++j) {
    double d = a(j, j);
    for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0) || !std::isfinite(d))
      throw NotPositiveDefiniteError(
          "cholesky: pivot " + std::to_string(j) + " is not positive (" +
              std::to_string(d) + ")",
          j);
    l(j, j) = std::sqrt(d);
    for (int i = j + 1; i < p; ++i) {
      double v = a(i, j);
      for (int k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / l(j, j);
    }
  }
  return l;
}

// Inverse of a symmetric positive definite matrix via its eigen-
// decomposition.  Refuses matrices that are not PD or whose condition
// number exceeds `cond_limit` (the answer would be numerical noise).
inline SymMatrix inverse_spd(const SymMatrix& m, double cond_limit = 1e12) {
  const EigenDecomposition dec = eigen_decomposition(m);
  const double lo = dec.values.back();
  const double hi = dec.values.front();
  if (!(lo > 0.0))
    throw NotPositiveDefiniteError(
        "inverse_spd: smallest eigenvalue " + std::to_string(lo) +
        " is not positive");
  if (hi / lo > cond_limit)
    throw NumericalError("inverse_spd: condition number " +
                         std::to_string(hi / lo) + " exceeds limit " +
                         std::to_string(cond_limit));
  const int p = m.dim();
  Eigen::VectorXd inv(p);
  for (int i = 0; i < p; ++i) inv(i) = 1.0 / dec.values[i];
  Eigen::MatrixXd w = dec.vectors * inv.asDiagonal() * dec.vectors.transpose();
  SymMatrix out(p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j <= i; ++j) out.set(i, j, w(i, j));
  return out;
}

// A + c*I without touching off-diagonal slots.
inline SymMatrix add_scaled_identity(const SymMatrix& a, double c) {
  SymMatrix out = a;
  for (int i = 0; i < a.dim(); ++i) out.set(i, i, a(i, i) + c);
  return out;
}

inline SymMatrix difference(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim())
    throw DimensionError("difference: dimension mismatch " +
                         std::to_string(a.dim()) + " vs " +
                         std::to_string(b.dim()));
  SymMatrix out(a.dim());
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j <= i; ++j) out.set(i, j, a(i, j) - b(i, j));
  return out;
}

// Norms are over the full square matrix, so off-diagonal entries count twice.

inline double frobenius_norm(const SymMatrix& m) {
  double diag = 0.0, off = 0.0;
  for (int i = 0; i < m.dim(); ++i) {
    diag += m(i, i) * m(i, i);
    for (int j = 0; j < i; ++j) off += m(i, j) * m(i, j);
  }
  return std::sqrt(diag + 2.0 * off);
}

inline double l1_norm(const SymMatrix& m) {
  double diag = 0.0, off = 0.0;
  for (int i = 0; i < m.dim(); ++i) {
    diag += std::abs(m(i, i));
    for (int j = 0; j < i; ++j) off += std::abs(m(i, j));
  }
  return diag + 2.0 * off;
}

// Spectral norm: largest absolute eigenvalue (symmetric input).
inline double operator_norm(const SymMatrix& m) {
  const EigenSpectrum spec = eigenvalues(m);
  return std::max(std::abs(spec.values.front()), std::abs(spec.values.back()));
}

}  // namespace jpen

#pragma once

// Synthetic ground-truth covariance models and Gaussian sampling.  Each
// generator returns the pair (Sigma, Omega) plus the off-diagonal zero
// pattern of Sigma so recovery metrics can be computed downstream.
//
// Randomized generators (neighborhood, cov-i) consume their Rng stream in a
// documented fixed order, so a seed pins the model byte-for-byte.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "jpen/errors.hpp"
#include "jpen/matrix.hpp"
#include "jpen/rng.hpp"

namespace jpen {

enum class Family { hub, neighborhood, toeplitz, block, cov_i };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::hub: return "hub";
    case Family::neighborhood: return "neighborhood";
    case Family::toeplitz: return "toeplitz";
    case Family::block: return "block";
    case Family::cov_i: return "cov-i";
  }
  return "unknown";
}

inline Family parse_family(const std::string& name) {
  if (name == "hub") return Family::hub;
  if (name == "neighborhood") return Family::neighborhood;
  if (name == "toeplitz") return Family::toeplitz;
  if (name == "block") return Family::block;
  if (name == "cov-i" || name == "covi") return Family::cov_i;
  throw ParameterError("unknown family '" + name +
                       "' (expected hub, neighborhood, toeplitz, block, "
                       "or cov-i)");
}

struct SimSpec {
  Family family = Family::toeplitz;
  int p = 0;
  int hub_groups = 20;            // J (hub family)
  double neighborhood_rho = 0.245;
  int blocks = 0;                 // 0 = default rule (4 when p <= 500, else 6)
  std::uint64_t seed = 0;
};

struct GroundTruth {
  SimSpec spec;
  SymMatrix sigma;
  SymMatrix omega;
  SymPattern zero_pattern;
};

namespace detail {

// Flags every off-diagonal zero of `m` (exact zeros; generators place them
// structurally).
inline SymPattern zero_pattern_of(const SymMatrix& m) {
  SymPattern pat(m.dim());
  for (int i = 1; i < m.dim(); ++i)
    for (int j = 0; j < i; ++j)
      if (m(i, j) == 0.0) pat.set(i, j, true);
  return pat;
}

inline GroundTruth finish(SimSpec spec, SymMatrix sigma) {
  GroundTruth gt{std::move(spec), std::move(sigma), SymMatrix(1),
                 SymPattern(1)};
  gt.omega = inverse_spd(gt.sigma);
  gt.zero_pattern = zero_pattern_of(gt.sigma);
  return gt;
}

}  // namespace detail

// J hub groups of size s = floor(p/J): the first variable of each group is
// linked to the other s-1 members with strength rho = 1/(s+1); leftover
// variables are unconnected.  Strictly diagonally dominant, hence PD.
inline SymMatrix gen_hub(int p, int groups) {
  if (p < 1) throw DimensionError("gen_hub: p must be >= 1");
  if (groups < 1) throw ParameterError("gen_hub: need at least 1 group");
  const int s = p / groups;
  if (s < 1)
    throw ParameterError("gen_hub: more groups than variables (p=" +
                         std::to_string(p) + ", groups=" +
                         std::to_string(groups) + ")");
  const double rho = 1.0 / (s + 1);
  SymMatrix sigma = SymMatrix::identity(p);
  for (int g = 0; g < groups; ++g) {
    const int pivot = g * s;
    for (int m = pivot + 1; m < pivot + s; ++m) sigma.set(pivot, m, rho);
  }
  return sigma;
}

// p points dropped uniformly in the unit square; each unordered pair is a
// candidate link with probability exp(-4*d^2)/sqrt(2*pi).  Candidates are
// granted closest-first while both endpoints have degree < floor(1/rho);
// granted links get value rho.  Row mass stays below 1, hence PD.
//
// Rng order: 2p coordinate uniforms (x then y per point), then one uniform
// per pair in lexicographic (i, j) order.
inline SymMatrix gen_neighborhood(int p, double rho, std::uint64_t seed) {
  if (p < 1) throw DimensionError("gen_neighborhood: p must be >= 1");
  if (!(rho > 0.0) || !(rho < 1.0))
    throw ParameterError("gen_neighborhood: rho must be in (0, 1), got " +
                         std::to_string(rho));
  const int cap = static_cast<int>(std::floor(1.0 / rho));
  if (!(cap * rho < 1.0))
    throw ParameterError(
        "gen_neighborhood: rho=" + std::to_string(rho) +
        " lets a full row reach mass 1, which breaks positive definiteness");
  Rng rng(seed);
  std::vector<double> x(p), y(p);
  for (int i = 0; i < p; ++i) {
    x[i] = rng.uniform();
    y[i] = rng.uniform();
  }
  struct Candidate {
    double d2;
    int i, j;
  };
  std::vector<Candidate> candidates;
  const double scale = 1.0 / std::sqrt(6.283185307179586476925286766559);
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      const double d2 = dx * dx + dy * dy;
      const double prob = scale * std::exp(-4.0 * d2);
      if (rng.uniform() < prob) candidates.push_back({d2, i, j});
    }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.d2 != b.d2) return a.d2 < b.d2;
              if (a.i != b.i) return a.i < b.i;
              return a.j < b.j;
            });
  SymMatrix sigma = SymMatrix::identity(p);
  std::vector<int> degree(p, 0);
  for (const Candidate& c : candidates) {
    if (degree[c.i] >= cap || degree[c.j] >= cap) continue;
    sigma.set(c.i, c.j, rho);
    ++degree[c.i];
    ++degree[c.j];
  }
  return sigma;
}

// Banded Toeplitz: diagonal 2, first off-diagonal 0.75, second 0.5625,
// zero beyond.  The symbol 2 + 1.5cos(t) + 1.125cos(2t) stays above 0.625,
// so the matrix is PD at every dimension.
inline SymMatrix gen_toeplitz(int p) {
  if (p < 1) throw DimensionError("gen_toeplitz: p must be >= 1");
  SymMatrix sigma(p);
  for (int i = 0; i < p; ++i) {
    sigma.set(i, i, 2.0);
    if (i + 1 < p) sigma.set(i, i + 1, 0.75);
    if (i + 2 < p) sigma.set(i, i + 2, 0.5625);
  }
  return sigma;
}

// Block-diagonal with near-equal contiguous Toeplitz blocks; the remainder
// rows are spread one-per-block over the leading blocks.  Every block must
// have at least 3 rows so the two-band structure is present.
inline SymMatrix gen_block(int p, int blocks) {
  if (p < 1) throw DimensionError("gen_block: p must be >= 1");
  if (blocks < 1) throw ParameterError("gen_block: need at least 1 block");
  const int base = p / blocks;
  const int extra = p % blocks;
  if (base < 3)
    throw ParameterError("gen_block: block size " + std::to_string(base) +
                         " is below 3 (p=" + std::to_string(p) +
                         ", blocks=" + std::to_string(blocks) + ")");
  SymMatrix sigma(p);
  int at = 0;
  for (int b = 0; b < blocks; ++b) {
    const int size = base + (b < extra ? 1 : 0);
    const SymMatrix t = gen_toeplitz(size);
    for (int i = 0; i < size; ++i)
      for (int j = 0; j <= i; ++j) sigma.set(at + i, at + j, t(i, j));
    at += size;
  }
  return sigma;
}

inline int default_block_count(int p) { return p <= 500 ? 4 : 6; }

// Dense well-conditioned model: eigenvalues x_i = |y_i|^(3/2) * (1 + c_p)
// with y_i standard normal and c_p = p^-(1 + log(1 + 1/p^2)); eigenvectors
// come from the sample covariance of 5p standard normal vectors (columns
// ordered by descending eigenvalue, first nonzero entry made positive).
//
// Rng order: the p eigenvalue draws (redrawing the rare |y| too close to
// zero to keep the model invertible), then 5p*p normals row-major.
inline GroundTruth gen_cov_i(int p, std::uint64_t seed) {
  if (p < 1) throw DimensionError("gen_cov_i: p must be >= 1");
  Rng rng(seed);
  const double bump =
      1.0 + std::pow(static_cast<double>(p),
                     -(1.0 + std::log(1.0 + 1.0 / (static_cast<double>(p) *
                                                   p))));
  std::vector<double> eigs(p);
  for (int i = 0; i < p; ++i) {
    double v;
    do {
      const double y = rng.normal();
      v = std::pow(std::abs(y), 1.5) * bump;
    } while (v < 1e-9);
    eigs[i] = v;
  }
  Eigen::MatrixXd w(5 * p, p);
  for (int r = 0; r < 5 * p; ++r)
    for (int c = 0; c < p; ++c) w(r, c) = rng.normal();
  const SymMatrix sw = sample_covariance(DataMatrix(std::move(w)));
  EigenDecomposition dec = eigen_decomposition(sw);
  for (int c = 0; c < p; ++c) {
    for (int r = 0; r < p; ++r) {
      const double v = dec.vectors(r, c);
      if (std::abs(v) > 1e-12) {
        if (v < 0.0) dec.vectors.col(c) *= -1.0;
        break;
      }
    }
  }
  Eigen::Map<const Eigen::VectorXd> d(eigs.data(), p);
  Eigen::MatrixXd sig =
      dec.vectors * d.asDiagonal() * dec.vectors.transpose();
  Eigen::MatrixXd omg = dec.vectors * d.cwiseInverse().asDiagonal() *
                        dec.vectors.transpose();
  GroundTruth gt{SimSpec{Family::cov_i, p, 20, 0.245, 0, seed}, SymMatrix(p),
                 SymMatrix(p), SymPattern(p)};
  for (int i = 0; i < p; ++i)
    for (int j = 0; j <= i; ++j) {
      gt.sigma.set(i, j, sig(i, j));
      gt.omega.set(i, j, omg(i, j));
    }
  return gt;  // no structural zeros: the pattern stays empty
}

inline GroundTruth make_ground_truth(const SimSpec& spec) {
  SimSpec s = spec;
  switch (s.family) {
    case Family::hub:
      return detail::finish(s, gen_hub(s.p, s.hub_groups));
    case Family::neighborhood:
      return detail::finish(s,
                            gen_neighborhood(s.p, s.neighborhood_rho, s.seed));
    case Family::toeplitz:
      return detail::finish(s, gen_toeplitz(s.p));
    case Family::block:
      if (s.blocks == 0) s.blocks = default_block_count(s.p);
      return detail::finish(s, gen_block(s.p, s.blocks));
    case Family::cov_i: {
      GroundTruth gt = gen_cov_i(s.p, s.seed);
      gt.spec = s;
      return gt;
    }
  }
  throw Error("make_ground_truth: unreachable family");
}

// n rows from N(0, Sigma) via the Cholesky factor; each row consumes p
// normal draws in order.
inline DataMatrix sample_mvn(const GroundTruth& truth, int n,
                             std::uint64_t seed) {
  if (n < 2) throw DimensionError("sample_mvn: need n >= 2");
  const int p = truth.sigma.dim();
  const Eigen::MatrixXd l = cholesky(truth.sigma);
  Rng rng(seed);
  Eigen::MatrixXd rows(n, p);
  Eigen::VectorXd z(p);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < p; ++i) z(i) = rng.normal();
    rows.row(k) = (l * z).transpose();
  }
  return DataMatrix(std::move(rows));
}

}  // namespace jpen

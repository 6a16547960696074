#pragma once

// Binary linear discriminant analysis driven by a plug-in precision matrix.
// The precision can come from the joint-penalty pipelines (tuned by CV or
// with fixed penalties), from the diagonal of the pooled covariance, or be
// the identity; that makes regularized LDA and naive baselines share one
// code path.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "jpen/errors.hpp"
#include "jpen/estimators.hpp"
#include "jpen/matrix.hpp"
#include "jpen/rng.hpp"
#include "jpen/tuning.hpp"

namespace jpen {

struct PrecisionSource {
  enum class Kind { jpen_correlation, jpen_direct, diagonal, identity };
  Kind kind = Kind::jpen_correlation;
  // Fixed (lambda, gamma) skips cross-validation entirely.
  std::optional<std::pair<double, double>> fixed;
  // Grid used when tuning; built by default_grid(+grid_points) if absent.
  std::optional<CvPlan> plan;
  int grid_points = 6;
  int folds = 5;
};

inline const char* precision_source_name(PrecisionSource::Kind k) {
  switch (k) {
    case PrecisionSource::Kind::jpen_correlation: return "jpen-correlation";
    case PrecisionSource::Kind::jpen_direct: return "jpen-direct";
    case PrecisionSource::Kind::diagonal: return "diagonal";
    case PrecisionSource::Kind::identity: return "identity";
  }
  return "unknown";
}

struct LdaModel {
  Eigen::VectorXd mean0;
  Eigen::VectorXd mean1;
  double log_prior0 = 0.0;
  double log_prior1 = 0.0;
  SymMatrix precision;
  double lambda = 0.0;  // penalties actually used (0 for plug-in baselines)
  double gamma = 0.0;
};

namespace detail {

inline void check_labels(const std::vector<int>& labels, int n) {
  if (static_cast<int>(labels.size()) != n)
    throw DimensionError("lda: got " + std::to_string(labels.size()) +
                         " labels for " + std::to_string(n) + " rows");
  for (int v : labels)
    if (v != 0 && v != 1)
      throw ValidationError("lda: labels must be 0 or 1, got " +
                            std::to_string(v));
}

}  // namespace detail

// Fits the two class means and priors, pools the within-class covariance
// (denominator n, centering each row by its own class mean), and plugs in
// the requested precision estimate.  When a joint-penalty source has no
// fixed penalties, (lambda, gamma) are cross-validated on the pooled
// centered rows with `seed`.
inline LdaModel lda_fit(const DataMatrix& x, const std::vector<int>& labels,
                        const PrecisionSource& source, std::uint64_t seed) {
  const int n = x.n();
  const int p = x.p();
  detail::check_labels(labels, n);
  int n1 = 0;
  for (int v : labels) n1 += v;
  const int n0 = n - n1;
  if (n0 < 2 || n1 < 2)
    throw ValidationError("lda_fit: need at least 2 rows per class (got " +
                          std::to_string(n0) + " and " + std::to_string(n1) +
                          ")");

  LdaModel model;
  model.mean0 = Eigen::VectorXd::Zero(p);
  model.mean1 = Eigen::VectorXd::Zero(p);
  for (int k = 0; k < n; ++k)
    (labels[k] == 0 ? model.mean0 : model.mean1) += x.rows().row(k);
  model.mean0 /= n0;
  model.mean1 /= n1;
  model.log_prior0 = std::log(static_cast<double>(n0) / n);
  model.log_prior1 = std::log(static_cast<double>(n1) / n);

  Eigen::MatrixXd centered(n, p);
  for (int k = 0; k < n; ++k)
    centered.row(k) =
        x.rows().row(k) -
        (labels[k] == 0 ? model.mean0 : model.mean1).transpose();

  // Pooled covariance straight from the centered rows (no re-centering).
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(p, p);
  c.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(), 1.0 / n);
  SymMatrix pooled(p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j <= i; ++j) pooled.set(i, j, c(i, j));

  switch (source.kind) {
    case PrecisionSource::Kind::identity:
      model.precision = SymMatrix::identity(p);
      return model;
    case PrecisionSource::Kind::diagonal: {
      SymMatrix d(p);
      for (int i = 0; i < p; ++i) {
        const double v = pooled(i, i);
        if (!(v > 0.0))
          throw DegenerateVarianceError(
              "lda_fit: pooled variance at index " + std::to_string(i) +
                  " is not positive",
              i);
        d.set(i, i, 1.0 / v);
      }
      model.precision = std::move(d);
      return model;
    }
    case PrecisionSource::Kind::jpen_correlation:
    case PrecisionSource::Kind::jpen_direct:
      break;
  }

  double lambda, gamma;
  if (source.fixed) {
    lambda = source.fixed->first;
    gamma = source.fixed->second;
  } else {
    const DataMatrix pooled_rows{Eigen::MatrixXd(centered)};
    CvPlan plan;
    if (source.plan) {
      plan = *source.plan;
    } else {
      plan = default_grid(to_correlation(pooled).k, n, source.grid_points,
                          seed);
      plan.folds = source.folds;
    }
    plan.seed = seed;
    const CvVariant cv = source.kind == PrecisionSource::Kind::jpen_direct
                             ? CvVariant::jpen_direct
                             : CvVariant::jpen_correlation;
    const CvResult sel = cv_select(pooled_rows, plan, cv);
    lambda = sel.lambda;
    gamma = sel.gamma;
  }
  const EstimatorConfig cfg{lambda, gamma, {}};
  model.lambda = lambda;
  model.gamma = gamma;
  model.precision =
      source.kind == PrecisionSource::Kind::jpen_direct
          ? jpen_precision_direct(pooled, cfg, cfg, false).matrix
          : jpen_precision_from_correlation(pooled, cfg, cfg, false).matrix;
  return model;
}

// Linear discriminant score difference; ties go to class 0.
inline int lda_predict_one(const LdaModel& model, const Eigen::VectorXd& x) {
  const Eigen::MatrixXd omega = model.precision.to_dense();
  const Eigen::VectorXd w0 = omega * model.mean0;
  const Eigen::VectorXd w1 = omega * model.mean1;
  const double d0 = x.dot(w0) - 0.5 * model.mean0.dot(w0) + model.log_prior0;
  const double d1 = x.dot(w1) - 0.5 * model.mean1.dot(w1) + model.log_prior1;
  return d0 >= d1 ? 0 : 1;
}

inline std::vector<int> lda_predict(const LdaModel& model,
                                    const DataMatrix& x) {
  const Eigen::MatrixXd omega = model.precision.to_dense();
  const Eigen::VectorXd w0 = omega * model.mean0;
  const Eigen::VectorXd w1 = omega * model.mean1;
  const double b0 = -0.5 * model.mean0.dot(w0) + model.log_prior0;
  const double b1 = -0.5 * model.mean1.dot(w1) + model.log_prior1;
  std::vector<int> out(x.n());
  for (int k = 0; k < x.n(); ++k) {
    const double d0 = x.rows().row(k).dot(w0) + b0;
    const double d1 = x.rows().row(k).dot(w1) + b1;
    out[k] = d0 >= d1 ? 0 : 1;
  }
  return out;
}

struct SplitProtocol {
  int train0 = 0;  // training rows drawn from class 0
  int train1 = 0;  // and from class 1; the rest of each class is test
  int repeats = 20;
  std::uint64_t seed = 0;
};

struct SplitBenchmark {
  double mean_error = 0.0;
  double std_error = 0.0;  // sd of the per-split errors / sqrt(repeats)
  std::vector<double> per_split;
};

// Repeated stratified holdout evaluation.  Each repeat r derives two child
// streams from (seed, r): one shuffles the class indices, one seeds the
// cross-validation inside lda_fit, so results depend only on (data, seed).
inline SplitBenchmark split_benchmark(const DataMatrix& x,
                                      const std::vector<int>& labels,
                                      const SplitProtocol& protocol,
                                      const PrecisionSource& source) {
  const int n = x.n();
  detail::check_labels(labels, n);
  if (protocol.repeats < 1)
    throw ParameterError("split_benchmark: need at least 1 repeat");
  if (protocol.train0 < 2 || protocol.train1 < 2)
    throw ParameterError(
        "split_benchmark: need at least 2 training rows per class");
  std::vector<int> class0, class1;
  for (int k = 0; k < n; ++k)
    (labels[k] == 0 ? class0 : class1).push_back(k);
  if (static_cast<int>(class0.size()) <= protocol.train0 ||
      static_cast<int>(class1.size()) <= protocol.train1)
    throw ValidationError(
        "split_benchmark: every split must leave at least one test row per "
        "class (have " + std::to_string(class0.size()) + "/" +
        std::to_string(class1.size()) + " rows, train sizes " +
        std::to_string(protocol.train0) + "/" +
        std::to_string(protocol.train1) + ")");

  SplitBenchmark result;
  result.per_split.reserve(protocol.repeats);
  for (int r = 0; r < protocol.repeats; ++r) {
    Rng shuffle_rng(Rng::mix(protocol.seed, 2 * static_cast<std::uint64_t>(r)));
    const std::uint64_t cv_seed =
        Rng::mix(protocol.seed, 2 * static_cast<std::uint64_t>(r) + 1);
    std::vector<int> c0 = class0, c1 = class1;
    shuffle_rng.shuffle(c0);
    shuffle_rng.shuffle(c1);
    std::vector<int> train, test;
    std::vector<int> train_labels, test_labels;
    for (std::size_t i = 0; i < c0.size(); ++i) {
      (static_cast<int>(i) < protocol.train0 ? train : test).push_back(c0[i]);
      (static_cast<int>(i) < protocol.train0 ? train_labels : test_labels)
          .push_back(0);
    }
    for (std::size_t i = 0; i < c1.size(); ++i) {
      (static_cast<int>(i) < protocol.train1 ? train : test).push_back(c1[i]);
      (static_cast<int>(i) < protocol.train1 ? train_labels : test_labels)
          .push_back(1);
    }
    const LdaModel model =
        lda_fit(x.subset(train), train_labels, source, cv_seed);
    const std::vector<int> predicted = lda_predict(model, x.subset(test));
    int wrong = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i)
      if (predicted[i] != test_labels[i]) ++wrong;
    result.per_split.push_back(static_cast<double>(wrong) /
                               static_cast<double>(predicted.size()));
  }

  double sum = 0.0;
  for (double e : result.per_split) sum += e;
  result.mean_error = sum / protocol.repeats;
  if (protocol.repeats > 1) {
    double ss = 0.0;
    for (double e : result.per_split) {
      const double d = e - result.mean_error;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / (protocol.repeats - 1));
    result.std_error = sd / std::sqrt(static_cast<double>(protocol.repeats));
  }
  return result;
}

}  // namespace jpen

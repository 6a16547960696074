// Command-line front end: simulate ground-truth models, fit and tune the
// joint-penalty estimators, run replicated benchmarks, evaluate LDA
// classification, and dump eigen-spectra.  All primary outputs (CSV/JSON)
// are byte-deterministic for a fixed command line; wall-clock diagnostics
// go to stderr and the optional --timing-file only.
//
// Exit codes: 0 success, 2 invalid input/configuration, 3 numerical failure.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "jpen/jpen.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kSchemaVersion = 1;

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct TimingLog {
  std::string path;  // empty = disabled
  std::vector<std::pair<std::string, double>> rows;

  void add(const std::string& label, double ms) {
    if (!path.empty()) rows.emplace_back(label, ms);
  }

  void flush() const {
    if (path.empty()) return;
    std::string text = "label,milliseconds\n";
    for (const auto& [label, ms] : rows)
      text += label + "," + jpen::format_double(ms) + "\n";
    jpen::atomic_write_text(path, text);
  }
};

json envelope(const std::string& command) {
  json j;
  j["schemaVersion"] = kSchemaVersion;
  j["tool"] = "jpen";
  j["command"] = command;
  return j;
}

void write_json(const fs::path& path, const json& j) {
  jpen::atomic_write_text(path, j.dump(2) + "\n");
}

// NaN-aware field: undefined metrics serialize as empty CSV cells and are
// skipped by aggregates.
std::string csv_field(double v) {
  return std::isnan(v) ? std::string() : jpen::format_double(v);
}

json grid_json(const std::vector<double>& g) {
  json j = json::array();
  for (double v : g) j.push_back(v);
  return j;
}

json cv_result_json(const jpen::CvResult& r) {
  json j;
  j["variant"] = jpen::cv_variant_name(r.variant);
  j["folds"] = r.plan.folds;
  j["seed"] = r.plan.seed;
  j["lambdaGrid"] = grid_json(r.plan.lambda_grid);
  j["gammaGrid"] = grid_json(r.plan.gamma_grid);
  j["selectedLambda"] = r.lambda;
  j["selectedGamma"] = r.gamma;
  j["selectedLoss"] = r.loss;
  json surface = json::array();
  for (double v : r.loss_surface)
    surface.push_back(std::isnan(v) ? json() : json(v));
  j["lossSurface"] = surface;  // row-major over (lambda, gamma)
  json mask = json::array();
  for (auto b : r.admissible) mask.push_back(b != 0);
  j["admissibleMask"] = mask;
  return j;
}

// ---- shared option plumbing ----------------------------------------------

struct CommonEstimateOptions {
  std::string variant = "correlation";
  double lambda = 0.0;
  double gamma = 0.0;
  bool tuned = false;
  int grid_points = 8;
  int folds = 5;
  std::uint64_t seed = 0;
};

enum class Method {
  jpen_correlation,
  jpen_direct,
  jpen_weighted,
  jpen_precision_correlation,
  jpen_precision_direct,
  baseline_soft,
  baseline_shrink,
};

Method parse_method(const std::string& name) {
  if (name == "correlation" || name == "jpen-correlation")
    return Method::jpen_correlation;
  if (name == "direct" || name == "jpen-direct") return Method::jpen_direct;
  if (name == "weighted" || name == "jpen-weighted")
    return Method::jpen_weighted;
  if (name == "precision-correlation" || name == "jpen-precision-correlation")
    return Method::jpen_precision_correlation;
  if (name == "precision-direct" || name == "jpen-precision-direct")
    return Method::jpen_precision_direct;
  if (name == "baseline-soft") return Method::baseline_soft;
  if (name == "baseline-shrink") return Method::baseline_shrink;
  throw jpen::ParameterError(
      "unknown variant '" + name +
      "' (expected correlation, direct, weighted, precision-correlation, "
      "precision-direct, baseline-soft, or baseline-shrink)");
}

const char* method_name(Method m) {
  switch (m) {
    case Method::jpen_correlation: return "jpen-correlation";
    case Method::jpen_direct: return "jpen-direct";
    case Method::jpen_weighted: return "jpen-weighted";
    case Method::jpen_precision_correlation:
      return "jpen-precision-correlation";
    case Method::jpen_precision_direct: return "jpen-precision-direct";
    case Method::baseline_soft: return "baseline-soft";
    case Method::baseline_shrink: return "baseline-shrink";
  }
  return "unknown";
}

bool is_precision_method(Method m) {
  return m == Method::jpen_precision_correlation ||
         m == Method::jpen_precision_direct;
}

bool is_jpen_method(Method m) {
  return m != Method::baseline_soft && m != Method::baseline_shrink;
}

jpen::CvVariant cv_variant_for(Method m) {
  switch (m) {
    case Method::jpen_correlation:
    case Method::jpen_precision_correlation:
      return jpen::CvVariant::jpen_correlation;
    case Method::jpen_direct:
    case Method::jpen_precision_direct:
      return jpen::CvVariant::jpen_direct;
    case Method::jpen_weighted:
      return jpen::CvVariant::jpen_weighted;
    case Method::baseline_soft:
      return jpen::CvVariant::baseline_soft;
    case Method::baseline_shrink:
      return jpen::CvVariant::baseline_shrink;
  }
  throw jpen::Error("unreachable method");
}

// The admissibility region of the penalty pair actually applied by a
// method.  For precision methods that is the inverted-pilot region, so the
// pilot must be fitted (with the same pair) to build it.
jpen::PenaltyRegion region_for(Method m, const jpen::SymMatrix& s,
                               double lambda, double gamma) {
  using jpen::PenaltyRegion;
  switch (m) {
    case Method::jpen_correlation:
    case Method::jpen_weighted:
      return PenaltyRegion::for_correlation(jpen::to_correlation(s).k);
    case Method::jpen_direct:
      return PenaltyRegion::for_covariance(s);
    case Method::jpen_precision_correlation: {
      const jpen::Correlation corr = jpen::to_correlation(s);
      const jpen::SymMatrix r =
          jpen::jpen_correlation(corr.k, {lambda, gamma, {}});
      return PenaltyRegion::for_inverse(jpen::inverse_spd(r));
    }
    case Method::jpen_precision_direct: {
      const jpen::CovarianceEstimate pilot =
          jpen::jpen_covariance_direct(s, {lambda, gamma, {}}, false);
      return PenaltyRegion::for_inverse(jpen::inverse_spd(pilot.matrix));
    }
    default:
      throw jpen::ParameterError("baselines have no admissibility region");
  }
}

jpen::CvPlan build_plan(Method m, const jpen::SymMatrix& s, int n, int points,
                        int folds, std::uint64_t seed) {
  using jpen::PenaltyRegion;
  // Grids are anchored on the scale the CV variant thresholds: the
  // correlation for correlation-pilot methods, the covariance itself for
  // direct-pilot ones.  Baselines borrow the correlation anchor.
  PenaltyRegion region =
      (m == Method::jpen_direct || m == Method::jpen_precision_direct)
          ? PenaltyRegion::for_covariance(s)
          : PenaltyRegion::for_correlation(jpen::to_correlation(s).k);
  jpen::CvPlan plan =
      jpen::default_grid_for_region(region, s.dim(), n, points, seed);
  plan.folds = folds;
  return plan;
}

// Fits a method on a sample covariance with explicit penalties.  Precision
// methods reuse the pair for both stages.
jpen::SymMatrix fit_method(Method m, const jpen::SymMatrix& s, double lambda,
                           double gamma) {
  const jpen::EstimatorConfig cfg{lambda, gamma, {}};
  switch (m) {
    case Method::jpen_correlation:
      return jpen::jpen_covariance_from_correlation(s, cfg, false).matrix;
    case Method::jpen_direct:
      return jpen::jpen_covariance_direct(s, cfg, false).matrix;
    case Method::jpen_weighted:
      return jpen::jpen_covariance_weighted(s, cfg, false).matrix;
    case Method::jpen_precision_correlation:
      return jpen::jpen_precision_from_correlation(s, cfg, cfg, false).matrix;
    case Method::jpen_precision_direct:
      return jpen::jpen_precision_direct(s, cfg, cfg, false).matrix;
    case Method::baseline_soft:
      return jpen::baseline_soft_threshold(s, lambda);
    case Method::baseline_shrink:
      return jpen::baseline_eigen_shrink(s, gamma);
  }
  throw jpen::Error("unreachable method");
}

int thread_count(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("JPEN_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
  std::string family = "toeplitz";
  int p = 0;
  int n = 0;
  int groups = 20;
  double rho = 0.245;
  int blocks = 0;
  std::uint64_t seed = 0;
  std::string out_prefix;
};

void run_simulate(const SimulateArgs& a, TimingLog& timing) {
  const double t0 = now_ms();
  jpen::SimSpec spec;
  spec.family = jpen::parse_family(a.family);
  spec.p = a.p;
  spec.hub_groups = a.groups;
  spec.neighborhood_rho = a.rho;
  spec.blocks = a.blocks;
  spec.seed = a.seed;
  const jpen::GroundTruth truth = jpen::make_ground_truth(spec);
  const jpen::DataMatrix data =
      jpen::sample_mvn(truth, a.n, jpen::Rng::mix(a.seed, 1));

  const jpen::EigenSpectrum spec_sigma = jpen::eigenvalues(truth.sigma);
  jpen::atomic_write_text(a.out_prefix + "_sigma.csv",
                          jpen::matrix_to_csv(truth.sigma));
  jpen::atomic_write_text(a.out_prefix + "_omega.csv",
                          jpen::matrix_to_csv(truth.omega));
  jpen::atomic_write_text(a.out_prefix + "_pattern.csv",
                          jpen::pattern_to_csv(truth.zero_pattern));
  jpen::atomic_write_text(a.out_prefix + "_data.csv",
                          jpen::table_to_csv(data.rows()));

  json j = envelope("simulate");
  j["family"] = jpen::family_name(truth.spec.family);
  j["p"] = a.p;
  j["n"] = a.n;
  j["seed"] = a.seed;
  json params;
  if (truth.spec.family == jpen::Family::hub) params["groups"] = a.groups;
  if (truth.spec.family == jpen::Family::neighborhood) params["rho"] = a.rho;
  if (truth.spec.family == jpen::Family::block)
    params["blocks"] = truth.spec.blocks;
  j["params"] = params;
  j["eigMin"] = spec_sigma.min();
  j["eigMax"] = spec_sigma.max();
  j["zeroPairs"] = truth.zero_pattern.count();
  write_json(a.out_prefix + "_truth.json", j);
  timing.add("simulate", now_ms() - t0);
}

// ---- estimate / tune ------------------------------------------------------

struct EstimateArgs {
  std::string input;
  bool header = false;
  std::string input_kind = "data";
  CommonEstimateOptions common;
  std::string out_prefix;
};

struct LoadedInput {
  jpen::SymMatrix s;
  std::optional<jpen::DataMatrix> data;
};

LoadedInput load_estimate_input(const EstimateArgs& a) {
  if (a.input_kind == "data") {
    jpen::DataMatrix data = jpen::read_data_csv(a.input, a.header);
    jpen::SymMatrix s = jpen::sample_covariance(data);
    return LoadedInput{std::move(s), std::move(data)};
  }
  if (a.input_kind == "covariance")
    return LoadedInput{jpen::read_matrix_csv(a.input), std::nullopt};
  throw jpen::ParameterError("--input-kind must be 'data' or 'covariance'");
}

void run_estimate(const EstimateArgs& a, TimingLog& timing) {
  const double t0 = now_ms();
  const Method method = parse_method(a.common.variant);
  LoadedInput in = load_estimate_input(a);

  double lambda = a.common.lambda;
  double gamma = a.common.gamma;
  std::optional<jpen::CvResult> cv;
  if (a.common.tuned) {
    if (!in.data)
      throw jpen::ValidationError(
          "--tune needs raw data rows (--input-kind data); a covariance "
          "matrix cannot be cross-validated");
    const jpen::CvPlan plan =
        build_plan(method, in.s, in.data->n(), a.common.grid_points,
                   a.common.folds, a.common.seed);
    cv = jpen::cv_select(*in.data, plan, cv_variant_for(method));
    lambda = cv->lambda;
    gamma = cv->gamma;
  }

  bool admissible = false;
  if (is_jpen_method(method) && lambda > 0.0 && gamma > 0.0) {
    const jpen::PenaltyRegion region = region_for(method, in.s, lambda, gamma);
    admissible = jpen::is_admissible(region, lambda, gamma);
    if (!admissible)
      throw jpen::ValidationError(
          "(lambda=" + jpen::format_double(lambda) +
          ", gamma=" + jpen::format_double(gamma) +
          ") is outside the admissible region; the sufficient bound at this "
          "gamma is lambda_max=" +
          jpen::format_double(jpen::lambda_max(region, gamma)) +
          " and the exact boundary is " +
          jpen::format_double(jpen::admissible_lambda_upper(region, gamma)));
  }

  const jpen::SymMatrix est = fit_method(method, in.s, lambda, gamma);
  const jpen::EigenSpectrum spec = jpen::eigenvalues(est);
  int zero_pairs = 0;
  for (int i = 1; i < est.dim(); ++i)
    for (int j = 0; j < i; ++j)
      if (est(i, j) == 0.0) ++zero_pairs;

  jpen::atomic_write_text(a.out_prefix + "_estimate.csv",
                          jpen::matrix_to_csv(est));
  json j = envelope("estimate");
  j["variant"] = method_name(method);
  j["inputKind"] = a.input_kind;
  j["p"] = est.dim();
  if (in.data) j["n"] = in.data->n();
  j["lambda"] = lambda;
  j["gamma"] = gamma;
  j["tuned"] = a.common.tuned;
  j["seed"] = a.common.seed;
  j["admissible"] = admissible;
  j["eigMin"] = spec.min();
  j["eigMax"] = spec.max();
  j["offDiagZeroPairs"] = zero_pairs;
  if (method == Method::jpen_weighted)
    j["weights"] = grid_json(jpen::choose_weights(in.s));
  if (cv) j["cv"] = cv_result_json(*cv);
  write_json(a.out_prefix + "_estimate.json", j);
  timing.add("estimate", now_ms() - t0);
}

void run_tune(const EstimateArgs& a, TimingLog& timing) {
  const double t0 = now_ms();
  const Method method = parse_method(a.common.variant);
  if (a.input_kind != "data")
    throw jpen::ValidationError("tune works on raw data rows only");
  LoadedInput in = load_estimate_input(a);
  const jpen::CvPlan plan =
      build_plan(method, in.s, in.data->n(), a.common.grid_points,
                 a.common.folds, a.common.seed);
  const jpen::CvResult cv =
      jpen::cv_select(*in.data, plan, cv_variant_for(method));
  json j = envelope("tune");
  j["variant"] = method_name(method);
  j["p"] = in.s.dim();
  j["n"] = in.data->n();
  j["seed"] = a.common.seed;
  j["cv"] = cv_result_json(cv);
  write_json(a.out_prefix + "_cv.json", j);
  timing.add("tune", now_ms() - t0);
}

// ---- benchmark ------------------------------------------------------------

struct BenchmarkArgs {
  std::string family = "toeplitz";
  int p = 0;
  int n = 0;
  int replicates = 1;
  std::string methods = "jpen-correlation";
  int grid_points = 6;
  int folds = 5;
  double tol = 1e-12;
  std::uint64_t seed = 0;
  int threads = 0;
  int groups = 20;
  double rho = 0.245;
  int blocks = 0;
  std::string out_prefix;
};

std::vector<Method> parse_methods(const std::string& joined) {
  std::vector<Method> out;
  std::size_t start = 0;
  while (start <= joined.size()) {
    std::size_t comma = joined.find(',', start);
    if (comma == std::string::npos) comma = joined.size();
    const std::string token = joined.substr(start, comma - start);
    if (!token.empty()) out.push_back(parse_method(token));
    start = comma + 1;
  }
  if (out.empty()) throw jpen::ParameterError("--methods is empty");
  return out;
}

jpen::EvalReport evaluate_method(Method m, const jpen::GroundTruth& truth,
                                 const jpen::DataMatrix& data, int replicate,
                                 std::uint64_t cv_seed, int grid_points,
                                 int folds, double tol) {
  const double t0 = now_ms();
  const jpen::SymMatrix s = jpen::sample_covariance(data);
  const jpen::CvPlan plan =
      build_plan(m, s, data.n(), grid_points, folds, cv_seed);
  const jpen::CvResult cv = jpen::cv_select(data, plan, cv_variant_for(m));
  const jpen::SymMatrix est = fit_method(m, s, cv.lambda, cv.gamma);

  jpen::EvalReport report;
  report.method = method_name(m);
  report.family = jpen::family_name(truth.spec.family);
  report.p = truth.sigma.dim();
  report.n = data.n();
  report.replicate = replicate;
  report.seed = cv_seed;
  report.lambda = cv.lambda;
  report.gamma = cv.gamma;

  const bool precision = is_precision_method(m);
  const jpen::SymMatrix& target = precision ? truth.omega : truth.sigma;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  try {
    report.are = precision
                     ? jpen::are_precision(s, est, target, data.n())
                     : jpen::are(s, est, target, data.n());
  } catch (const jpen::NumericalError&) {
    report.are = nan;  // non-PD estimate: the likelihood is undefined
  }
  report.errors = jpen::norm_errors(est, target);
  if (precision) {
    report.recovery_defined = false;  // the truth pattern describes Sigma
  } else {
    report.recovery = jpen::sparsity_recovery(est, truth.zero_pattern, tol);
  }
  const jpen::EigenSpectrum spec = jpen::eigenvalues(est);
  report.eig_min = spec.min();
  report.eig_max = spec.max();
  report.condition = spec.min() > 0.0 ? spec.max() / spec.min() : nan;
  report.wall_time_ms = now_ms() - t0;
  return report;
}

void run_benchmark(const BenchmarkArgs& a, TimingLog& timing) {
  jpen::SimSpec spec;
  spec.family = jpen::parse_family(a.family);
  spec.p = a.p;
  spec.hub_groups = a.groups;
  spec.neighborhood_rho = a.rho;
  spec.blocks = a.blocks;
  spec.seed = a.seed;
  const jpen::GroundTruth truth = jpen::make_ground_truth(spec);
  const std::vector<Method> methods = parse_methods(a.methods);
  if (a.replicates < 1)
    throw jpen::ParameterError("benchmark: need at least 1 replicate");

  std::vector<std::vector<jpen::EvalReport>> rows(a.replicates);
  auto run_replicate = [&](int r) {
    const std::uint64_t data_seed =
        jpen::Rng::mix(a.seed, 0x10000u + static_cast<std::uint64_t>(r));
    const std::uint64_t cv_seed =
        jpen::Rng::mix(a.seed, 0x20000u + static_cast<std::uint64_t>(r));
    const jpen::DataMatrix data = jpen::sample_mvn(truth, a.n, data_seed);
    for (Method m : methods)
      rows[r].push_back(evaluate_method(m, truth, data, r, cv_seed,
                                        a.grid_points, a.folds, a.tol));
  };

  const int threads = thread_count(a.threads);
  if (threads <= 1) {
    for (int r = 0; r < a.replicates; ++r) run_replicate(r);
  } else {
    std::vector<std::future<void>> futures;
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t)
      futures.push_back(std::async(std::launch::async, [&]() {
        while (true) {
          const int r = next.fetch_add(1);
          if (r >= a.replicates) return;
          run_replicate(r);
        }
      }));
    for (auto& f : futures) f.get();
  }

  std::string csv =
      "method,family,p,n,replicate,seed,lambda,gamma,are,errOperator,"
      "errFrobenius,errL1,zeroRecovery,falseZero,condition,eigMin,eigMax\n";
  for (const auto& rep : rows)
    for (const jpen::EvalReport& e : rep) {
      csv += e.method + "," + e.family + "," + std::to_string(e.p) + "," +
             std::to_string(e.n) + "," + std::to_string(e.replicate) + "," +
             std::to_string(e.seed) + "," + jpen::format_double(e.lambda) +
             "," + jpen::format_double(e.gamma) + "," + csv_field(e.are) +
             "," + jpen::format_double(e.errors.operator_norm) + "," +
             jpen::format_double(e.errors.frobenius) + "," +
             jpen::format_double(e.errors.l1) + ",";
      csv += e.recovery_defined
                 ? jpen::format_double(e.recovery.zero_recovery_rate) + "," +
                       jpen::format_double(e.recovery.false_zero_rate)
                 : std::string(",");
      csv += "," + csv_field(e.condition) + "," +
             jpen::format_double(e.eig_min) + "," +
             jpen::format_double(e.eig_max) + "\n";
      timing.add(e.method + "/replicate" + std::to_string(e.replicate),
                 e.wall_time_ms);
    }
  jpen::atomic_write_text(a.out_prefix + "_replicates.csv", csv);

  // Aggregate mean(sd) per method and metric, skipping undefined entries.
  json summary = envelope("benchmark");
  summary["family"] = jpen::family_name(truth.spec.family);
  summary["p"] = a.p;
  summary["n"] = a.n;
  summary["replicates"] = a.replicates;
  summary["seed"] = a.seed;
  summary["tol"] = a.tol;
  json per_method;
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    auto metric = [&](auto getter) -> json {
      std::vector<double> vals;
      for (const auto& rep : rows) {
        const double v = getter(rep[mi]);
        if (!std::isnan(v)) vals.push_back(v);
      }
      json j;
      j["count"] = vals.size();
      if (!vals.empty()) {
        double sum = 0.0;
        for (double v : vals) sum += v;
        const double mean = sum / vals.size();
        double ss = 0.0;
        for (double v : vals) ss += (v - mean) * (v - mean);
        const double sd =
            vals.size() > 1 ? std::sqrt(ss / (vals.size() - 1)) : 0.0;
        j["mean"] = mean;
        j["sd"] = sd;
        char cell[64];
        std::snprintf(cell, sizeof cell, "%.3f(%.3f)", mean, sd);
        j["cell"] = cell;
      }
      return j;
    };
    json m;
    m["are"] = metric([](const jpen::EvalReport& e) { return e.are; });
    m["errOperator"] = metric(
        [](const jpen::EvalReport& e) { return e.errors.operator_norm; });
    m["errFrobenius"] =
        metric([](const jpen::EvalReport& e) { return e.errors.frobenius; });
    m["errL1"] =
        metric([](const jpen::EvalReport& e) { return e.errors.l1; });
    m["zeroRecovery"] = metric([](const jpen::EvalReport& e) {
      return e.recovery_defined ? e.recovery.zero_recovery_rate
                                : std::numeric_limits<double>::quiet_NaN();
    });
    m["falseZero"] = metric([](const jpen::EvalReport& e) {
      return e.recovery_defined ? e.recovery.false_zero_rate
                                : std::numeric_limits<double>::quiet_NaN();
    });
    m["condition"] =
        metric([](const jpen::EvalReport& e) { return e.condition; });
    per_method[method_name(methods[mi])] = m;
  }
  summary["methods"] = per_method;
  write_json(a.out_prefix + "_summary.json", summary);
}

// ---- classify --------------------------------------------------------

struct ClassifyArgs {
  std::string input;
  bool header = false;
  int label_col = -1;
  int train0 = 0;
  int train1 = 0;
  int repeats = 20;
  std::uint64_t seed = 0;
  std::string method = "jpen-correlation";
  int grid_points = 6;
  int folds = 5;
  double lambda = -1.0;  // <0 = tune
  double gamma = -1.0;
  std::string out_prefix;
};

void run_classify(const ClassifyArgs& a, TimingLog& timing) {
  const double t0 = now_ms();
  const jpen::LabeledData data =
      jpen::read_labeled_csv(a.input, a.header, a.label_col);

  jpen::PrecisionSource source;
  if (a.method == "jpen-correlation")
    source.kind = jpen::PrecisionSource::Kind::jpen_correlation;
  else if (a.method == "jpen-direct")
    source.kind = jpen::PrecisionSource::Kind::jpen_direct;
  else if (a.method == "diagonal")
    source.kind = jpen::PrecisionSource::Kind::diagonal;
  else if (a.method == "identity")
    source.kind = jpen::PrecisionSource::Kind::identity;
  else
    throw jpen::ParameterError(
        "--method must be jpen-correlation, jpen-direct, diagonal, or "
        "identity");
  source.grid_points = a.grid_points;
  source.folds = a.folds;
  if (a.lambda >= 0.0 || a.gamma >= 0.0) {
    if (a.lambda < 0.0 || a.gamma < 0.0)
      throw jpen::ParameterError(
          "--lambda and --gamma must be given together");
    source.fixed = std::make_pair(a.lambda, a.gamma);
  }

  jpen::SplitProtocol protocol;
  protocol.train0 = a.train0;
  protocol.train1 = a.train1;
  protocol.repeats = a.repeats;
  protocol.seed = a.seed;
  const jpen::SplitBenchmark result =
      jpen::split_benchmark(data.x, data.labels, protocol, source);

  int n1 = 0;
  for (int v : data.labels) n1 += v;
  json j = envelope("classify");
  j["method"] = a.method;
  j["p"] = data.x.p();
  j["n0"] = data.x.n() - n1;
  j["n1"] = n1;
  j["train0"] = a.train0;
  j["train1"] = a.train1;
  j["repeats"] = a.repeats;
  j["seed"] = a.seed;
  if (source.fixed) {
    j["lambda"] = source.fixed->first;
    j["gamma"] = source.fixed->second;
  }
  j["meanError"] = result.mean_error;
  j["stdError"] = result.std_error;
  j["perSplit"] = grid_json(result.per_split);
  write_json(a.out_prefix + "_classification.json", j);
  timing.add("classify", now_ms() - t0);
}

// ---- spectrum ---------------------------------------------------------

void run_spectrum(const std::vector<std::string>& inputs,
                  const std::string& output) {
  std::string csv = "source,index,eigenvalue\n";
  for (const std::string& path : inputs) {
    const jpen::SymMatrix m = jpen::read_matrix_csv(path);
    const jpen::EigenSpectrum spec = jpen::eigenvalues(m);
    const std::string source = fs::path(path).filename().string();
    for (std::size_t i = 0; i < spec.values.size(); ++i)
      csv += source + "," + std::to_string(i) + "," +
             jpen::format_double(spec.values[i]) + "\n";
  }
  jpen::atomic_write_text(output, csv);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "jpen: sparse, well-conditioned covariance and precision estimation"};
  app.require_subcommand(1);

  std::string timing_file;
  app.add_option("--timing-file", timing_file,
                 "append wall-clock diagnostics to this CSV (kept separate "
                 "so primary outputs stay byte-deterministic)");

  SimulateArgs sim;
  CLI::App* c_sim = app.add_subcommand(
      "simulate", "generate a ground-truth model and a Gaussian sample");
  c_sim->add_option("--family", sim.family,
                    "hub, neighborhood, toeplitz, block, or cov-i")
      ->required();
  c_sim->add_option("--p", sim.p, "dimension")->required();
  c_sim->add_option("--n", sim.n, "sample rows")->required();
  c_sim->add_option("--seed", sim.seed, "model/data seed");
  c_sim->add_option("--groups", sim.groups, "hub groups J");
  c_sim->add_option("--rho", sim.rho, "neighborhood link strength");
  c_sim->add_option("--blocks", sim.blocks,
                    "block count (0 = 4 when p <= 500, else 6)");
  c_sim->add_option("--out-prefix", sim.out_prefix, "output path prefix")
      ->required();

  EstimateArgs est;
  CLI::App* c_est = app.add_subcommand(
      "estimate", "fit one estimator, optionally tuning (lambda, gamma)");
  c_est->add_option("--input", est.input, "CSV input")->required();
  c_est->add_flag("--header", est.header, "input has a header line");
  c_est->add_option("--input-kind", est.input_kind, "'data' or 'covariance'");
  c_est->add_option("--variant", est.common.variant,
                    "correlation, direct, weighted, precision-correlation, "
                    "precision-direct, baseline-soft, baseline-shrink");
  c_est->add_option("--lambda", est.common.lambda, "sparsity penalty");
  c_est->add_option("--gamma", est.common.gamma, "conditioning penalty");
  c_est->add_flag("--tune", est.common.tuned, "select penalties by CV");
  c_est->add_option("--grid-points", est.common.grid_points,
                    "points per grid axis when tuning");
  c_est->add_option("--folds", est.common.folds, "CV folds");
  c_est->add_option("--seed", est.common.seed, "CV fold seed");
  c_est->add_option("--out-prefix", est.out_prefix, "output path prefix")
      ->required();

  EstimateArgs tun;
  CLI::App* c_tun = app.add_subcommand(
      "tune", "cross-validate the penalty grid and report the surface");
  c_tun->add_option("--input", tun.input, "CSV with data rows")->required();
  c_tun->add_flag("--header", tun.header, "input has a header line");
  c_tun->add_option("--variant", tun.common.variant, "estimator variant");
  c_tun->add_option("--grid-points", tun.common.grid_points,
                    "points per grid axis");
  c_tun->add_option("--folds", tun.common.folds, "CV folds");
  c_tun->add_option("--seed", tun.common.seed, "CV fold seed");
  c_tun->add_option("--out-prefix", tun.out_prefix, "output path prefix")
      ->required();

  BenchmarkArgs bench;
  CLI::App* c_bench = app.add_subcommand(
      "benchmark", "replicated simulation study with CV-tuned estimators");
  c_bench->add_option("--family", bench.family, "ground-truth family")
      ->required();
  c_bench->add_option("--p", bench.p, "dimension")->required();
  c_bench->add_option("--n", bench.n, "sample rows per replicate")->required();
  c_bench->add_option("--replicates", bench.replicates, "replicate count")
      ->required();
  c_bench->add_option("--methods", bench.methods,
                      "comma-separated method list");
  c_bench->add_option("--grid-points", bench.grid_points,
                      "points per grid axis");
  c_bench->add_option("--folds", bench.folds, "CV folds");
  c_bench->add_option("--tol", bench.tol, "zero tolerance for recovery");
  c_bench->add_option("--seed", bench.seed, "base seed");
  c_bench->add_option("--threads", bench.threads,
                      "worker threads (default: JPEN_THREADS env or 1)");
  c_bench->add_option("--groups", bench.groups, "hub groups J");
  c_bench->add_option("--rho", bench.rho, "neighborhood link strength");
  c_bench->add_option("--blocks", bench.blocks, "block count (0 = default)");
  c_bench->add_option("--out-prefix", bench.out_prefix, "output path prefix")
      ->required();

  ClassifyArgs cls;
  CLI::App* c_cls = app.add_subcommand(
      "classify", "repeated stratified LDA evaluation on labeled data");
  c_cls->add_option("--input", cls.input, "labeled CSV")->required();
  c_cls->add_flag("--header", cls.header, "input has a header line");
  c_cls->add_option("--label-col", cls.label_col,
                    "label column index (default: last)");
  c_cls->add_option("--train0", cls.train0, "class-0 training rows")
      ->required();
  c_cls->add_option("--train1", cls.train1, "class-1 training rows")
      ->required();
  c_cls->add_option("--repeats", cls.repeats, "number of splits");
  c_cls->add_option("--seed", cls.seed, "split/CV seed");
  c_cls->add_option("--method", cls.method,
                    "jpen-correlation, jpen-direct, diagonal, or identity");
  c_cls->add_option("--grid-points", cls.grid_points, "CV grid points");
  c_cls->add_option("--folds", cls.folds, "CV folds");
  c_cls->add_option("--lambda", cls.lambda, "fixed sparsity penalty");
  c_cls->add_option("--gamma", cls.gamma, "fixed conditioning penalty");
  c_cls->add_option("--out-prefix", cls.out_prefix, "output path prefix")
      ->required();

  std::vector<std::string> spectrum_inputs;
  std::string spectrum_output;
  CLI::App* c_spec = app.add_subcommand(
      "spectrum", "eigenvalues of one or more matrices, long CSV");
  c_spec->add_option("--input", spectrum_inputs, "matrix CSV (repeatable)")
      ->required();
  c_spec->add_option("--output", spectrum_output, "output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  TimingLog timing;
  timing.path = timing_file;
  try {
    const double t0 = now_ms();
    if (c_sim->parsed()) run_simulate(sim, timing);
    if (c_est->parsed()) run_estimate(est, timing);
    if (c_tun->parsed()) run_tune(tun, timing);
    if (c_bench->parsed()) run_benchmark(bench, timing);
    if (c_cls->parsed()) run_classify(cls, timing);
    if (c_spec->parsed()) run_spectrum(spectrum_inputs, spectrum_output);
    timing.add("total", now_ms() - t0);
    timing.flush();
    std::cerr << "done in " << (now_ms() - t0) << " ms\n";
  } catch (const jpen::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const jpen::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "jpen/penalty.hpp"
#include "jpen/simgen.hpp"
#include "jpen/tuning.hpp"
#include "support/random_mats.hpp"

using namespace jpen;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SymMatrix pair_correlation(double k12) {
  SymMatrix k(2);
  k.set(0, 0, 1.0);
  k.set(1, 1, 1.0);
  k.set(0, 1, k12);
  return k;
}

DataMatrix gaussian_data(int n, int p, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) m(i, j) = rng.normal();
  return DataMatrix(std::move(m));
}

}  // namespace

TEST_CASE("is_admissible on an identity base") {
  const PenaltyRegion region =
      PenaltyRegion::for_correlation(SymMatrix::identity(3));
  const double gamma = 0.5;
  // Probe eigenvalues are 1 + gamma - lambda/2, so the boundary sits at
  // 2*(1 + gamma - pdTol).
  REQUIRE(is_admissible(region, 1.0, gamma));
  REQUIRE(is_admissible(region, 2.9, gamma));
  REQUIRE_FALSE(is_admissible(region, 3.0, gamma));
  REQUIRE_FALSE(is_admissible(region, 3.1, gamma));
  REQUIRE_THROWS_AS(is_admissible(region, 0.0, gamma), ParameterError);
  REQUIRE_THROWS_AS(is_admissible(region, 0.5, 0.0), ParameterError);
}

TEST_CASE("is_admissible on a correlated pair") {
  const PenaltyRegion region = PenaltyRegion::for_correlation(pair_correlation(0.9));
  const double gamma = 0.5;
  // Probe eigenvalues: 2.4 - lambda and 0.6 exactly.
  REQUIRE(is_admissible(region, 2.3, gamma));
  REQUIRE_FALSE(is_admissible(region, 2.4, gamma));
  // Past the sufficient bound lambda_max = 0.6 but still admissible.
  REQUIRE(is_admissible(region, 0.7, gamma));
}

TEST_CASE("lambda_max worked values") {
  const PenaltyRegion id = PenaltyRegion::for_correlation(SymMatrix::identity(4));
  REQUIRE_THAT(lambda_max(id, 1.0), WithinRel(4.0, 1e-12));

  const PenaltyRegion pair = PenaltyRegion::for_correlation(pair_correlation(0.5));
  REQUIRE_THAT(lambda_max(pair, 0.5), WithinRel(1.0, 1e-12));

  REQUIRE_THROWS_AS(lambda_max(pair, 0.0), ParameterError);
}

TEST_CASE("lambda_max is sound and grows with gamma") {
  Rng rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const int p = 2 + rng.below(12);
    const SymMatrix k = testing::random_correlation(p, rng);
    const PenaltyRegion region = PenaltyRegion::for_correlation(k);
    const double gamma = 0.05 + 2.0 * rng.uniform();
    const double bound = lambda_max(region, gamma);
    REQUIRE(bound > 0.0);
    REQUIRE(is_admissible(region, 0.95 * bound, gamma));
    REQUIRE(lambda_max(region, gamma + 0.5) > bound);
  }
}

TEST_CASE("admissible_lambda_upper brackets the exact boundary") {
  const PenaltyRegion id = PenaltyRegion::for_correlation(SymMatrix::identity(3));
  const double upper_id = admissible_lambda_upper(id, 0.5);
  REQUIRE_THAT(upper_id, WithinAbs(3.0, 1e-6));

  const PenaltyRegion pair = PenaltyRegion::for_correlation(pair_correlation(0.9));
  const double upper_pair = admissible_lambda_upper(pair, 0.5);
  REQUIRE_THAT(upper_pair, WithinAbs(2.4, 1e-6));

  Rng rng(15);
  for (int trial = 0; trial < 25; ++trial) {
    const int p = 2 + rng.below(10);
    const SymMatrix k = testing::random_correlation(p, rng);
    const PenaltyRegion region = PenaltyRegion::for_correlation(k);
    const double gamma = 0.05 + 2.0 * rng.uniform();
    const double upper = admissible_lambda_upper(region, gamma);
    REQUIRE(upper >= lambda_max(region, gamma) * 0.999);
    REQUIRE(is_admissible(region, 0.9999 * upper, gamma));
    REQUIRE_FALSE(is_admissible(region, 1.0001 * upper + 1e-7, gamma));
  }
}

TEST_CASE("admissible_lambda_upper signals a hopeless gamma") {
  // A base with a sufficiently negative eigenvalue stays non-PD after the
  // shift, so no lambda can work.
  SymMatrix bad(2);
  bad.set(0, 0, 1.0);
  bad.set(1, 1, 1.0);
  bad.set(0, 1, 1.5);
  const PenaltyRegion region = PenaltyRegion::make(bad, 1.0);
  REQUIRE(admissible_lambda_upper(region, 0.1) == 0.0);
  REQUIRE(admissible_lambda_upper(region, 1.0) > 0.0);
}

TEST_CASE("make_folds partitions the rows") {
  const auto folds = make_folds(50, 5, 42);
  REQUIRE(folds.size() == 5);
  std::vector<int> seen;
  for (const auto& f : folds) {
    REQUIRE(f.size() == 10);
    seen.insert(seen.end(), f.begin(), f.end());
  }
  std::sort(seen.begin(), seen.end());
  for (int i = 0; i < 50; ++i) REQUIRE(seen[i] == i);

  const auto uneven = make_folds(52, 5, 42);
  REQUIRE(uneven[0].size() == 11);
  REQUIRE(uneven[1].size() == 11);
  REQUIRE(uneven[2].size() == 10);
  REQUIRE(uneven[3].size() == 10);
  REQUIRE(uneven[4].size() == 10);

  REQUIRE(make_folds(50, 5, 7) == make_folds(50, 5, 7));
  REQUIRE(make_folds(50, 5, 7) != make_folds(50, 5, 8));
  REQUIRE_THROWS_AS(make_folds(9, 5, 0), ValidationError);
  REQUIRE_THROWS_AS(make_folds(50, 1, 0), ParameterError);
}

TEST_CASE("default_grid anchors on sqrt(log(p)/n)") {
  const SymMatrix k = SymMatrix::identity(100);
  const CvPlan plan = default_grid(k, 100, 8, 99);
  const double g = std::sqrt(std::log(100.0) / 100.0);
  REQUIRE_THAT(g, WithinRel(0.21459660262893468, 1e-15));
  REQUIRE(plan.gamma_grid.size() == 8);
  REQUIRE(plan.lambda_grid.size() == 8);
  REQUIRE(plan.seed == 99);
  REQUIRE(plan.gamma_grid.front() == 0.1 * g);
  REQUIRE(plan.gamma_grid.back() == 10.0 * g);

  const PenaltyRegion region = PenaltyRegion::for_correlation(k);
  const double hi = admissible_lambda_upper(region, plan.gamma_grid.back());
  REQUIRE(plan.lambda_grid.front() == 0.02 * hi);
  REQUIRE(plan.lambda_grid.back() == 0.98 * hi);
  REQUIRE(is_admissible(region, plan.lambda_grid.back(), plan.gamma_grid.back()));

  for (std::size_t i = 1; i < plan.lambda_grid.size(); ++i) {
    REQUIRE(plan.lambda_grid[i] > plan.lambda_grid[i - 1]);
    REQUIRE(plan.gamma_grid[i] > plan.gamma_grid[i - 1]);
  }

  REQUIRE_THROWS_AS(default_grid(SymMatrix::identity(1), 100, 8), ParameterError);
  REQUIRE_THROWS_AS(default_grid(k, 0, 8), ParameterError);
  REQUIRE_THROWS_AS(default_grid(k, 100, 1), ParameterError);
}

TEST_CASE("cv_select is deterministic and honors the grid") {
  const DataMatrix data = gaussian_data(30, 4, 11);
  CvPlan plan;
  plan.folds = 5;
  plan.seed = 3;
  plan.lambda_grid = {0.05, 0.2, 0.5};
  plan.gamma_grid = {0.1, 0.4};

  const CvResult a = cv_select(data, plan, CvVariant::jpen_correlation);
  const CvResult b = cv_select(data, plan, CvVariant::jpen_correlation);
  REQUIRE(a.lambda == b.lambda);
  REQUIRE(a.gamma == b.gamma);
  REQUIRE(a.loss == b.loss);
  REQUIRE(a.loss_surface == b.loss_surface);
  REQUIRE(a.admissible == b.admissible);
  REQUIRE(a.loss_surface.size() == 6);

  // Selected pair must be a grid point with the minimal unmasked loss.
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < a.loss_surface.size(); ++i)
    if (a.admissible[i]) best = std::min(best, a.loss_surface[i]);
  REQUIRE(a.loss == best);
  REQUIRE(std::find(plan.lambda_grid.begin(), plan.lambda_grid.end(),
                    a.lambda) != plan.lambda_grid.end());
  REQUIRE(std::find(plan.gamma_grid.begin(), plan.gamma_grid.end(), a.gamma) !=
          plan.gamma_grid.end());
}

TEST_CASE("cv_select accepts a single-point grid") {
  const DataMatrix data = gaussian_data(20, 3, 21);
  CvPlan plan;
  plan.lambda_grid = {0.1};
  plan.gamma_grid = {0.2};
  const CvResult sel = cv_select(data, plan, CvVariant::jpen_correlation);
  REQUIRE(sel.lambda == 0.1);
  REQUIRE(sel.gamma == 0.2);
  REQUIRE(std::isfinite(sel.loss));
}

TEST_CASE("cv_select skips masked points") {
  const DataMatrix data = gaussian_data(24, 3, 31);
  CvPlan plan;
  plan.lambda_grid = {0.05, 1000.0};
  plan.gamma_grid = {0.3};
  const CvResult sel = cv_select(data, plan, CvVariant::jpen_correlation);
  REQUIRE(sel.lambda == 0.05);
  REQUIRE(sel.admissible[0] == 1);
  REQUIRE(sel.admissible[1] == 0);
  REQUIRE(std::isnan(sel.loss_surface[1]));
}

TEST_CASE("cv_select reports an exhausted grid") {
  const DataMatrix data = gaussian_data(24, 3, 41);
  CvPlan plan;
  plan.lambda_grid = {1e6};
  plan.gamma_grid = {1e-8};
  try {
    cv_select(data, plan, CvVariant::jpen_correlation);
    FAIL("expected ExhaustedGridError");
  } catch (const ExhaustedGridError& e) {
    REQUIRE(std::string(e.what()).find("gamma") != std::string::npos);
  }
}

TEST_CASE("cv_select validates its plan") {
  const DataMatrix data = gaussian_data(20, 3, 51);
  CvPlan plan;
  plan.lambda_grid = {0.1};
  plan.gamma_grid = {};
  REQUIRE_THROWS_AS(cv_select(data, plan, CvVariant::jpen_correlation),
                    ParameterError);
  plan.gamma_grid = {0.3, 0.2};
  REQUIRE_THROWS_AS(cv_select(data, plan, CvVariant::jpen_correlation),
                    ParameterError);
  plan.gamma_grid = {0.2, 0.3};
  plan.folds = 1;
  REQUIRE_THROWS_AS(cv_select(data, plan, CvVariant::jpen_correlation),
                    ParameterError);
}

TEST_CASE("baseline variants ignore their inert axis") {
  const DataMatrix data = gaussian_data(30, 4, 61);
  CvPlan plan;
  plan.lambda_grid = {0.05, 0.2, 0.6};
  plan.gamma_grid = {0.1, 0.5, 1.5};

  const CvResult soft = cv_select(data, plan, CvVariant::baseline_soft);
  for (int a = 0; a < 3; ++a)
    for (int b = 1; b < 3; ++b)
      REQUIRE(soft.loss_surface[a * 3 + b] == soft.loss_surface[a * 3]);

  const CvResult shrink = cv_select(data, plan, CvVariant::baseline_shrink);
  for (int b = 0; b < 3; ++b)
    for (int a = 1; a < 3; ++a)
      REQUIRE(shrink.loss_surface[a * 3 + b] == shrink.loss_surface[b]);

  // Baselines never mask grid points.
  REQUIRE(std::count(soft.admissible.begin(), soft.admissible.end(), 1) == 9);
}

TEST_CASE("cv_select runs the weighted and direct variants") {
  const DataMatrix data = gaussian_data(30, 4, 71);
  CvPlan plan;
  plan.lambda_grid = {0.05, 0.3};
  plan.gamma_grid = {0.2, 0.8};
  REQUIRE_NOTHROW(cv_select(data, plan, CvVariant::jpen_weighted));
  REQUIRE_NOTHROW(cv_select(data, plan, CvVariant::jpen_direct));
}

TEST_CASE("cross-validated penalties recover a diagonal truth") {
  const GroundTruth truth = make_ground_truth({Family::hub, 10, 10, 0.245, 0, 1});
  const DataMatrix data = sample_mvn(truth, 200, 17);
  const SymMatrix s = sample_covariance(data);
  const CvPlan plan = default_grid(to_correlation(s).k, 200, 6, 23);
  const CvResult sel = cv_select(data, plan, CvVariant::jpen_correlation);
  const SymMatrix est =
      jpen_covariance_from_correlation(s, {sel.lambda, sel.gamma, {}}, false)
          .matrix;
  int zeroed = 0;
  for (int i = 1; i < 10; ++i)
    for (int j = 0; j < i; ++j)
      if (est(i, j) == 0.0) ++zeroed;
  REQUIRE(zeroed >= 36);  // at least 80% of the 45 truly-zero pairs
}

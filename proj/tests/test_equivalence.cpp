#include "doctest.h"
#include "helpers.hpp"

#include <msvar/equivalence.hpp>
#include <msvar/layout.hpp>
#include <msvar/montecarlo.hpp>
#include <msvar/numerics.hpp>
#include <msvar/reduced_form.hpp>
#include <msvar/restrictions.hpp>
#include <msvar/rng.hpp>
#include <msvar/structural.hpp>

#include <cmath>
#include <string>
#include <vector>

using namespace msvar;
using msvar::testing::random_matrix;
using msvar::testing::random_spd;
using msvar::testing::simulate_builtin;

namespace {

FrequencyLayout small_layout() {
  FrequencyLayout lay;
  lay.n_low = 1;
  lay.n_high = 1;
  lay.m = 3;
  lay.p = 1;
  return lay;
}

AggregationScheme first_obs() {
  return AggregationScheme::uniform(AggregationKind::FirstObservation);
}

}  // namespace

TEST_CASE("reduced-form aggregation test on the four-dimensional design") {
  StackedDataset data = simulate_builtin("small-1-h0", 109, 71);
  FrequencyLayout lay = small_layout();
  LrTestResult r = test_reduced_equivalence(data, lay, 1, first_obs());
  CHECK(r.dof == 4);
  CHECK(r.statistic >= 0.0);
  CHECK(r.pvalue >= 0.0);
  CHECK(r.pvalue <= 1.0);
  CHECK(r.pvalue == doctest::Approx(chi2_sf(r.statistic, 4)).epsilon(1e-12));
  CHECK(r.l_unrestricted >= r.l_restricted - 1e-8);

  SUBCASE("the statistic is the scaled log-likelihood gap") {
    ReducedFormFit unres = estimate_ols(data, lay, 1);
    LinearRestrictions restr = reduced_equivalence_restrictions(
        lay, first_obs(), unres.coef_layout(), 0);
    ReducedFormFit res = estimate_restricted(data, lay, 1, restr);
    const double te = unres.effective_T;
    const double scale = (te - unres.coef_layout().K() - 0.5 * (4 + 1)) / te;
    const double plain = -2.0 * (res.loglik - unres.loglik);
    CHECK(r.statistic == doctest::Approx(scale * plain).epsilon(1e-10));
    LrTestResult again = reduced_lr_from_fits(unres, res, 4);
    CHECK(again.statistic == doctest::Approx(r.statistic).epsilon(1e-12));
  }
  SUBCASE("a strong alternative is rejected decisively") {
    StackedDataset alt = simulate_builtin("small-1-h1", 500, 72);
    LrTestResult ra = test_reduced_equivalence(alt, lay, 1, first_obs());
    CHECK(ra.pvalue < 1e-6);
  }
}

TEST_CASE("the empirical-shape configuration compiles to 36 constraints") {
  // Two high-frequency variables, one low, two lags, one exogenous variable
  // entered as two stacked blocks of three slot columns: 8 + 8 dynamic
  // restrictions, 4 + 4 low-frequency ones, and 12 on the exogenous blocks.
  FrequencyLayout lay;
  lay.n_low = 1;
  lay.n_high = 2;
  lay.m = 3;
  lay.p = 2;

  RngStream rng(73, 0);
  const int T = 160;
  const int nn = lay.stacked_dim();
  Matrix A1 = 0.25 * random_matrix(nn, nn, rng);
  Matrix A2 = 0.10 * random_matrix(nn, nn, rng);
  Matrix Y(T, nn);
  Y.row(0).setZero();
  Y.row(1).setZero();
  Matrix L = cholesky(random_spd(nn, rng));
  Vector zero = Vector::Zero(nn);
  for (int t = 2; t < T; ++t) {
    Vector x = A1 * Y.row(t - 1).transpose() + A2 * Y.row(t - 2).transpose() +
               mvn_draw(zero, L, rng);
    Y.row(t) = x.transpose();
  }
  StackedDataset data;
  data.Y = Y;
  data.Z = random_matrix(T, 6, rng);
  for (int j = 0; j < nn; ++j) data.y_labels.push_back("y" + std::to_string(j));
  for (int j = 0; j < 6; ++j) data.z_labels.push_back("z" + std::to_string(j));

  LrTestResult r = test_reduced_equivalence(data, lay, 2, first_obs(), 1);
  CHECK(r.dof == 36);
  CHECK(r.statistic >= 0.0);

  SUBCASE("mismatched exogenous block declarations are rejected") {
    try {
      test_reduced_equivalence(data, lay, 2, first_obs(), 4);
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.category() == "InvalidArgument");
    }
  }
}

TEST_CASE("structural aggregation test counts newly binding constraints") {
  StackedDataset data = simulate_builtin("small-1-h0", 300, 74);
  FrequencyLayout lay = small_layout();

  SUBCASE("triangular maintained scheme leaves two binding constraints") {
    // A fixed at identity and B lower-triangular already force the slot-2/3
    // cells of the first row and the A-side cells; only the low-frequency
    // row's B cells newly bind.
    LrTestResult r = test_structural_equivalence(data, lay, 1, first_obs(),
                                                 cholesky_scheme(4));
    CHECK(r.dof == 2);
    CHECK(r.statistic >= 0.0);
    CHECK(r.pvalue == doctest::Approx(chi2_sf(r.statistic, 2)).epsilon(1e-12));
  }
  SUBCASE("a maintained scheme that implies the null degenerates") {
    std::vector<std::string> a_grid{
        "1", "0", "0", "0",
        "0", "1", "0", "0",
        "0", "0", "1", "0",
        "0", "0", "0", "1"};
    std::vector<std::string> b_grid{
        "*", "0", "0", "0",
        "*", "*", "0", "0",
        "*", "*", "*", "0",
        "*", "0", "0", "*"};
    AbRestrictions maintained = ab_from_patterns(a_grid, b_grid, 4);
    LrTestResult r =
        test_structural_equivalence(data, lay, 1, first_obs(), maintained);
    CHECK(r.dof == 0);
    CHECK(r.statistic == 0.0);
    CHECK(r.pvalue == 1.0);
  }
}

TEST_CASE("combined report carries both tests and the constraint counts") {
  StackedDataset data = simulate_builtin("small-1-h0", 109, 75);
  FrequencyLayout lay = small_layout();
  AbRestrictions maintained = cholesky_scheme(4);
  EquivalenceReport rep =
      run_equivalence(data, lay, 1, first_obs(), &maintained);

  CHECK(rep.counts.reduced == 4);
  CHECK(rep.counts.structural_raw == 8);
  CHECK(rep.counts.structural_net == 2);
  CHECK(rep.reduced.dof == 4);
  REQUIRE(rep.structural.has_value());
  CHECK(rep.structural->dof == 2);

  SUBCASE("identical inputs reproduce the identical report") {
    EquivalenceReport again =
        run_equivalence(data, lay, 1, first_obs(), &maintained);
    CHECK(again.reduced.statistic == rep.reduced.statistic);
    CHECK(again.structural->statistic == rep.structural->statistic);
    CHECK(again.reduced.pvalue == rep.reduced.pvalue);
  }
  SUBCASE("without a maintained scheme only the reduced test is run") {
    EquivalenceReport solo = run_equivalence(data, lay, 1, first_obs());
    CHECK(solo.reduced.dof == 4);
    CHECK(!solo.structural.has_value());
  }
}

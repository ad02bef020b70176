#include "doctest.h"
#include "helpers.hpp"

#include <msvar/layout.hpp>
#include <msvar/numerics.hpp>
#include <msvar/reduced_form.hpp>
#include <msvar/restrictions.hpp>
#include <msvar/rng.hpp>
#include <msvar/structural.hpp>

#include <cmath>
#include <string>
#include <vector>

using namespace msvar;
using msvar::testing::random_spd;

namespace {

FrequencyLayout empirical_layout() {
  FrequencyLayout lay;
  lay.n_low = 1;
  lay.n_high = 2;
  lay.m = 3;
  lay.p = 1;
  return lay;
}

}  // namespace

TEST_CASE("triangular scheme reproduces the covariance factor exactly") {
  // A fixed at identity with lower-triangular B is just identified: the ML
  // point is the Cholesky factor and the fit is perfect, so the structural
  // log-likelihood equals the unrestricted Gaussian one.
  RngStream rng(51, 0);
  for (int rep = 0; rep < 50; ++rep) {
    const int nn = 3;
    Matrix S = random_spd(nn, rng);
    const int Te = 80 + static_cast<int>(rng.uniform() * 200);
    AbStructure fit = estimate_ml_from_sigma(S, Te, cholesky_scheme(nn));
    CHECK(fit.converged);
    CHECK((fit.A - Matrix::Identity(nn, nn)).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((fit.B - cholesky(S)).cwiseAbs().maxCoeff() <= 1e-6);
    for (int j = 0; j < nn; ++j) CHECK(fit.B(j, j) >= 0.0);

    // Perfect fit: implied covariance reproduces S.
    Matrix Ainv = fit.A.inverse();
    Matrix implied = Ainv * fit.B * fit.B.transpose() * Ainv.transpose();
    CHECK((implied - S).cwiseAbs().maxCoeff() <=
          1e-6 * (1.0 + S.cwiseAbs().maxCoeff()));

    const double log2pi = std::log(8.0 * std::atan(1.0));
    double saturated =
        -0.5 * Te * (nn * log2pi + std::log(S.determinant()) + nn);
    CHECK(std::abs(fit.loglik - saturated) <= 1e-6);
  }
}

TEST_CASE("free-parameter counts of the built-in schemes") {
  CHECK(cholesky_scheme(3).q_A() == 0);
  CHECK(cholesky_scheme(3).q_B() == 6);
  CHECK(cholesky_scheme(7).q_B() == 28);

  FrequencyLayout lay = empirical_layout();
  AbRestrictions full = recursive_slot_scheme(lay);
  CHECK(full.q_A() == 12);
  CHECK(full.q_B() == 16);
  CHECK(full.q_A() + full.q_B() == 28);  // = 7*8/2, exactly identified

  AbRestrictions adjacent = recursive_slot_scheme(lay, false);
  CHECK(adjacent.q_A() == 8);
  CHECK(adjacent.q_B() == 16);

  try {
    FrequencyLayout other;
    other.n_low = 1;
    other.n_high = 1;
    other.m = 3;
    other.p = 1;
    recursive_slot_scheme(other);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.category() == "UnsupportedLayout");
  }
}

TEST_CASE("identification rank check") {
  RngStream rng(52, 0);
  Matrix S = random_spd(3, rng);

  SUBCASE("triangular scheme is exactly identified") {
    IdentificationReport rep = check_identification(cholesky_scheme(3), S);
    CHECK(rep.identified);
    CHECK(rep.required_rank == 18);
    CHECK(rep.jacobian_rank == 18);
    CHECK(rep.free_params == 6);
    CHECK(rep.overid_dof == 0);
  }
  SUBCASE("one extra zero gives one overidentifying degree") {
    AbRestrictions over = cholesky_scheme(3);
    over.on_B.append(LinearRestrictions::fix_entry(9, 2, 0.0));
    IdentificationReport rep = check_identification(over, S);
    CHECK(rep.identified);
    CHECK(rep.overid_dof == 1);
  }
  SUBCASE("a rotation-invariant block evades the rank condition") {
    // A = I and B block-diagonal with an unrestricted 2x2 top block: one
    // parameter short of saturation, yet the block is free to rotate, so
    // the scheme must be flagged unidentified.
    std::vector<std::string> a_grid{"1", "0", "0", "0", "1", "0",
                                    "0", "0", "1"};
    std::vector<std::string> b_grid{"*", "*", "0", "*", "*", "0",
                                    "0", "0", "*"};
    AbRestrictions r = ab_from_patterns(a_grid, b_grid, 3);
    CHECK(r.q_A() + r.q_B() == 5);
    IdentificationReport rep = check_identification(r, S);
    CHECK(!rep.identified);
    CHECK(rep.jacobian_rank < rep.required_rank);
  }
  SUBCASE("slot-recursive scheme is identified on a simulated covariance") {
    Matrix S7 = random_spd(7, rng);
    IdentificationReport rep =
        check_identification(recursive_slot_scheme(empirical_layout()), S7);
    CHECK(rep.identified);
    CHECK(rep.overid_dof == 0);
    CHECK(rep.required_rank == 2 * 49);
  }
  SUBCASE("every feasible point singular is reported as such") {
    std::vector<std::string> a_grid{"1", "0", "0", "0", "1", "0",
                                    "0", "0", "1"};
    std::vector<std::string> b_grid{"*", "*", "*", "*", "*", "0",
                                    "0", "0", "0"};  // zero last row
    AbRestrictions r = ab_from_patterns(a_grid, b_grid, 3);
    try {
      check_identification(r, S);
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.category() == "SingularA");
    }
  }
}

TEST_CASE("ML recovers a constructed slot-recursive structure") {
  FrequencyLayout lay = empirical_layout();
  AbRestrictions scheme = recursive_slot_scheme(lay);

  // Draw a feasible (A0, B0) with a positive B diagonal, moderate loadings.
  RngStream rng(53, 0);
  auto exA = scheme.on_A.to_explicit();
  auto exB = scheme.on_B.to_explicit();
  Vector gA(exA.free), gB(exB.free);
  for (int i = 0; i < gA.size(); ++i) gA[i] = 0.3 * rng.normal();
  for (int i = 0; i < gB.size(); ++i) gB[i] = 0.2 * rng.normal();
  Matrix A0 = unvec(exA.R * gA + exA.r, 7, 7);
  Matrix B0 = unvec(exB.R * gB + exB.r, 7, 7);
  B0.diagonal().array() += 1.0;  // diagonal cells are free in this scheme

  Matrix A0inv = A0.inverse();
  Matrix S = A0inv * B0 * B0.transpose() * A0inv.transpose();
  AbStructure fit = estimate_ml_from_sigma(0.5 * (S + S.transpose()), 50000,
                                           scheme);
  CHECK(fit.converged);
  CHECK((fit.A - A0).cwiseAbs().maxCoeff() <= 1e-4);
  CHECK((fit.B - B0).cwiseAbs().maxCoeff() <= 1e-4);

  SUBCASE("repeat runs are bit-identical") {
    AbStructure again = estimate_ml_from_sigma(0.5 * (S + S.transpose()),
                                               50000, scheme);
    CHECK((fit.A - again.A).cwiseAbs().maxCoeff() == 0.0);
    CHECK((fit.B - again.B).cwiseAbs().maxCoeff() == 0.0);
    CHECK(fit.loglik == again.loglik);
  }
}

TEST_CASE("more restrictions never raise the maximized likelihood") {
  RngStream rng(54, 0);
  Matrix S = random_spd(4, rng);
  AbStructure loose = estimate_ml_from_sigma(S, 109, cholesky_scheme(4));
  AbRestrictions tight = cholesky_scheme(4);
  tight.on_B.append(LinearRestrictions::fix_entry(16, 3, 0.0));  // B(3,0)=0
  AbStructure fit = estimate_ml_from_sigma(S, 109, tight);
  CHECK(fit.loglik <= loose.loglik + 1e-6);
  CHECK(fit.converged);
}

TEST_CASE("named hypothesis bundles compile and nest in the base scheme") {
  FrequencyLayout lay = empirical_layout();
  AbRestrictions base = recursive_slot_scheme(lay);
  const struct {
    const char* name;
    int dof;  // constraints added on top of the base scheme
  } presets[] = {{"slots-help-identify-mp", 6},
                 {"slots-help-identify-vix", 9},
                 {"first-month-only-drives-k", 4},
                 {"equal-mp-impact-across-months", 2},
                 {"equal-vix-impact-across-months", 2}};

  RngStream rng(55, 0);
  Matrix S = random_spd(7, rng);
  AbStructure unres = estimate_ml_from_sigma(S, 109, base);
  for (const auto& p : presets) {
    AbRestrictions r = hypothesis_preset(p.name, lay);
    CHECK(28 - (r.q_A() + r.q_B()) == p.dof);
    AbStructure fit = estimate_ml_from_sigma(S, 109, r);
    CHECK(fit.converged);
    CHECK(fit.loglik <= unres.loglik + 1e-6);
  }

  try {
    hypothesis_preset("no-such-bundle", lay);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.category() == "UnknownHypothesis");
  }
}

TEST_CASE("likelihood-ratio bookkeeping") {
  LrTestResult r = lr_test(-132.114, 37.881, 36);
  CHECK(r.statistic ==
        doctest::Approx(2.0 * (132.114 + 37.881)).epsilon(1e-12));
  CHECK(r.pvalue < 1e-12);
  CHECK(r.dof == 36);

  LrTestResult same = lr_test(-5.0, -5.0, 2);
  CHECK(same.statistic == 0.0);
  CHECK(same.pvalue == 1.0);

  LrTestResult generic = lr_test(-10.0, -8.0, 3);
  CHECK(generic.statistic == doctest::Approx(4.0));
  CHECK(generic.pvalue == doctest::Approx(chi2_sf(4.0, 3)).epsilon(1e-12));

  try {
    lr_test(-1.0, -2.0, 1);  // restricted above unrestricted
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.category() == "NestingViolation");
  }
  try {
    lr_test(-2.0, -1.0, 0);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.category() == "InvalidArgument");
  }
}

TEST_CASE("analytic gradient agrees with central differences") {
  RngStream rng(56, 0);
  const double h = 1e-6;
  for (int rep = 0; rep < 20; ++rep) {
    // Alternate between the two main schemes and random feasible points.
    bool chol = (rep % 2 == 0);
    AbRestrictions restr =
        chol ? cholesky_scheme(4) : recursive_slot_scheme(empirical_layout());
    const int nn = restr.nn;
    Matrix S = random_spd(nn, rng);
    int dim = restr.on_A.to_explicit().free + restr.on_B.to_explicit().free;
    Vector gamma(dim);
    for (int i = 0; i < dim; ++i) gamma[i] = 0.4 + 0.1 * rng.normal();
    Vector g = ab_gradient(restr, S, gamma);
    for (int i = 0; i < dim; ++i) {
      Vector gp = gamma, gm = gamma;
      gp[i] += h;
      gm[i] -= h;
      double fd =
          (ab_objective(restr, S, gp) - ab_objective(restr, S, gm)) / (2 * h);
      CHECK(std::abs(fd - g[i]) <= 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

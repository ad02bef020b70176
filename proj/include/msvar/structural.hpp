#pragma once

#include "msvar/layout.hpp"
#include "msvar/reduced_form.hpp"
#include "msvar/restrictions.hpp"
#include "msvar/types.hpp"

#include <string>
#include <vector>

namespace msvar {

// Linear restrictions on the structural pair (A, B) of A u(t) = B e(t),
// e(t) ~ (0, I). Each side is a constraint system over the column-stacked
// vec of an nn x nn matrix.
struct AbRestrictions {
  int nn = 0;
  LinearRestrictions on_A;
  LinearRestrictions on_B;

  int q_A() const { return nn * nn - on_A.rank(); }  // free parameters in A
  int q_B() const { return nn * nn - on_B.rank(); }
};

struct AbStructure {
  Matrix A;
  Matrix B;
  AbRestrictions restrictions;
  double loglik = 0.0;            // Gaussian log-likelihood incl. constant
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;     // per-observation objective gradient
};

struct IdentificationReport {
  int jacobian_rank = 0;
  int required_rank = 0;  // 2 * nn^2
  bool identified = false;
  int free_params = 0;    // q_A + q_B
  int overid_dof = 0;     // nn(nn+1)/2 - free_params
};

struct LrTestResult {
  double statistic = 0.0;
  int dof = 0;
  double pvalue = 1.0;
  double l_restricted = 0.0;
  double l_unrestricted = 0.0;
};

// A fixed to the identity, B lower-triangular with free entries: the
// canonical just-identified recursive scheme.
AbRestrictions cholesky_scheme(int nn);

// The within-period recursive scheme for one low-frequency variable and two
// high-frequency variables: A has unit diagonal, each later slot's equations
// load unrestricted on all earlier slots' residuals (full_recursion), or on
// the immediately preceding slot only (full_recursion = false); the
// low-frequency row of A is unit-diagonal only. B is lower-triangular within
// each slot's 2x2 block (the second variable loads the first variable's
// same-slot shock) and the low-frequency row of B is fully free.
// Throws UnsupportedLayout unless n_high == 2 and n_low == 1.
AbRestrictions recursive_slot_scheme(const FrequencyLayout& layout,
                                     bool full_recursion = true);

// Pattern-grid construction over {0, 1, *, =k} tokens (row-major grids).
AbRestrictions ab_from_patterns(const std::vector<std::string>& a_grid,
                                const std::vector<std::string>& b_grid,
                                int nn);

// Named overidentified variants of the recursive slot scheme:
//   slots-help-identify-mp        later-slot policy equations load nothing
//                                 from earlier slots (6 extra zeros in A)
//   slots-help-identify-vix       volatility equations load nothing from
//                                 earlier slots or the same-slot policy shock
//                                 (6 extra zeros in A, 3 in B)
//   first-month-only-drives-k     low-frequency row of B zero on all slot-2
//                                 and slot-3 shocks (4 extra zeros)
//   equal-mp-impact-across-months low-frequency B loadings on the policy
//                                 shock equal across slots (2 equalities)
//   equal-vix-impact-across-months same for the second variable's shock
AbRestrictions hypothesis_preset(const std::string& name,
                                 const FrequencyLayout& layout);
std::vector<std::string> hypothesis_preset_names();

// Rank condition for local identification, evaluated either at a supplied
// feasible point or at randomized feasible points (majority over 5 draws).
IdentificationReport check_identification(const AbRestrictions& restr,
                                          const Matrix& sigma_u);
IdentificationReport check_identification_at(const AbRestrictions& restr,
                                             const Matrix& sigma_u,
                                             const Matrix& A, const Matrix& B);

struct MlOptions {
  int max_iterations = 2000;
  double loglik_rel_tol = 1e-10;
  double gradient_tol = 1e-6;
  bool require_convergence = true;  // throw NonConvergence vs. flag only
};

// Maximum likelihood for (A, B) given the reduced-form residual covariance:
// maximizes T/2 * [2 ln|det A| - 2 ln|det B| - tr(B^-1 A S A' B^-T)] - const
// over the free coordinates of the explicit parameterization, quasi-Newton
// with backtracking. Reported B has non-negative diagonal (column sign flips
// where the restrictions allow).
AbStructure estimate_ml(const ReducedFormFit& fit,
                        const AbRestrictions& restr,
                        const MlOptions& options = MlOptions());
AbStructure estimate_ml_from_sigma(const Matrix& sigma_u, int effective_T,
                                   const AbRestrictions& restr,
                                   const MlOptions& options = MlOptions());

// LR = max(0, -2 (l_restricted - l_unrestricted)) against chi-square(dof).
// Throws NestingViolation when l_restricted > l_unrestricted + 1e-6.
LrTestResult lr_test(double l_restricted, double l_unrestricted, int dof);

// Per-observation concentrated objective minimized by estimate_ml, and its
// analytic gradient, both over the free coordinates gamma of the explicit
// parameterization ([A block | B block]). Exposed so the gradient can be
// checked against finite differences.
double ab_objective(const AbRestrictions& restr, const Matrix& sigma_u,
                    const Vector& gamma);
Vector ab_gradient(const AbRestrictions& restr, const Matrix& sigma_u,
                   const Vector& gamma);

}  // namespace msvar

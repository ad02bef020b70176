#pragma once

#include "msvar/dataset.hpp"
#include "msvar/layout.hpp"
#include "msvar/restrictions.hpp"
#include "msvar/types.hpp"

#include <vector>

namespace msvar {

// Estimated stacked VAR: x~(t) = c + sum_i A_i x~(t-i) + C z(t) + u(t).
struct ReducedFormFit {
  FrequencyLayout layout;
  int p = 0;
  bool intercept = true;

  Vector c;                        // stacked_dim (zero when no intercept)
  std::vector<Matrix> lag_coeffs;  // p matrices, stacked_dim x stacked_dim
  Matrix exog_coeffs;              // stacked_dim x k
  Matrix residuals;                // (T - p) x stacked_dim
  Matrix sigma_u;                  // residual covariance, divisor T - p
  double loglik = 0.0;             // Gaussian log-likelihood incl. constant
  double loglik_excl_const = 0.0;  // without the n~*ln(2*pi) term
  int effective_T = 0;
  int n_free_coeffs = 0;           // free mean parameters

  CoefficientLayout coef_layout() const;
  // Theta (K x stacked_dim) with regressor order [intercept, lags, exog].
  Matrix coefficient_matrix() const;
};

// Multivariate least squares (= Gaussian ML for the unrestricted mean).
// Throws RankDeficientRegressors / InsufficientSample.
ReducedFormFit estimate_ols(const StackedDataset& data,
                            const FrequencyLayout& layout, int p,
                            bool intercept = true);

// Gaussian ML under linear equality constraints on vec(Theta): iterated
// feasible GLS on the explicit parameterization vec(Theta) = R*gamma + r,
// with the residual covariance updated until the log-likelihood converges.
// An empty restriction set reproduces estimate_ols.
ReducedFormFit estimate_restricted(const StackedDataset& data,
                                   const FrequencyLayout& layout, int p,
                                   const LinearRestrictions& restrictions,
                                   bool intercept = true);

struct CriterionRow {
  int p;
  double aic;
  double bic;
  double loglik;
  int n_params;
};

// AIC/BIC over p = 1..p_max on the common sample (rows p_max+1..T).
std::vector<CriterionRow> information_criteria(const StackedDataset& data,
                                               const FrequencyLayout& layout,
                                               int p_max,
                                               bool intercept = true);

// Largest eigenvalue modulus of the companion matrix of the lag polynomial.
double companion_spectral_radius(const std::vector<Matrix>& lag_coeffs);
double companion_spectral_radius(const ReducedFormFit& fit);

}  // namespace msvar

#pragma once

#include "msvar/restrictions.hpp"
#include "msvar/types.hpp"

#include <string>
#include <vector>

namespace msvar {

// Frequency geometry of the stacked system. One low-frequency period contains
// m high-frequency slots; the stacked state is
//   x~(t) = (x_H(t,1), ..., x_H(t,m), x_L(t)),
// where each x_H(t,j) holds the n_high high-frequency variables observed in
// slot j and x_L(t) holds the n_low low-frequency variables.
struct FrequencyLayout {
  int n_low = 0;   // low-frequency variables
  int n_high = 0;  // high-frequency variables
  int m = 3;       // high-frequency slots per low-frequency period
  int p = 1;       // lag order in low-frequency time

  int stacked_dim() const { return n_low + m * n_high; }

  // Position of high-frequency variable `var` (0-based) in slot `slot`
  // (1-based) within the stacked vector.
  int high_index(int var, int slot) const { return (slot - 1) * n_high + var; }
  int low_index(int var) const { return m * n_high + var; }

  void validate() const;
};

enum class AggregationKind { FirstObservation, LastObservation, Sum, Average };

// Aggregation scheme collapsing the stacked vector to one value per variable
// per low-frequency period. Mixed schemes assign a kind per high-frequency
// variable.
struct AggregationScheme {
  bool mixed = false;
  AggregationKind kind = AggregationKind::FirstObservation;
  std::vector<AggregationKind> per_variable;  // used when mixed

  static AggregationScheme uniform(AggregationKind k);
  static AggregationScheme make_mixed(std::vector<AggregationKind> kinds);

  // Accepts the configuration names: first, last, sum, average, or
  // mixed:first,sum,... (one kind per high-frequency variable).
  static AggregationScheme from_name(const std::string& name);
  std::string name() const;

  bool operator==(const AggregationScheme& other) const;
};

int stacked_dim(const FrequencyLayout& layout);

// The (n_low + n_high) x stacked_dim matrix G mapping x~(t) to the
// homogeneous-frequency vector: first the aggregated high-frequency
// variables, then the low-frequency ones. FirstObservation selects slot 1,
// LastObservation slot m, Sum weights every slot 1, Average weights 1/m.
// Throws SchemeMismatch when a mixed assignment does not cover n_high.
Matrix selection_matrix(const FrequencyLayout& layout,
                        const AggregationScheme& scheme);

// Geometry of the reduced-form coefficient matrix Theta (K x stacked_dim)
// for Y = X * Theta + E with regressor order [intercept, lag 1, ..., lag p,
// exogenous blocks]. Restrictions on reduced-form coefficients address
// vec(Theta) (column-stacked).
struct CoefficientLayout {
  int nn = 0;            // stacked dimension (columns of Theta = equations)
  int p = 0;             // endogenous lags
  bool intercept = true;
  int n_exog = 0;        // exogenous regressor columns

  int K() const { return (intercept ? 1 : 0) + p * nn + n_exog; }
  int row_intercept() const { return 0; }
  int row_lag(int lag, int var) const {  // lag 1-based, var 0-based
    return (intercept ? 1 : 0) + (lag - 1) * nn + var;
  }
  int row_exog(int j) const { return (intercept ? 1 : 0) + p * nn + j; }
  // vec(Theta) index of Theta[row, col].
  int vec_index(int row, int col) const { return col * K() + row; }
};

// Linear constraints on vec(Theta) under which the aggregated process
// G x~(t) follows a VAR(p) in its own past (with aggregated exogenous
// regressors): for every lag i, G A_i (I - G+G) = 0, and for every exogenous
// block j, G C_j (I - Gz+Gz) = 0 where Gz aggregates the per-slot exogenous
// columns of that block. exog_blocks lists the column ranges of Z holding one
// stacked block (m consecutive columns per exogenous variable).
LinearRestrictions reduced_equivalence_restrictions(
    const FrequencyLayout& layout, const AggregationScheme& scheme,
    const CoefficientLayout& coef, int n_exog_vars = 0);

// Same compatibility constraints applied to the structural matrices:
// G A (I - G+G) = 0 and G B (I - G+G) = 0, each over vec of an
// stacked_dim x stacked_dim matrix. Returns {on_A, on_B}.
std::pair<LinearRestrictions, LinearRestrictions>
structural_equivalence_restrictions(const FrequencyLayout& layout,
                                    const AggregationScheme& scheme);

}  // namespace msvar

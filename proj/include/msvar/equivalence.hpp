#pragma once

#include "msvar/dataset.hpp"
#include "msvar/layout.hpp"
#include "msvar/reduced_form.hpp"
#include "msvar/structural.hpp"
#include "msvar/types.hpp"

#include <optional>

namespace msvar {

// Counts of the cross-coefficient compatibility constraints imposed by an
// aggregation scheme, before and after removing those already implied by the
// maintained structural restrictions.
struct RestrictionCounts {
  int reduced = 0;         // rank of the reduced-form constraint system
  int structural_raw = 0;  // rank of the scheme constraints on (A, B) alone
  int structural_net = 0;  // newly binding rank on top of the maintained model
};

struct EquivalenceReport {
  AggregationScheme scheme;
  LrTestResult reduced;
  std::optional<LrTestResult> structural;
  RestrictionCounts counts;
};

// LR test of the cross-coefficient restrictions under which the stacked model
// collapses to a model for the aggregated series under `scheme`. The
// restricted model is re-estimated by iterated feasible GLS. Exogenous
// columns, when present, must form blocks of m * n_exog_vars slot-major
// columns; n_exog_vars = -1 assumes one variable per block of m columns
// (the loader's layout).
LrTestResult test_reduced_equivalence(const StackedDataset& data,
                                      const FrequencyLayout& layout, int p,
                                      const AggregationScheme& scheme,
                                      int n_exog_vars = -1);

// Statistic formation shared by test_reduced_equivalence and the Monte
// Carlo driver: plain LR scaled by a small-sample factor (Sims'
// degrees-of-freedom correction plus the Box dimensional term) before the
// chi-square p-value. Logliks are reported unscaled.
LrTestResult reduced_lr_from_fits(const ReducedFormFit& unres,
                                  const ReducedFormFit& res, int dof);

// LR test of the additional constraints the scheme imposes on an identified
// AB structure. Degrees of freedom count only constraints not already implied
// by the maintained restrictions. A zero-dof result is returned degenerate
// (statistic 0, p-value 1) without re-estimation.
LrTestResult test_structural_equivalence(const StackedDataset& data,
                                         const FrequencyLayout& layout, int p,
                                         const AggregationScheme& scheme,
                                         const AbRestrictions& maintained,
                                         const MlOptions& ml = {});

// Convenience wrapper running the reduced-form test and, when `maintained`
// is provided, the structural test, with the restriction-count bookkeeping.
EquivalenceReport run_equivalence(const StackedDataset& data,
                                  const FrequencyLayout& layout, int p,
                                  const AggregationScheme& scheme,
                                  const AbRestrictions* maintained = nullptr,
                                  int n_exog_vars = -1,
                                  const MlOptions& ml = {});

}  // namespace msvar

#pragma once

#include "msvar/dataset.hpp"
#include "msvar/reduced_form.hpp"
#include "msvar/structural.hpp"
#include "msvar/types.hpp"

#include <cstdint>
#include <vector>

namespace msvar {

// Moving-average representation x~(t) = sum_k C_k u(t-k), C_0 = I.
struct VmaCoefficients {
  std::vector<Matrix> C;  // C[0..H]
  int horizon() const { return static_cast<int>(C.size()) - 1; }
};

// responses[h](i, j): response of stacked variable i to a one-standard-
// deviation structural shock j, h low-frequency periods after impact.
// lower/upper are percentile bootstrap bands when present.
struct IrfSet {
  std::vector<Matrix> point;
  std::vector<Matrix> lower;
  std::vector<Matrix> upper;
  double level = 0.0;     // band confidence level, 0 when bands absent
  int n_boot_used = 0;
  int n_boot_failed = 0;

  bool has_bands() const { return !lower.empty(); }
};

// shares[h](i, j): percentage of the h-step forecast-error variance of
// variable i attributed to shock j. Rows sum to 100.
struct FevdTable {
  std::vector<Matrix> shares;
};

// C_0 = I, C_k = sum_{i=1..min(k,p)} A_i C_{k-i}.
VmaCoefficients vma_from_var(const std::vector<Matrix>& lag_coeffs, int H);

// responses[h] = C_h * A^-1 B. Throws SingularA.
IrfSet structural_irf(const VmaCoefficients& vma, const AbStructure& ab);

FevdTable fevd(const VmaCoefficients& vma, const AbStructure& ab, int H);

struct BootstrapOptions {
  int horizon = 20;
  int n_boot = 999;
  double level = 0.90;
  std::uint64_t seed = 1;
  int workers = 0;  // 0 = hardware concurrency
  MlOptions ml;
};

// Percentile bands from iid residual resampling: pseudo-samples rebuilt
// recursively from the estimated coefficients with the original first p rows
// as initial conditions and exogenous regressors held at observed values.
// Replications whose re-estimation fails are dropped and counted; more than
// 10% failures raises TooManyFailures. Deterministic in (seed, worker count).
IrfSet bootstrap_bands(const StackedDataset& data,
                       const FrequencyLayout& layout, int p,
                       const AbRestrictions& restr,
                       const BootstrapOptions& options);

}  // namespace msvar

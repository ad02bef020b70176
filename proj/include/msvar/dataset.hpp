#pragma once

#include "msvar/types.hpp"

#include <string>
#include <vector>

namespace msvar {

// Assembled estimation sample: one row per low-frequency period, endogenous
// columns in stacked order, exogenous columns as declared. No missing values.
struct StackedDataset {
  Matrix Y;  // T x stacked_dim
  Matrix Z;  // T x k, k >= 0
  std::vector<std::string> y_labels;
  std::vector<std::string> z_labels;
  std::vector<std::string> periods;  // optional, length T when present

  int T() const { return static_cast<int>(Y.rows()); }
};

}  // namespace msvar

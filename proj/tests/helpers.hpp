#pragma once

#include <msvar/montecarlo.hpp>
#include <msvar/rng.hpp>
#include <msvar/types.hpp>

#include <string>

namespace msvar::testing {

// Simulated draw from a built-in design, fixed stream so every test that
// shares (name, T, seed) sees identical data.
inline StackedDataset simulate_builtin(const std::string& name, int T,
                                       std::uint64_t seed) {
  DgpSpec dgp = builtin_dgp(name);
  dgp.T = T;
  RngStream rng(seed, 0);
  return simulate(dgp, rng);
}

inline Matrix random_spd(int n, RngStream& rng, double ridge = 0.5) {
  Matrix Z(n, 2 * n + 4);
  for (int i = 0; i < Z.rows(); ++i)
    for (int j = 0; j < Z.cols(); ++j) Z(i, j) = rng.normal();
  Matrix S = Z * Z.transpose() / static_cast<double>(Z.cols());
  S.diagonal().array() += ridge;
  return S;
}

inline Matrix random_matrix(int rows, int cols, RngStream& rng) {
  Matrix M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = rng.normal();
  return M;
}

}  // namespace msvar::testing

#include "msvar/dynamics.hpp"

#include "msvar/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

namespace msvar {

VmaCoefficients vma_from_var(const std::vector<Matrix>& lag_coeffs, int H) {
  if (H < 0) fail("InvalidArgument", "vma horizon must be >= 0");
  if (lag_coeffs.empty()) fail("InvalidArgument", "vma requires at least one lag matrix");
  const auto nn = lag_coeffs[0].rows();
  for (const auto& a : lag_coeffs)
    if (a.rows() != nn || a.cols() != nn)
      fail("InvalidArgument", "lag matrices must be square and same size");
  const int p = static_cast<int>(lag_coeffs.size());

  VmaCoefficients out;
  out.C.resize(H + 1);
  out.C[0] = Matrix::Identity(nn, nn);
  for (int k = 1; k <= H; ++k) {
    Matrix c = Matrix::Zero(nn, nn);
    for (int i = 1; i <= std::min(k, p); ++i) c += lag_coeffs[i - 1] * out.C[k - i];
    out.C[k] = c;
  }
  return out;
}

namespace {

// Impact matrix A^-1 B of the structural model.
Matrix impact_matrix(const AbStructure& ab) {
  Eigen::PartialPivLU<Matrix> lu(ab.A);
  const double det = std::abs(lu.determinant());
  if (!(det > 1e-200)) fail("SingularA", "contemporaneous matrix is singular");
  return lu.solve(ab.B);
}

// Linear-interpolation quantile on sorted data (same rule as numpy default).
double sorted_quantile(const std::vector<double>& sorted, double q) {
  const int n = static_cast<int>(sorted.size());
  if (n == 1) return sorted[0];
  const double pos = q * (n - 1);
  const int lo = static_cast<int>(std::floor(pos));
  const int hi = std::min(lo + 1, n - 1);
  const double w = pos - lo;
  return sorted[lo] * (1.0 - w) + sorted[hi] * w;
}

}  // namespace

IrfSet structural_irf(const VmaCoefficients& vma, const AbStructure& ab) {
  const Matrix impact = impact_matrix(ab);
  IrfSet out;
  out.point.reserve(vma.C.size());
  for (const auto& c : vma.C) out.point.push_back(c * impact);
  return out;
}

FevdTable fevd(const VmaCoefficients& vma, const AbStructure& ab, int H) {
  if (H < 0 || H > vma.horizon())
    fail("InvalidArgument", "fevd horizon outside computed range");
  const Matrix impact = impact_matrix(ab);
  const auto nn = impact.rows();

  FevdTable out;
  out.shares.resize(H + 1);
  Matrix cum = Matrix::Zero(nn, nn);  // cumulative squared responses
  for (int h = 0; h <= H; ++h) {
    const Matrix theta = vma.C[h] * impact;
    cum += theta.cwiseProduct(theta);
    Matrix sh = Matrix::Zero(nn, nn);
    for (Eigen::Index i = 0; i < nn; ++i) {
      const double denom = cum.row(i).sum();
      if (denom > 0.0) sh.row(i) = 100.0 * cum.row(i) / denom;
    }
    out.shares[h] = sh;
  }
  return out;
}

namespace {

struct RepOutcome {
  bool ok = false;
  std::vector<Matrix> irf;  // 0..H
};

// One bootstrap replication: resample residual rows, rebuild the sample
// recursively, re-fit, return the re-estimated IRF.
RepOutcome run_replication(const StackedDataset& data,
                           const FrequencyLayout& layout, int p,
                           const AbRestrictions& restr,
                           const ReducedFormFit& base, int H,
                           const MlOptions& ml, std::uint64_t seed,
                           std::uint64_t rep) {
  RepOutcome out;
  RngStream rng(seed, rep);
  const int T = data.T();
  const int t_eff = base.effective_T;
  const auto nn = data.Y.cols();

  Matrix y = data.Y;
  const int start = T - t_eff;  // first rebuilt row
  for (int t = start; t < T; ++t) {
    const int pick = static_cast<int>(rng.uniform() * t_eff);
    const Eigen::Index row = std::min<Eigen::Index>(pick, t_eff - 1);
    Vector x = base.c;
    for (int i = 1; i <= p; ++i) x += base.lag_coeffs[i - 1] * y.row(t - i).transpose();
    if (data.Z.cols() > 0) x += base.exog_coeffs * data.Z.row(t).transpose();
    y.row(t) = x.transpose() + base.residuals.row(row);
  }

  StackedDataset pseudo{y, data.Z, data.y_labels, data.z_labels, data.periods};
  try {
    ReducedFormFit fit = estimate_ols(pseudo, layout, p);
    AbStructure ab = estimate_ml(fit, restr, ml);
    VmaCoefficients vma = vma_from_var(fit.lag_coeffs, H);
    IrfSet irf = structural_irf(vma, ab);
    out.irf = std::move(irf.point);
    out.ok = true;
  } catch (const Error&) {
    out.ok = false;
  }
  (void)nn;
  return out;
}

}  // namespace

IrfSet bootstrap_bands(const StackedDataset& data,
                       const FrequencyLayout& layout, int p,
                       const AbRestrictions& restr,
                       const BootstrapOptions& options) {
  if (options.n_boot < 1) fail("InvalidArgument", "bootstrap requires n_boot >= 1");
  if (!(options.level > 0.0 && options.level < 1.0))
    fail("InvalidArgument", "band level must be in (0, 1)");
  const int H = options.horizon;

  ReducedFormFit base = estimate_ols(data, layout, p);
  AbStructure ab = estimate_ml(base, restr, options.ml);
  VmaCoefficients vma = vma_from_var(base.lag_coeffs, H);
  IrfSet out = structural_irf(vma, ab);
  out.level = options.level;

  const int R = options.n_boot;
  std::vector<RepOutcome> reps(R);
  int workers = options.workers > 0
                    ? options.workers
                    : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = std::min(workers, R);

  MlOptions ml = options.ml;
  auto run_range = [&](int lo, int hi) {
    for (int r = lo; r < hi; ++r)
      reps[r] = run_replication(data, layout, p, restr, base, H, ml,
                                options.seed, static_cast<std::uint64_t>(r) + 1);
  };
  if (workers == 1) {
    run_range(0, R);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (R + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const int lo = w * chunk;
      const int hi = std::min(R, lo + chunk);
      if (lo < hi) pool.emplace_back(run_range, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  int used = 0;
  for (const auto& r : reps)
    if (r.ok) ++used;
  const int failed = R - used;
  if (failed * 10 > R)
    fail("TooManyFailures", "more than 10% of bootstrap replications failed");

  const auto nn = out.point[0].rows();
  out.lower.assign(H + 1, Matrix::Zero(nn, nn));
  out.upper.assign(H + 1, Matrix::Zero(nn, nn));
  const double alpha = 1.0 - options.level;
  std::vector<double> draws;
  draws.reserve(used);
  for (int h = 0; h <= H; ++h) {
    for (Eigen::Index i = 0; i < nn; ++i) {
      for (Eigen::Index j = 0; j < nn; ++j) {
        draws.clear();
        for (const auto& r : reps)
          if (r.ok) draws.push_back(r.irf[h](i, j));
        std::sort(draws.begin(), draws.end());
        out.lower[h](i, j) = sorted_quantile(draws, alpha / 2.0);
        out.upper[h](i, j) = sorted_quantile(draws, 1.0 - alpha / 2.0);
      }
    }
  }
  out.n_boot_used = used;
  out.n_boot_failed = failed;
  return out;
}

}  // namespace msvar

#include "msvar/montecarlo.hpp"

#include "msvar/equivalence.hpp"
#include "msvar/numerics.hpp"
#include "msvar/reduced_form.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <thread>

namespace msvar {

namespace {

Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const int r = static_cast<int>(rows.size());
  const int c = static_cast<int>(rows.begin()->size());
  Matrix out(r, c);
  int i = 0;
  for (const auto& row : rows) {
    int j = 0;
    for (double v : row) out(i, j++) = v;
    ++i;
  }
  return out;
}

// Small-scale design: one low-frequency and one high-frequency variable,
// three slots, one lag. Model 1 is an estimated system; models 2 and 3 are
// synthetic designs differing only in the entries the null constrains.
Matrix small_1_lag() {
  return from_rows({{-0.066, -0.344, 1.398, 0.003},
                    {-0.319, -0.352, 1.641, 0.003},
                    {-0.505, -0.248, 1.727, 0.003},
                    {-4.005, 0.340, 3.276, 0.524}});
}

Matrix small_sigma() {
  return from_rows({{0.029, 0.051, 0.065, 0.385},
                    {0.051, 0.119, 0.153, 0.873},
                    {0.065, 0.153, 0.219, 0.935},
                    {0.385, 0.873, 0.935, 94.231}});
}

Matrix small_2_lag() {
  return from_rows({{0.3, 0.1, 0.1, 0.0},
                    {0.1, 0.2, 0.3, 0.0},
                    {0.1, 0.1, 0.4, 0.0},
                    {0.0, 0.1, 0.1, 0.5}});
}

Matrix small_3_lag() {
  return from_rows({{0.3, 0.03, 0.08, 0.0},
                    {0.1, 0.2, 0.3, 0.0},
                    {0.1, 0.1, 0.4, 0.0},
                    {0.0, 0.02, 0.01, 0.5}});
}

// Medium-scale covariance (three high-frequency variables, one low-frequency
// variable). Printed with three decimals, so the third variable's slot-1
// variance rounds to zero and the matrix needs the PSD repair.
Matrix medium_sigma() {
  return from_rows(
      {{0.028, -0.004, -0.001, 0.046, -0.003, 0.000, 0.058, -0.005, -0.001, 0.204},
       {-0.004, 0.023, 0.001, -0.003, 0.022, 0.001, 0.001, 0.020, 0.001, -0.285},
       {-0.001, 0.001, 0.000, -0.001, 0.002, 0.000, 0.000, 0.002, 0.000, 0.005},
       {0.046, -0.003, -0.001, 0.102, -0.003, -0.001, 0.132, -0.008, -0.001, 0.350},
       {-0.003, 0.022, 0.002, -0.003, 0.045, 0.003, 0.001, 0.041, 0.003, -0.438},
       {0.000, 0.001, 0.000, -0.001, 0.003, 0.001, 0.000, 0.003, 0.001, -0.011},
       {0.058, 0.001, 0.000, 0.132, 0.001, 0.000, 0.193, -0.006, -0.001, 0.289},
       {-0.005, 0.020, 0.002, -0.008, 0.041, 0.003, -0.006, 0.051, 0.004, -0.389},
       {-0.001, 0.001, 0.000, -0.001, 0.003, 0.001, -0.001, 0.004, 0.001, -0.025},
       {0.204, -0.285, 0.005, 0.350, -0.438, -0.011, 0.289, -0.389, -0.025, 82.278}});
}

// Expands a 4x4 seed (three slot coefficients plus the low-frequency
// variable) to the 10x10 stacked matrix of the (n_low=1, n_high=3, m=3)
// layout: slot-to-slot blocks become scalar multiples of I_3, the
// low-frequency row and column load every variable of a slot equally.
Matrix lift_medium(const Matrix& base) {
  Matrix out = Matrix::Zero(10, 10);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j)
      out.block(3 * i, 3 * j, 3, 3) = base(i, j) * Matrix::Identity(3, 3);
    out.block(3 * i, 9, 3, 1).setConstant(base(i, 3));
    out.block(9, 3 * i, 1, 3).setConstant(base(3, i));
  }
  out(9, 9) = base(3, 3);
  return out;
}

// Medium-scale model 1 dynamics: a persistent stationary design (the kind a
// fit to monthly rate / volatility / cycle data produces) whose restricted
// version is also stationary. Persistence drives the documented finite-sample
// over-rejection of the null experiment; the cross-slot loadings keep the
// alternative far enough from the null that it is rejected at every level.
Matrix medium_1_base() {
  return from_rows({{0.80, 0.12, 0.12, 0.003},
                    {0.07, 0.55, 0.30, 0.003},
                    {0.07, 0.30, 0.55, 0.003},
                    {-1.00, 0.45, 0.45, 0.70}});
}

// Entries of the stacked lag matrix constrained to zero under the
// first-observation null: slot-1 equations and the low-frequency equation
// must not load slots 2..m.
std::vector<std::pair<int, int>> null_zero_entries(const FrequencyLayout& lay) {
  std::vector<std::pair<int, int>> out;
  const int nn = lay.stacked_dim();
  for (int col = lay.n_high; col < lay.m * lay.n_high; ++col) {
    for (int row = 0; row < lay.n_high; ++row) out.emplace_back(row, col);
    for (int row = lay.m * lay.n_high; row < nn; ++row) out.emplace_back(row, col);
  }
  return out;
}

Matrix zero_restricted(const Matrix& A, const FrequencyLayout& lay) {
  Matrix out = A;
  for (const auto& [i, j] : null_zero_entries(lay)) out(i, j) = 0.0;
  return out;
}

// Zeroing makes the lag matrix block triangular: slots 2..m load only on
// themselves, so their sub-block contributes its eigenvalues unchanged. When
// that block is explosive no restricted matrix near the source exists; the
// null stand-in rescales the block to the spectral radius of the coupled
// remainder (slot-1 and low-frequency rows), giving both diagonal blocks the
// same persistence, and leaves every other entry at its printed value.
Matrix stabilized_null(const Matrix& A, const FrequencyLayout& lay) {
  Matrix out = zero_restricted(A, lay);
  const int lo = lay.n_high;
  const int len = (lay.m - 1) * lay.n_high;
  const double rho_block = spectral_radius(out.block(lo, lo, len, len));
  if (rho_block < 1.0) return out;

  const int nn = lay.stacked_dim();
  Matrix rest(nn - len, nn - len);
  std::vector<int> keep;
  for (int i = 0; i < lo; ++i) keep.push_back(i);
  for (int i = lo + len; i < nn; ++i) keep.push_back(i);
  for (size_t a = 0; a < keep.size(); ++a)
    for (size_t b = 0; b < keep.size(); ++b) rest(a, b) = out(keep[a], keep[b]);
  out.block(lo, lo, len, len) *= spectral_radius(rest) / rho_block;
  return out;
}

Matrix maybe_repair(const Matrix& S) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (S + S.transpose()));
  if (es.info() != Eigen::Success) fail("SvdFailure", "eigendecomposition failed");
  const double floor = 1e-6 * std::max(es.eigenvalues().maxCoeff(), 0.0);
  if (es.eigenvalues().minCoeff() >= floor) return S;
  return repair_covariance(S);
}

DgpSpec make_dgp(const std::string& name, const FrequencyLayout& lay,
                 Matrix lag, Matrix sigma, bool approx, std::string note) {
  DgpSpec d;
  d.name = name;
  d.layout = lay;
  d.lag_coeffs.push_back(std::move(lag));
  d.intercept = Vector::Zero(lay.stacked_dim());
  d.sigma_u = maybe_repair(sigma);
  d.approximate_h0 = approx;
  d.note = std::move(note);
  return d;
}

}  // namespace

Matrix repair_covariance(const Matrix& S) {
  if (S.rows() != S.cols()) fail("InvalidArgument", "covariance must be square");
  Matrix sym = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success) fail("SvdFailure", "eigendecomposition failed");
  Vector lam = es.eigenvalues();
  const double floor = 1e-6 * std::max(lam.maxCoeff(), 0.0);
  if (floor <= 0.0) fail("NotPositiveDefinite", "covariance has no positive eigenvalue");
  for (Eigen::Index i = 0; i < lam.size(); ++i) lam(i) = std::max(lam(i), floor);
  Matrix out = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

std::vector<std::string> builtin_dgp_names() {
  return {"small-1-h1", "small-1-h0", "small-2-h1", "small-2-h0",
          "small-3-h1", "small-3-h0", "medium-1-h1", "medium-1-h0",
          "medium-2-h1", "medium-2-h0", "medium-3-h1", "medium-3-h0"};
}

DgpSpec builtin_dgp(const std::string& name) {
  const FrequencyLayout small{1, 1, 3, 1};
  const FrequencyLayout medium{1, 3, 3, 1};

  if (name == "small-1-h1")
    return make_dgp(name, small, small_1_lag(), small_sigma(), false,
                    "small-scale alternative, estimated system");
  if (name == "small-1-h0")
    return make_dgp(name, small, stabilized_null(small_1_lag(), small),
                    small_sigma(), true,
                    "approximate null: restricted entries zeroed, decoupled "
                    "slot block rescaled for stationarity");
  if (name == "small-2-h1")
    return make_dgp(name, small, small_2_lag(), small_sigma(), false,
                    "small-scale alternative, moderate cross-slot loadings");
  if (name == "small-2-h0")
    return make_dgp(name, small, zero_restricted(small_2_lag(), small),
                    small_sigma(), false, "null model: restricted entries zero");
  if (name == "small-3-h1")
    return make_dgp(name, small, small_3_lag(), small_sigma(), false,
                    "small-scale alternative, weak cross-slot loadings");
  if (name == "small-3-h0")
    return make_dgp(name, small, zero_restricted(small_3_lag(), small),
                    small_sigma(), false, "null model: restricted entries zero");

  if (name == "medium-1-h1")
    return make_dgp(name, medium, lift_medium(medium_1_base()), medium_sigma(),
                    false, "medium-scale alternative, calibrated dynamics");
  if (name == "medium-1-h0")
    return make_dgp(name, medium,
                    stabilized_null(lift_medium(medium_1_base()), medium),
                    medium_sigma(), true,
                    "approximate null: restricted entries of medium-1-h1 zeroed");
  if (name == "medium-2-h1")
    return make_dgp(name, medium, lift_medium(small_2_lag()), medium_sigma(),
                    false, "medium-scale alternative, moderate loadings");
  if (name == "medium-2-h0")
    return make_dgp(name, medium,
                    zero_restricted(lift_medium(small_2_lag()), medium),
                    medium_sigma(), false, "null model: restricted entries zero");
  if (name == "medium-3-h1")
    return make_dgp(name, medium, lift_medium(small_3_lag()), medium_sigma(),
                    false, "medium-scale alternative, weak loadings");
  if (name == "medium-3-h0")
    return make_dgp(name, medium,
                    zero_restricted(lift_medium(small_3_lag()), medium),
                    medium_sigma(), false, "null model: restricted entries zero");

  fail("UnknownDgp", "no built-in design named " + name);
}

void DgpSpec::validate() const {
  layout.validate();
  const int nn = layout.stacked_dim();
  if (lag_coeffs.empty()) fail("InvalidArgument", "dgp needs lag matrices");
  for (const auto& a : lag_coeffs)
    if (a.rows() != nn || a.cols() != nn)
      fail("InvalidArgument", "dgp lag matrix shape mismatch");
  if (intercept.size() != nn) fail("InvalidArgument", "dgp intercept length");
  if (sigma_u.rows() != nn || sigma_u.cols() != nn)
    fail("InvalidArgument", "dgp covariance shape mismatch");
  if (T < 1 || burn_in < 0) fail("InvalidArgument", "dgp sample lengths");
  if (companion_spectral_radius(lag_coeffs) >= 1.0)
    fail("ExplosiveDgp", "companion spectral radius is not below one");
}

StackedDataset simulate(const DgpSpec& dgp, RngStream& rng) {
  dgp.validate();
  const int nn = dgp.layout.stacked_dim();
  const int p = static_cast<int>(dgp.lag_coeffs.size());
  const Matrix L = cholesky(dgp.sigma_u);
  const Vector zero_mean = Vector::Zero(nn);

  const int total = dgp.burn_in + dgp.T;
  Matrix x = Matrix::Zero(total + p, nn);  // first p rows: zero initial values
  for (int t = 0; t < total; ++t) {
    Vector next = dgp.intercept + mvn_draw(zero_mean, L, rng);
    for (int i = 1; i <= p; ++i)
      next += dgp.lag_coeffs[i - 1] * x.row(p + t - i).transpose();
    x.row(p + t) = next.transpose();
  }

  StackedDataset out;
  out.Y = x.bottomRows(dgp.T);
  out.Z = Matrix(dgp.T, 0);
  for (int s = 1; s <= dgp.layout.m; ++s)
    for (int v = 1; v <= dgp.layout.n_high; ++v)
      out.y_labels.push_back("xh" + std::to_string(v) + "_s" + std::to_string(s));
  for (int v = 1; v <= dgp.layout.n_low; ++v)
    out.y_labels.push_back("xl" + std::to_string(v));
  return out;
}

McResult run_experiment(const DgpSpec& dgp, int R, const McTestSpec& test,
                        std::uint64_t seed, int workers) {
  if (R < 100) fail("InvalidArgument", "experiment requires at least 100 replications");
  dgp.validate();

  CoefficientLayout coef;
  coef.nn = dgp.layout.stacked_dim();
  coef.p = test.p;
  coef.intercept = true;
  coef.n_exog = 0;
  const LinearRestrictions restr =
      reduced_equivalence_restrictions(dgp.layout, test.scheme, coef, 0);
  const int dof = restr.rank();

  std::vector<double> raw(R, -1.0);  // -1 marks a failed replication
  auto run_range = [&](int lo, int hi) {
    for (int r = lo; r < hi; ++r) {
      try {
        RngStream rng(seed, static_cast<std::uint64_t>(r) + 1);
        StackedDataset data = simulate(dgp, rng);
        ReducedFormFit unres = estimate_ols(data, dgp.layout, test.p);
        if (dof == 0) {
          raw[r] = 1.0;
          continue;
        }
        ReducedFormFit res = estimate_restricted(data, dgp.layout, test.p, restr);
        raw[r] = reduced_lr_from_fits(unres, res, dof).pvalue;
      } catch (const Error&) {
        raw[r] = -1.0;
      }
    }
  };

  int n_workers = workers > 0 ? workers
                              : static_cast<int>(std::thread::hardware_concurrency());
  if (n_workers < 1) n_workers = 1;
  n_workers = std::min(n_workers, R);
  if (n_workers == 1) {
    run_range(0, R);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (R + n_workers - 1) / n_workers;
    for (int w = 0; w < n_workers; ++w) {
      const int lo = w * chunk;
      const int hi = std::min(R, lo + chunk);
      if (lo < hi) pool.emplace_back(run_range, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  McResult out;
  out.dgp = dgp.name;
  out.test = test;
  out.seed = seed;
  out.requested = R;
  for (int r = 0; r < R; ++r) {
    if (raw[r] < 0.0) {
      ++out.failures;
    } else {
      out.pvalues.push_back(raw[r]);
      out.replication_ids.push_back(r + 1);
    }
  }
  if (out.failures * 20 > R)
    fail("TooManyFailures", "more than 5% of replications failed");
  return out;
}

double rejection_rate(const McResult& result, double level) {
  if (result.pvalues.empty()) fail("InvalidArgument", "empty experiment result");
  int count = 0;
  for (double p : result.pvalues)
    if (p <= level) ++count;
  return static_cast<double>(count) / static_cast<double>(result.pvalues.size());
}

std::vector<double> pvalue_grid() {
  std::vector<double> grid;
  grid.reserve(215);
  for (int i = 1; i <= 10; ++i) grid.push_back(i / 1000.0);
  for (int i = 15; i <= 990; i += 5) grid.push_back(i / 1000.0);
  for (int i = 991; i <= 999; ++i) grid.push_back(i / 1000.0);
  return grid;
}

EdfCurve pvalue_plot(const McResult& result) {
  if (result.pvalues.empty()) fail("InvalidArgument", "empty experiment result");
  std::vector<double> sorted = result.pvalues;
  std::sort(sorted.begin(), sorted.end());
  EdfCurve out;
  out.grid = pvalue_grid();
  out.edf.reserve(out.grid.size());
  const double n = static_cast<double>(sorted.size());
  for (double xi : out.grid) {
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), xi);
    out.edf.push_back(static_cast<double>(it - sorted.begin()) / n);
  }
  return out;
}

SizePowerCurve size_power_curve(const McResult& null_result,
                                const McResult& alt_result) {
  if (!(null_result.test == alt_result.test))
    fail("TestSpecMismatch", "size and power runs use different test specs");
  EdfCurve size = pvalue_plot(null_result);
  EdfCurve power = pvalue_plot(alt_result);
  SizePowerCurve out;
  out.grid = std::move(size.grid);
  out.size = std::move(size.edf);
  out.power = std::move(power.edf);
  return out;
}

double dkw_halfwidth(double confidence, int n) {
  if (!(confidence > 0.0 && confidence < 1.0) || n < 1)
    fail("InvalidArgument", "dkw band needs confidence in (0,1) and n >= 1");
  return std::sqrt(std::log(2.0 / (1.0 - confidence)) / (2.0 * n));
}

}  // namespace msvar

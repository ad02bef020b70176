#include "msvar/reduced_form.hpp"

#include "msvar/numerics.hpp"

#include <Eigen/QR>
#include <cmath>
#include <limits>

namespace msvar {

namespace {

struct Regression {
  Matrix X;  // T_eff x K
  Matrix Y;  // T_eff x nn
  int K;
  int T_eff;
};

Regression build_regression(const StackedDataset& data,
                            const FrequencyLayout& layout, int p,
                            bool intercept, int drop_rows) {
  layout.validate();
  const int nn = layout.stacked_dim();
  if (data.Y.cols() != nn)
    fail("InvalidArgument", "dataset endogenous width does not match layout");
  const int T = data.T();
  const int k = static_cast<int>(data.Z.cols());
  const int start = std::max(p, drop_rows);
  const int T_eff = T - start;
  const int K = (intercept ? 1 : 0) + p * nn + k;
  if (T_eff < K + 1)
    fail("InsufficientSample",
         "need more than " + std::to_string(K) + " usable rows, have " +
             std::to_string(T_eff));

  Regression reg;
  reg.K = K;
  reg.T_eff = T_eff;
  reg.X.resize(T_eff, K);
  reg.Y.resize(T_eff, nn);
  for (int t = start; t < T; ++t) {
    const int row = t - start;
    int col = 0;
    if (intercept) reg.X(row, col++) = 1.0;
    for (int lag = 1; lag <= p; ++lag)
      for (int v = 0; v < nn; ++v) reg.X(row, col++) = data.Y(t - lag, v);
    for (int j = 0; j < k; ++j) reg.X(row, col++) = data.Z(t, j);
    reg.Y.row(row) = data.Y.row(t);
  }
  return reg;
}

double log_det_spd(const Matrix& S) {
  Eigen::LDLT<Matrix> ldlt(S);
  if (ldlt.info() != Eigen::Success)
    return -std::numeric_limits<double>::infinity();
  double ld = 0.0;
  for (Eigen::Index i = 0; i < S.rows(); ++i) {
    const double d = ldlt.vectorD()(i);
    if (d <= 0.0) return -std::numeric_limits<double>::infinity();
    ld += std::log(d);
  }
  return ld;
}

constexpr double kLog2Pi = 1.8378770664093454836;

void finalize_fit(ReducedFormFit& fit, const FrequencyLayout& layout, int p,
                  bool intercept, const Matrix& theta, const Regression& reg,
                  int n_free) {
  const int nn = layout.stacked_dim();
  const int k = reg.K - (intercept ? 1 : 0) - p * nn;
  fit.layout = layout;
  fit.p = p;
  fit.intercept = intercept;
  fit.c = Vector::Zero(nn);
  if (intercept) fit.c = theta.row(0).transpose();
  fit.lag_coeffs.assign(p, Matrix::Zero(nn, nn));
  const int off = intercept ? 1 : 0;
  for (int lag = 1; lag <= p; ++lag)
    for (int v = 0; v < nn; ++v)
      fit.lag_coeffs[lag - 1].col(v) =
          theta.row(off + (lag - 1) * nn + v).transpose();
  fit.exog_coeffs.resize(nn, k);
  for (int j = 0; j < k; ++j)
    fit.exog_coeffs.col(j) = theta.row(off + p * nn + j).transpose();

  fit.residuals = reg.Y - reg.X * theta;
  fit.effective_T = reg.T_eff;
  fit.sigma_u = (fit.residuals.transpose() * fit.residuals) / reg.T_eff;
  fit.sigma_u = 0.5 * (fit.sigma_u + fit.sigma_u.transpose()).eval();
  const double ld = log_det_spd(fit.sigma_u);
  fit.loglik_excl_const = -0.5 * reg.T_eff * (ld + nn);
  fit.loglik = fit.loglik_excl_const - 0.5 * reg.T_eff * nn * kLog2Pi;
  fit.n_free_coeffs = n_free;
}

}  // namespace

CoefficientLayout ReducedFormFit::coef_layout() const {
  CoefficientLayout cl;
  cl.nn = layout.stacked_dim();
  cl.p = p;
  cl.intercept = intercept;
  cl.n_exog = static_cast<int>(exog_coeffs.cols());
  return cl;
}

Matrix ReducedFormFit::coefficient_matrix() const {
  const CoefficientLayout cl = coef_layout();
  Matrix theta(cl.K(), cl.nn);
  int row = 0;
  if (intercept) theta.row(row++) = c.transpose();
  for (const Matrix& A : lag_coeffs)
    for (int v = 0; v < cl.nn; ++v) theta.row(row++) = A.col(v).transpose();
  for (int j = 0; j < cl.n_exog; ++j)
    theta.row(row++) = exog_coeffs.col(j).transpose();
  return theta;
}

ReducedFormFit estimate_ols(const StackedDataset& data,
                            const FrequencyLayout& layout, int p,
                            bool intercept) {
  Regression reg = build_regression(data, layout, p, intercept, p);
  Eigen::ColPivHouseholderQR<Matrix> qr(reg.X);
  if (qr.rank() < reg.K)
    fail("RankDeficientRegressors",
         "regressor matrix has rank " + std::to_string(qr.rank()) + " < " +
             std::to_string(reg.K));
  Matrix theta = qr.solve(reg.Y);
  ReducedFormFit fit;
  finalize_fit(fit, layout, p, intercept, theta, reg,
               reg.K * layout.stacked_dim());
  return fit;
}

ReducedFormFit estimate_restricted(const StackedDataset& data,
                                   const FrequencyLayout& layout, int p,
                                   const LinearRestrictions& restrictions,
                                   bool intercept) {
  if (restrictions.empty())
    return estimate_ols(data, layout, p, intercept);

  Regression reg = build_regression(data, layout, p, intercept, p);
  const int nn = layout.stacked_dim();
  if (restrictions.dim != reg.K * nn)
    fail("InvalidArgument",
         "restriction dimension " + std::to_string(restrictions.dim) +
             " does not match vec(Theta) length " +
             std::to_string(reg.K * nn));

  Eigen::ColPivHouseholderQR<Matrix> qr(reg.X);
  if (qr.rank() < reg.K)
    fail("RankDeficientRegressors", "regressor matrix is rank deficient");

  const LinearRestrictions::Explicit ex = restrictions.to_explicit();
  const Matrix XtX = reg.X.transpose() * reg.X;
  const Matrix XtY = reg.X.transpose() * reg.Y;

  // Start from the unrestricted covariance, iterate feasible GLS to the
  // restricted Gaussian ML.
  Matrix theta_ols = qr.solve(reg.Y);
  Matrix E = reg.Y - reg.X * theta_ols;
  Matrix sigma = (E.transpose() * E) / reg.T_eff;

  double prev_ll = -std::numeric_limits<double>::infinity();
  Matrix theta;
  for (int iter = 0; iter < 500; ++iter) {
    Eigen::LDLT<Matrix> sig_ldlt(sigma);
    if (sig_ldlt.info() != Eigen::Success)
      fail("NonConvergence", "residual covariance became indefinite");
    Matrix W = sig_ldlt.solve(Matrix::Identity(nn, nn));
    W = 0.5 * (W + W.transpose()).eval();

    Matrix WkX = kron(W, XtX);
    Matrix M = ex.R.transpose() * WkX * ex.R;
    Vector rhs = ex.R.transpose() * (vec(XtY * W) - WkX * ex.r);
    Eigen::LDLT<Matrix> m_ldlt(M);
    if (m_ldlt.info() != Eigen::Success)
      fail("RankDeficientRegressors",
           "restricted normal equations are singular");
    Vector gamma = m_ldlt.solve(rhs);
    theta = unvec(ex.R * gamma + ex.r, reg.K, nn);

    E = reg.Y - reg.X * theta;
    sigma = (E.transpose() * E) / reg.T_eff;
    sigma = 0.5 * (sigma + sigma.transpose()).eval();
    const double ll = -0.5 * reg.T_eff *
                      (nn * kLog2Pi + log_det_spd(sigma) + nn);
    if (std::abs(ll - prev_ll) <= 1e-10 * (1.0 + std::abs(ll))) {
      prev_ll = ll;
      break;
    }
    prev_ll = ll;
    if (iter == 499)
      fail("NonConvergence", "restricted GLS did not converge in 500 steps");
  }

  ReducedFormFit fit;
  finalize_fit(fit, layout, p, intercept, theta, reg, ex.free);
  return fit;
}

std::vector<CriterionRow> information_criteria(const StackedDataset& data,
                                               const FrequencyLayout& layout,
                                               int p_max, bool intercept) {
  if (p_max < 1) fail("InvalidArgument", "p_max must be >= 1");
  std::vector<CriterionRow> rows;
  for (int p = 1; p <= p_max; ++p) {
    Regression reg = build_regression(data, layout, p, intercept, p_max);
    Eigen::ColPivHouseholderQR<Matrix> qr(reg.X);
    if (qr.rank() < reg.K)
      fail("RankDeficientRegressors", "regressor matrix is rank deficient");
    Matrix theta = qr.solve(reg.Y);
    ReducedFormFit fit;
    finalize_fit(fit, layout, p, intercept, theta, reg,
                 reg.K * layout.stacked_dim());
    CriterionRow row;
    row.p = p;
    row.loglik = fit.loglik;
    row.n_params = fit.n_free_coeffs;
    row.aic = -2.0 * fit.loglik + 2.0 * row.n_params;
    row.bic = -2.0 * fit.loglik + row.n_params * std::log(reg.T_eff);
    rows.push_back(row);
  }
  return rows;
}

double companion_spectral_radius(const std::vector<Matrix>& lag_coeffs) {
  if (lag_coeffs.empty()) return 0.0;
  const int nn = static_cast<int>(lag_coeffs[0].rows());
  const int p = static_cast<int>(lag_coeffs.size());
  Matrix companion = Matrix::Zero(nn * p, nn * p);
  for (int i = 0; i < p; ++i)
    companion.block(0, i * nn, nn, nn) = lag_coeffs[i];
  if (p > 1)
    companion.block(nn, 0, nn * (p - 1), nn * (p - 1)) =
        Matrix::Identity(nn * (p - 1), nn * (p - 1));
  return spectral_radius(companion);
}

double companion_spectral_radius(const ReducedFormFit& fit) {
  return companion_spectral_radius(fit.lag_coeffs);
}

}  // namespace msvar

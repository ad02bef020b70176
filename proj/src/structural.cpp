#include "msvar/structural.hpp"

#include "msvar/numerics.hpp"
#include "msvar/rng.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace msvar {

namespace {

std::vector<std::string> zero_grid(int n) {
  return std::vector<std::string>(n * n, "0");
}

void set_cell(std::vector<std::string>& grid, int n, int row, int col,
              const std::string& tok) {
  grid[row * n + col] = tok;
}

}  // namespace

AbRestrictions cholesky_scheme(int nn) {
  auto a = zero_grid(nn);
  auto b = zero_grid(nn);
  for (int i = 0; i < nn; ++i) {
    set_cell(a, nn, i, i, "1");
    for (int j = 0; j <= i; ++j) set_cell(b, nn, i, j, "*");
  }
  return ab_from_patterns(a, b, nn);
}

AbRestrictions recursive_slot_scheme(const FrequencyLayout& layout,
                                     bool full_recursion) {
  layout.validate();
  if (layout.n_high != 2 || layout.n_low != 1)
    fail("UnsupportedLayout",
         "the recursive slot scheme is defined for two high-frequency "
         "variables and one low-frequency variable; use pattern grids for "
         "other layouts");
  const int m = layout.m;
  const int nn = layout.stacked_dim();

  auto a = zero_grid(nn);
  for (int i = 0; i < nn; ++i) set_cell(a, nn, i, i, "1");
  for (int s = 2; s <= m; ++s) {
    const int first_slot = full_recursion ? 1 : s - 1;
    for (int v = 0; v < 2; ++v) {
      const int row = layout.high_index(v, s);
      for (int e = first_slot; e < s; ++e)
        for (int w = 0; w < 2; ++w)
          set_cell(a, nn, row, layout.high_index(w, e), "*");
    }
  }

  auto b = zero_grid(nn);
  for (int s = 1; s <= m; ++s) {
    set_cell(b, nn, layout.high_index(0, s), layout.high_index(0, s), "*");
    set_cell(b, nn, layout.high_index(1, s), layout.high_index(0, s), "*");
    set_cell(b, nn, layout.high_index(1, s), layout.high_index(1, s), "*");
  }
  for (int c = 0; c < nn; ++c) set_cell(b, nn, layout.low_index(0), c, "*");

  return ab_from_patterns(a, b, nn);
}

AbRestrictions ab_from_patterns(const std::vector<std::string>& a_grid,
                                const std::vector<std::string>& b_grid,
                                int nn) {
  AbRestrictions r;
  r.nn = nn;
  r.on_A = compile_pattern(a_grid, nn);
  r.on_B = compile_pattern(b_grid, nn);
  return r;
}

namespace {

// Appends "entry (row, col) of an nn x nn matrix equals zero".
void append_zero(LinearRestrictions& lr, int nn, int row, int col) {
  Vector v = Vector::Zero(nn * nn);
  v(col * nn + row) = 1.0;
  lr.append_row(v, 0.0);
}

// Appends "entry (r1, c1) equals entry (r2, c2)".
void append_equal(LinearRestrictions& lr, int nn, int r1, int c1, int r2,
                  int c2) {
  Vector v = Vector::Zero(nn * nn);
  v(c1 * nn + r1) += 1.0;
  v(c2 * nn + r2) -= 1.0;
  lr.append_row(v, 0.0);
}

}  // namespace

AbRestrictions hypothesis_preset(const std::string& name,
                                 const FrequencyLayout& layout) {
  AbRestrictions r = recursive_slot_scheme(layout);
  const int nn = r.nn;
  const int m = layout.m;
  const int low = layout.low_index(0);

  if (name == "slots-help-identify-mp") {
    // Later-slot policy equations stop loading earlier slots' residuals.
    for (int s = 2; s <= m; ++s)
      for (int e = 1; e < s; ++e)
        for (int w = 0; w < 2; ++w)
          append_zero(r.on_A, nn, layout.high_index(0, s),
                      layout.high_index(w, e));
  } else if (name == "slots-help-identify-vix") {
    // Volatility equations: no earlier-slot residuals, no same-slot policy
    // shock.
    for (int s = 2; s <= m; ++s)
      for (int e = 1; e < s; ++e)
        for (int w = 0; w < 2; ++w)
          append_zero(r.on_A, nn, layout.high_index(1, s),
                      layout.high_index(w, e));
    for (int s = 1; s <= m; ++s)
      append_zero(r.on_B, nn, layout.high_index(1, s),
                  layout.high_index(0, s));
  } else if (name == "first-month-only-drives-k") {
    for (int s = 2; s <= m; ++s)
      for (int w = 0; w < 2; ++w)
        append_zero(r.on_B, nn, low, layout.high_index(w, s));
  } else if (name == "equal-mp-impact-across-months") {
    for (int s = 2; s <= m; ++s)
      append_equal(r.on_B, nn, low, layout.high_index(0, 1), low,
                   layout.high_index(0, s));
  } else if (name == "equal-vix-impact-across-months") {
    for (int s = 2; s <= m; ++s)
      append_equal(r.on_B, nn, low, layout.high_index(1, 1), low,
                   layout.high_index(1, s));
  } else {
    fail("UnknownHypothesis", "no hypothesis preset named '" + name + "'");
  }
  return r;
}

std::vector<std::string> hypothesis_preset_names() {
  return {"slots-help-identify-mp", "slots-help-identify-vix",
          "first-month-only-drives-k", "equal-mp-impact-across-months",
          "equal-vix-impact-across-months"};
}

namespace {

double abs_det(const Matrix& M) {
  Eigen::PartialPivLU<Matrix> lu(M);
  return std::abs(lu.determinant());
}

Matrix feasible_point(const LinearRestrictions::Explicit& ex,
                      const Vector& gamma, int nn) {
  return unvec(ex.R * gamma + ex.r, nn, nn);
}

}  // namespace

IdentificationReport check_identification_at(const AbRestrictions& restr,
                                             const Matrix& sigma_u,
                                             const Matrix& A,
                                             const Matrix& B) {
  const int nn = restr.nn;
  IdentificationReport rep;
  rep.required_rank = 2 * nn * nn;
  rep.free_params = restr.q_A() + restr.q_B();
  rep.overid_dof = nn * (nn + 1) / 2 - rep.free_params;

  if (abs_det(A) < 1e-200)
    fail("SingularA", "A is singular at the evaluation point");
  const Matrix Ainv = A.inverse();

  const Matrix Dp = duplication_pinv(nn);
  const int vech_rows = nn * (nn + 1) / 2;
  const Eigen::Index rows_sa = restr.on_A.S.rows();
  const Eigen::Index rows_sb = restr.on_B.S.rows();

  Matrix J = Matrix::Zero(vech_rows + rows_sa + rows_sb, 2 * nn * nn);
  J.block(0, 0, vech_rows, nn * nn) = -2.0 * Dp * kron(sigma_u, Ainv);
  J.block(0, nn * nn, vech_rows, nn * nn) = 2.0 * Dp * kron(Ainv * B, Ainv);
  J.block(vech_rows, 0, rows_sa, nn * nn) = restr.on_A.S;
  J.block(vech_rows + rows_sa, nn * nn, rows_sb, nn * nn) = restr.on_B.S;

  rep.jacobian_rank = numerical_rank(J);
  rep.identified = (rep.jacobian_rank == rep.required_rank);
  return rep;
}

IdentificationReport check_identification(const AbRestrictions& restr,
                                          const Matrix& sigma_u) {
  const int nn = restr.nn;
  const auto exA = restr.on_A.to_explicit();
  const auto exB = restr.on_B.to_explicit();
  const Vector gA0 = exA.R.transpose() *
                     (vec(Matrix::Identity(nn, nn)) - exA.r);
  const Vector gB0 = exB.R.transpose() *
                     (vec(Matrix::Identity(nn, nn)) - exB.r);

  // Fixed internal seed: the report must not depend on call order.
  std::vector<IdentificationReport> reports;
  int attempts = 0;
  while (static_cast<int>(reports.size()) < 5 && attempts < 25) {
    RngStream rng(0x5EEDC0DEULL, static_cast<std::uint64_t>(attempts++));
    Vector gA(exA.free), gB(exB.free);
    for (int i = 0; i < exA.free; ++i) gA(i) = gA0(i) + 0.3 * rng.normal();
    for (int i = 0; i < exB.free; ++i) gB(i) = gB0(i) + 0.3 * rng.normal();
    Matrix A = feasible_point(exA, gA, nn);
    Matrix B = feasible_point(exB, gB, nn);
    if (abs_det(A) < 1e-10 || abs_det(B) < 1e-10) continue;
    reports.push_back(check_identification_at(restr, sigma_u, A, B));
  }
  if (reports.empty())
    fail("SingularA", "no nonsingular feasible evaluation point found");

  // Majority rank; ties resolved toward the largest (generic) rank.
  std::map<int, int> votes;
  for (const auto& rep : reports) ++votes[rep.jacobian_rank];
  int best_rank = reports.front().jacobian_rank;
  int best_count = 0;
  for (const auto& [rank, count] : votes)
    if (count > best_count || (count == best_count && rank > best_rank)) {
      best_rank = rank;
      best_count = count;
    }
  IdentificationReport rep = reports.front();
  rep.jacobian_rank = best_rank;
  rep.identified = (best_rank == rep.required_rank);
  return rep;
}

namespace {

struct MlProblem {
  int nn;
  int T;
  Matrix sigma;
  Matrix chol_sigma;
  LinearRestrictions::Explicit exA, exB;

  int dim() const { return exA.free + exB.free; }

  Matrix build_A(const Vector& x) const {
    return unvec(exA.R * x.head(exA.free) + exA.r, nn, nn);
  }
  Matrix build_B(const Vector& x) const {
    return unvec(exB.R * x.tail(exB.free) + exB.r, nn, nn);
  }

  // Per-observation negative log-likelihood without the 2*pi constant:
  // f = -ln|det A| + ln|det B| + 0.5 tr(B^-1 A S A' B^-T).
  double objective(const Vector& x) const {
    const Matrix A = build_A(x);
    const Matrix B = build_B(x);
    Eigen::PartialPivLU<Matrix> luA(A), luB(B);
    const double dA = std::abs(luA.determinant());
    const double dB = std::abs(luB.determinant());
    if (!(dA > 1e-280) || !(dB > 1e-280))
      return std::numeric_limits<double>::infinity();
    const Matrix W = luB.solve(A * chol_sigma);  // B^-1 A chol(S)
    const double f = -std::log(dA) + std::log(dB) + 0.5 * W.squaredNorm();
    return std::isfinite(f) ? f
                            : std::numeric_limits<double>::infinity();
  }

  Vector gradient(const Vector& x) const {
    const Matrix A = build_A(x);
    const Matrix B = build_B(x);
    const Matrix Ainv = A.inverse();
    const Matrix Binv = B.inverse();
    const Matrix P = Binv.transpose() * Binv;  // (B B')^-1
    const Matrix gA = -Ainv.transpose() + P * A * sigma;
    const Matrix gB =
        Binv.transpose() - P * (A * sigma * A.transpose()) * Binv.transpose();
    Vector g(dim());
    g.head(exA.free) = exA.R.transpose() * vec(gA);
    g.tail(exB.free) = exB.R.transpose() * vec(gB);
    return g;
  }
};

}  // namespace

AbStructure estimate_ml_from_sigma(const Matrix& sigma_u, int effective_T,
                                   const AbRestrictions& restr,
                                   const MlOptions& options) {
  const int nn = restr.nn;
  if (sigma_u.rows() != nn || sigma_u.cols() != nn)
    fail("InvalidArgument", "sigma_u does not match the restriction order");

  MlProblem prob;
  prob.nn = nn;
  prob.T = effective_T;
  prob.sigma = 0.5 * (sigma_u + sigma_u.transpose());
  prob.chol_sigma = cholesky(prob.sigma);  // NotPositiveDefinite if invalid
  prob.exA = restr.on_A.to_explicit();
  prob.exB = restr.on_B.to_explicit();

  // Start A at the feasible point closest to the identity, B at the feasible
  // projection of chol(sigma).
  Vector x(prob.dim());
  x.head(prob.exA.free) =
      prob.exA.R.transpose() * (vec(Matrix::Identity(nn, nn)) - prob.exA.r);
  x.tail(prob.exB.free) =
      prob.exB.R.transpose() * (vec(prob.chol_sigma) - prob.exB.r);
  if (!std::isfinite(prob.objective(x))) {
    // Deterministic jitter until the start is nonsingular.
    for (int attempt = 0; attempt < 50; ++attempt) {
      RngStream rng(0xAB5EEDULL, static_cast<std::uint64_t>(attempt));
      Vector xt = x;
      for (int i = 0; i < xt.size(); ++i) xt(i) += 0.05 * rng.normal();
      if (std::isfinite(prob.objective(xt))) {
        x = xt;
        break;
      }
    }
    if (!std::isfinite(prob.objective(x)))
      fail("SingularA", "no nonsingular feasible starting point found");
  }

  const int n_free = prob.dim();
  Matrix H = Matrix::Identity(n_free, n_free);
  double f = prob.objective(x);
  Vector g = prob.gradient(x);
  bool converged = false;
  int iter = 0;

  for (; iter < options.max_iterations; ++iter) {
    if (g.norm() <= options.gradient_tol) {
      converged = true;
      break;
    }
    Vector d = -(H * g);
    if (d.dot(g) >= 0.0) {  // not a descent direction: reset curvature
      H.setIdentity();
      d = -g;
    }
    // Backtracking Armijo search; singular points return +inf and shrink.
    double t = 1.0;
    const double slope = g.dot(d);
    double f_new = std::numeric_limits<double>::infinity();
    Vector x_new;
    bool stepped = false;
    for (int h = 0; h < 60; ++h) {
      x_new = x + t * d;
      f_new = prob.objective(x_new);
      if (f_new <= f + 1e-4 * t * slope) {
        stepped = true;
        break;
      }
      t *= 0.5;
    }
    if (!stepped) {
      // Stalled: accept convergence only if the gradient is already small.
      converged = (g.norm() <= options.gradient_tol);
      break;
    }

    Vector g_new = prob.gradient(x_new);
    const Vector s_step = x_new - x;
    const Vector y_step = g_new - g;
    const double sy = s_step.dot(y_step);
    if (sy > 1e-12 * s_step.norm() * y_step.norm()) {
      const double rho = 1.0 / sy;
      const Matrix I = Matrix::Identity(n_free, n_free);
      H = (I - rho * s_step * y_step.transpose()) * H *
              (I - rho * y_step * s_step.transpose()) +
          rho * s_step * s_step.transpose();
    } else {
      H.setIdentity();
    }

    const bool small_change =
        std::abs(f_new - f) <= options.loglik_rel_tol * (1.0 + std::abs(f));
    x = x_new;
    f = f_new;
    g = g_new;
    if (small_change && g.norm() <= options.gradient_tol) {
      converged = true;
      ++iter;
      break;
    }
  }

  if (!converged && options.require_convergence)
    fail("NonConvergence",
         "ML did not converge in " + std::to_string(options.max_iterations) +
             " iterations (gradient norm " + std::to_string(g.norm()) + ")");

  AbStructure out;
  out.restrictions = restr;
  out.A = prob.build_A(x);
  out.B = prob.build_B(x);
  out.converged = converged;
  out.iterations = iter;
  out.gradient_norm = g.norm();

  // Sign normalization: flip B columns to a non-negative diagonal where the
  // restrictions still hold (likelihood is invariant to shock sign flips).
  for (int j = 0; j < nn; ++j) {
    if (out.B(j, j) < 0.0) {
      Matrix flipped = out.B;
      flipped.col(j) *= -1.0;
      const double viol =
          restr.on_B.S.rows() == 0
              ? 0.0
              : (restr.on_B.S * vec(flipped) - restr.on_B.s)
                    .cwiseAbs()
                    .maxCoeff();
      if (viol <= 1e-8) out.B = flipped;
    }
  }

  constexpr double kLog2Pi = 1.8378770664093454836;
  out.loglik = -prob.T * f - 0.5 * prob.T * nn * kLog2Pi;
  return out;
}

AbStructure estimate_ml(const ReducedFormFit& fit, const AbRestrictions& restr,
                        const MlOptions& options) {
  return estimate_ml_from_sigma(fit.sigma_u, fit.effective_T, restr, options);
}

namespace {

MlProblem hook_problem(const AbRestrictions& restr, const Matrix& sigma_u,
                       const Vector& gamma) {
  if (sigma_u.rows() != restr.nn || sigma_u.cols() != restr.nn)
    fail("InvalidArgument", "sigma_u does not match the restriction order");
  MlProblem prob;
  prob.nn = restr.nn;
  prob.T = 1;
  prob.sigma = 0.5 * (sigma_u + sigma_u.transpose());
  prob.chol_sigma = cholesky(prob.sigma);
  prob.exA = restr.on_A.to_explicit();
  prob.exB = restr.on_B.to_explicit();
  if (gamma.size() != prob.dim())
    fail("InvalidArgument", "gamma does not match the free-coordinate count");
  return prob;
}

}  // namespace

double ab_objective(const AbRestrictions& restr, const Matrix& sigma_u,
                    const Vector& gamma) {
  return hook_problem(restr, sigma_u, gamma).objective(gamma);
}

Vector ab_gradient(const AbRestrictions& restr, const Matrix& sigma_u,
                   const Vector& gamma) {
  return hook_problem(restr, sigma_u, gamma).gradient(gamma);
}

LrTestResult lr_test(double l_restricted, double l_unrestricted, int dof) {
  if (dof < 1) fail("InvalidArgument", "lr_test requires dof >= 1");
  if (l_restricted > l_unrestricted + 1e-6)
    fail("NestingViolation",
         "restricted log-likelihood exceeds the unrestricted one; the "
         "optimizer likely failed");
  LrTestResult r;
  r.l_restricted = l_restricted;
  r.l_unrestricted = l_unrestricted;
  r.dof = dof;
  r.statistic = std::max(0.0, -2.0 * (l_restricted - l_unrestricted));
  r.pvalue = chi2_sf(r.statistic, dof);
  return r;
}

}  // namespace msvar

#include "msvar/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <limits>

namespace msvar {

Matrix cholesky(const Matrix& S) {
  const int n = static_cast<int>(S.rows());
  if (S.cols() != n) fail("NotSymmetric", "matrix is not square");
  const double scale = 1.0 + S.cwiseAbs().maxCoeff();
  if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    fail("NotSymmetric", "matrix is not symmetric within 1e-10");

  Matrix L = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    double d = S(j, j) - L.row(j).head(j).squaredNorm();
    if (d <= 0.0)
      fail("NotPositiveDefinite",
           "nonpositive pivot at index " + std::to_string(j));
    L(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = S(i, j) - L.row(i).head(j).dot(L.row(j).head(j));
      L(i, j) = s / L(j, j);
    }
  }
  return L;
}

Matrix duplication_pinv(int n) {
  // Row (i,j), i >= j, of D_n^+ averages the (i,j) and (j,i) slots of vec(S):
  // weight 1 on the diagonal, 1/2 on each member of an off-diagonal pair.
  Matrix D = Matrix::Zero(n * (n + 1) / 2, n * n);
  int row = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = j; i < n; ++i, ++row) {
      if (i == j) {
        D(row, j * n + i) = 1.0;
      } else {
        D(row, j * n + i) = 0.5;
        D(row, i * n + j) = 0.5;
      }
    }
  }
  return D;
}

Matrix kron(const Matrix& A, const Matrix& B) {
  Matrix K(A.rows() * B.rows(), A.cols() * B.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

int numerical_rank(const Matrix& M, double rel_tol) {
  if (M.size() == 0) return 0;
  Eigen::BDCSVD<Matrix> svd(M);
  if (svd.info() != Eigen::Success)
    fail("SvdFailure", "singular value decomposition did not converge");
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double cutoff = rel_tol * sv(0);
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++r;
  return r;
}

int numerical_rank(const Matrix& M) {
  return numerical_rank(M, 1e-8 * static_cast<double>(
                               std::max(M.rows(), M.cols())));
}

namespace {

// ln Gamma(x), Lanczos approximation (double precision, x > 0).
double log_gamma(double x) {
  static const double cof[14] = {
      57.1562356658629235,     -59.5979603554754912,
      14.1360979747417471,     -0.491913816097620199,
      0.339946499848118887e-4, 0.465236289270485756e-4,
      -0.983744753048795646e-4, 0.158088703224912494e-3,
      -0.210264441724104883e-3, 0.217439618115212643e-3,
      -0.164318106536763890e-3, 0.844182239838527433e-4,
      -0.261908384015814087e-4, 0.368991826595316234e-5};
  double y = x;
  double tmp = x + 5.24218750000000000;
  tmp = (x + 0.5) * std::log(tmp) - tmp;
  double ser = 0.999999999999997092;
  for (int j = 0; j < 14; ++j) ser += cof[j] / ++y;
  return tmp + std::log(2.5066282746310005 * ser / x);
}

// Regularized lower incomplete gamma P(a,x) by series expansion (x < a+1).
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 10000; ++i) {
    ++ap;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-16)
      return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
  }
  return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
}

// Regularized upper incomplete gamma Q(a,x) by modified Lentz continued
// fraction (x >= a+1).
double gamma_q_cf(double a, double x) {
  const double fpmin = std::numeric_limits<double>::min() / 1e-16;
  double b = x + 1.0 - a;
  double c = 1.0 / fpmin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = b + an / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) <= 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - log_gamma(a)) * h;
}

}  // namespace

double chi2_sf(double x, int dof) {
  if (dof < 1) fail("InvalidArgument", "chi2_sf requires dof >= 1");
  if (x < 0.0) fail("InvalidArgument", "chi2_sf requires x >= 0");
  if (x == 0.0) return 1.0;
  const double a = 0.5 * dof;
  const double xs = 0.5 * x;
  double q = (xs < a + 1.0) ? 1.0 - gamma_p_series(a, xs) : gamma_q_cf(a, xs);
  if (q < 0.0) q = 0.0;
  if (q > 1.0) q = 1.0;
  return q;
}

Vector vec(const Matrix& M) {
  return Eigen::Map<const Vector>(M.data(), M.size());
}

Matrix unvec(const Vector& v, int rows, int cols) {
  if (v.size() != static_cast<Eigen::Index>(rows) * cols)
    fail("InvalidArgument", "unvec size mismatch");
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

Vector vech(const Matrix& M) {
  const int n = static_cast<int>(M.rows());
  Vector v(n * (n + 1) / 2);
  int k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = j; i < n; ++i) v(k++) = M(i, j);
  return v;
}

double spectral_radius(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(M, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace msvar

#include "doctest.h"
#include "helpers.hpp"

#include <msvar/montecarlo.hpp>
#include <msvar/numerics.hpp>
#include <msvar/rng.hpp>
#include <msvar/types.hpp>

#include <cmath>
#include <vector>

using namespace msvar;
using msvar::testing::random_matrix;
using msvar::testing::random_spd;

namespace {

// Chi-square density; the survival oracle below integrates it with Simpson's
// rule so chi2_sf is checked against something other than itself.
double chi2_pdf(double x, int k) {
  if (x <= 0.0) return 0.0;
  return std::exp((0.5 * k - 1.0) * std::log(x) - 0.5 * x -
                  0.5 * k * std::log(2.0) - std::lgamma(0.5 * k));
}

double chi2_sf_simpson(double x, int k) {
  // Integrate the density from x out to a point where the tail is < 1e-16.
  const double upper = x + 40.0 * std::sqrt(2.0 * k) + 200.0;
  const int n = 200000;  // even
  const double h = (upper - x) / n;
  double acc = chi2_pdf(x, k) + chi2_pdf(upper, k);
  for (int i = 1; i < n; ++i)
    acc += chi2_pdf(x + i * h, k) * ((i % 2) ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("cholesky factors symmetric positive definite matrices") {
  SUBCASE("identity is its own factor") {
    Matrix I = Matrix::Identity(3, 3);
    CHECK((cholesky(I) - I).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("hand-checked 2x2") {
    Matrix S(2, 2);
    S << 4.0, 2.0, 2.0, 5.0;
    Matrix L = cholesky(S);
    CHECK(L(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(L(0, 1) == 0.0);
    CHECK(L(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(L(1, 1) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK((L * L.transpose() - S).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("reconstruction bound on random SPD inputs") {
    RngStream rng(11, 0);
    for (int rep = 0; rep < 20; ++rep) {
      Matrix S = random_spd(5, rng);
      Matrix L = cholesky(S);
      for (int i = 0; i < 5; ++i) {
        CHECK(L(i, i) > 0.0);
        for (int j = i + 1; j < 5; ++j) CHECK(L(i, j) == 0.0);
      }
      double scale = 1.0 + S.cwiseAbs().maxCoeff();
      CHECK((L * L.transpose() - S).cwiseAbs().maxCoeff() <= 1e-10 * scale);
    }
  }
  SUBCASE("simulation covariance of the small design factors cleanly") {
    Matrix S = builtin_dgp("small-1-h1").sigma_u;
    Matrix L = cholesky(S);
    CHECK((L * L.transpose() - S).cwiseAbs().maxCoeff() <= 1e-8);
  }
  SUBCASE("indefinite input is rejected") {
    Matrix S(2, 2);
    S << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3, -1
    try {
      cholesky(S);
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.category() == "NotPositiveDefinite");
    }
  }
  SUBCASE("asymmetric input is rejected") {
    Matrix S(2, 2);
    S << 1.0, 0.5, 0.2, 1.0;
    try {
      cholesky(S);
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.category() == "NotSymmetric");
    }
  }
}

TEST_CASE("duplication_pinv maps vec of a symmetric matrix to vech") {
  SUBCASE("scalar case") {
    Matrix D = duplication_pinv(1);
    CHECK(D.rows() == 1);
    CHECK(D.cols() == 1);
    CHECK(D(0, 0) == 1.0);
  }
  SUBCASE("shape is n(n+1)/2 by n^2") {
    Matrix D = duplication_pinv(3);
    CHECK(D.rows() == 6);
    CHECK(D.cols() == 9);
  }
  SUBCASE("property holds on random symmetric matrices") {
    RngStream rng(12, 0);
    for (int n : {2, 3, 4}) {
      Matrix D = duplication_pinv(n);
      for (int rep = 0; rep < 100; ++rep) {
        Matrix Z = random_matrix(n, n, rng);
        Matrix S = 0.5 * (Z + Z.transpose());
        Vector got = D * vec(S);
        Vector want = vech(S);
        CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-12);
      }
    }
  }
}

TEST_CASE("kron follows the standard block convention") {
  SUBCASE("identity factor gives a block diagonal") {
    RngStream rng(13, 0);
    Matrix M = random_matrix(2, 3, rng);
    Matrix K = kron(Matrix::Identity(2, 2), M);
    CHECK(K.rows() == 4);
    CHECK(K.cols() == 6);
    CHECK((K.block(0, 0, 2, 3) - M).cwiseAbs().maxCoeff() == 0.0);
    CHECK((K.block(2, 3, 2, 3) - M).cwiseAbs().maxCoeff() == 0.0);
    CHECK(K.block(0, 3, 2, 3).cwiseAbs().maxCoeff() == 0.0);
    CHECK(K.block(2, 0, 2, 3).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("index formula on a row times a column") {
    Matrix A(1, 2), B(2, 1);
    A << 1.0, 2.0;
    B << 3.0, 4.0;
    Matrix K = kron(A, B);
    CHECK(K.rows() == 2);
    CHECK(K.cols() == 2);
    CHECK(K(0, 0) == 3.0);
    CHECK(K(1, 0) == 4.0);
    CHECK(K(0, 1) == 6.0);
    CHECK(K(1, 1) == 8.0);
  }
  SUBCASE("vec identity vec(AXB') = (B kron A) vec(X)") {
    RngStream rng(14, 0);
    for (int rep = 0; rep < 10; ++rep) {
      Matrix A = random_matrix(3, 3, rng);
      Matrix X = random_matrix(3, 3, rng);
      Matrix B = random_matrix(3, 3, rng);
      Vector lhs = vec(A * X * B.transpose());
      Vector rhs = kron(B, A) * vec(X);
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("numerical_rank counts singular values above the threshold") {
  CHECK(numerical_rank(Matrix::Identity(5, 5), 1e-10) == 5);
  CHECK(numerical_rank(Matrix::Zero(4, 6), 1e-10) == 0);

  RngStream rng(15, 0);
  Vector u = random_matrix(6, 1, rng).col(0);
  Vector v = random_matrix(4, 1, rng).col(0);
  CHECK(numerical_rank(u * v.transpose(), 1e-10) == 1);

  // Duplicating two rows of a full-rank square matrix drops the rank by two.
  Matrix M = random_matrix(10, 10, rng);
  M.row(3) = M.row(1);
  M.row(7) = M.row(4);
  CHECK(numerical_rank(M, 1e-10) == 8);

  SUBCASE("invariant under row and column permutation") {
    Matrix P = Matrix::Zero(10, 10);
    std::vector<int> perm{3, 1, 4, 0, 9, 2, 6, 8, 7, 5};
    for (int i = 0; i < 10; ++i) P(i, perm[i]) = 1.0;
    CHECK(numerical_rank(P * M, 1e-10) == numerical_rank(M, 1e-10));
    CHECK(numerical_rank(M * P, 1e-10) == numerical_rank(M, 1e-10));
  }
}

TEST_CASE("chi2_sf matches a numeric integration oracle") {
  CHECK(chi2_sf(0.0, 1) == 1.0);
  CHECK(chi2_sf(0.0, 36) == 1.0);
  CHECK(chi2_sf(3.841, 1) == doctest::Approx(0.05).epsilon(0.02));
  CHECK(chi2_sf(339.991, 36) < 1e-15);

  SUBCASE("agreement with Simpson integration of the density") {
    const struct {
      double x;
      int k;
    } cases[] = {{0.5, 1},  {3.841, 1}, {1.178, 2},  {13.915, 2},
                 {11.287, 4}, {9.488, 4}, {25.0, 24}, {40.0, 36}};
    for (const auto& c : cases) {
      double oracle = chi2_sf_simpson(c.x, c.k);
      CHECK(std::abs(chi2_sf(c.x, c.k) - oracle) <= 1e-9);
    }
  }
  SUBCASE("monotone decreasing in x, bounded in [0,1]") {
    for (int k : {1, 2, 4, 36}) {
      double prev = 1.0;
      for (double x = 0.0; x <= 80.0; x += 0.5) {
        double p = chi2_sf(x, k);
        CHECK(p >= 0.0);
        CHECK(p <= prev);
        prev = p;
      }
    }
  }
}

TEST_CASE("vec, unvec and vech are consistent") {
  RngStream rng(16, 0);
  Matrix M = random_matrix(3, 4, rng);
  Vector v = vec(M);
  CHECK(v.size() == 12);
  // Column stacking: entry (i,j) lands at j*rows + i.
  CHECK(v[0] == M(0, 0));
  CHECK(v[3] == M(0, 1));
  CHECK(v[11] == M(2, 3));
  CHECK((unvec(v, 3, 4) - M).cwiseAbs().maxCoeff() == 0.0);

  Matrix Z = random_matrix(3, 3, rng);
  Matrix S = 0.5 * (Z + Z.transpose());
  Vector h = vech(S);
  CHECK(h.size() == 6);
  CHECK(h[0] == S(0, 0));
  CHECK(h[1] == S(1, 0));
  CHECK(h[2] == S(2, 0));
  CHECK(h[3] == S(1, 1));
}

TEST_CASE("spectral_radius returns the dominant eigenvalue modulus") {
  Matrix A(2, 2);
  A << 0.0, -1.0, 1.0, 0.0;  // rotation: both eigenvalues on the unit circle
  CHECK(spectral_radius(0.7 * A) == doctest::Approx(0.7).epsilon(1e-10));

  Matrix D = Matrix::Zero(3, 3);
  D.diagonal() << 0.2, -0.9, 0.5;
  CHECK(spectral_radius(D) == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("mvn_draw applies the covariance factor to seeded normals") {
  Vector mean(2);
  mean << 1.0, -2.0;
  SUBCASE("zero factor returns the mean exactly") {
    RngStream rng(17, 0);
    Vector d = mvn_draw(mean, Matrix::Zero(2, 2), rng);
    CHECK(d[0] == 1.0);
    CHECK(d[1] == -2.0);
  }
  SUBCASE("identical seed and stream give identical draws") {
    RngStream a(99, 7), b(99, 7);
    Matrix L = Matrix::Identity(2, 2);
    Vector da = mvn_draw(mean, L, a);
    Vector db = mvn_draw(mean, L, b);
    CHECK(da[0] == db[0]);
    CHECK(da[1] == db[1]);
  }
  SUBCASE("sample covariance matches the target within Monte Carlo error") {
    Matrix S = builtin_dgp("small-1-h1").sigma_u;
    Matrix L = cholesky(S);
    const int n = S.rows();
    const int N = 200000;
    RngStream rng(18, 0);
    Vector zero = Vector::Zero(n);
    Matrix acc = Matrix::Zero(n, n);
    for (int i = 0; i < N; ++i) {
      Vector d = mvn_draw(zero, L, rng);
      acc += d * d.transpose();
    }
    Matrix Shat = acc / static_cast<double>(N);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        // var of a cross moment of a Gaussian: sigma_ii sigma_jj + sigma_ij^2
        double se = std::sqrt((S(i, i) * S(j, j) + S(i, j) * S(i, j)) / N);
        CHECK(std::abs(Shat(i, j) - S(i, j)) <= 3.0 * se + 1e-12);
      }
  }
}

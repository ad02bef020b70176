#pragma once

#include "msvar/types.hpp"

namespace msvar {

// Lower-triangular L with L*L^T = S. S must be symmetric within 1e-10 relative
// tolerance (NotSymmetric) and positive definite (NotPositiveDefinite).
Matrix cholesky(const Matrix& S);

// Moore-Penrose inverse of the order-n duplication matrix: the
// n(n+1)/2 x n^2 matrix with D_n^+ * vec(S) = vech(S) for symmetric S.
Matrix duplication_pinv(int n);

// Kronecker product, shape (rA*rB) x (cA*cB).
Matrix kron(const Matrix& A, const Matrix& B);

// Number of singular values above rel_tol * largest singular value.
// Zero matrix has rank 0. Throws SvdFailure if the SVD does not converge.
int numerical_rank(const Matrix& M, double rel_tol);

// Overload with the default threshold 1e-8 * max(rows, cols).
int numerical_rank(const Matrix& M);

// Survival function of the chi-square distribution, 1 - F(x; dof), via the
// regularized incomplete gamma function. Absolute error <= 1e-10.
double chi2_sf(double x, int dof);

// Column-stacking vectorization and its inverses.
Vector vec(const Matrix& M);
Matrix unvec(const Vector& v, int rows, int cols);
// Lower triangle stacked column by column.
Vector vech(const Matrix& M);

// Largest eigenvalue modulus.
double spectral_radius(const Matrix& M);

}  // namespace msvar

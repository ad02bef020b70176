#pragma once

#include "msvar/types.hpp"

#include <string>
#include <vector>

namespace msvar {

// Linear equality constraints S * theta = s on a parameter vector theta of
// fixed dimension (implicit form), with a converter to the explicit
// parameterization theta = R * gamma + r over free coordinates gamma.
struct LinearRestrictions {
  int dim = 0;
  Matrix S;  // rows x dim (rows may be redundant; rank() gives the dof)
  Vector s;

  static LinearRestrictions none(int dim);

  // Single row: coefficient 1 on entry `index`, equal to `value`.
  static LinearRestrictions fix_entry(int dim, int index, double value);

  bool empty() const { return S.rows() == 0; }

  // Appends the rows of `other` (same dim).
  void append(const LinearRestrictions& other);
  void append_row(const Vector& row, double rhs);

  // Numerical rank of S = number of independent constraints.
  int rank() const;

  struct Explicit {
    Matrix R;  // dim x free, orthonormal columns spanning the null space of S
    Vector r;  // minimum-norm particular solution
    int free = 0;
  };

  // Null-space/particular-solution conversion via SVD. Throws
  // InfeasibleRestrictions when S * r = s has no solution.
  Explicit to_explicit() const;
};

// Compiles a character-grid pattern into restrictions on vec(M) for an
// n x n matrix M. Cell tokens: "0" fixed zero, "1" fixed one, "*" free,
// "=k" members of equality class k (all cells with the same k constrained
// equal). Grid is a row-major list of n*n tokens.
LinearRestrictions compile_pattern(const std::vector<std::string>& grid, int n);

}  // namespace msvar

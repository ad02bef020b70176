#include "msvar/restrictions.hpp"

#include "msvar/numerics.hpp"

#include <Eigen/SVD>
#include <map>

namespace msvar {

LinearRestrictions LinearRestrictions::none(int dim) {
  LinearRestrictions r;
  r.dim = dim;
  r.S = Matrix::Zero(0, dim);
  r.s = Vector::Zero(0);
  return r;
}

LinearRestrictions LinearRestrictions::fix_entry(int dim, int index,
                                                 double value) {
  LinearRestrictions r = none(dim);
  Vector row = Vector::Zero(dim);
  row(index) = 1.0;
  r.append_row(row, value);
  return r;
}

void LinearRestrictions::append(const LinearRestrictions& other) {
  if (other.dim != dim)
    fail("InvalidArgument", "appending restrictions of different dimension");
  Matrix S2(S.rows() + other.S.rows(), dim);
  S2 << S, other.S;
  Vector s2(s.size() + other.s.size());
  s2 << s, other.s;
  S = std::move(S2);
  s = std::move(s2);
}

void LinearRestrictions::append_row(const Vector& row, double rhs) {
  if (row.size() != dim)
    fail("InvalidArgument", "restriction row has wrong dimension");
  S.conservativeResize(S.rows() + 1, dim);
  S.row(S.rows() - 1) = row.transpose();
  s.conservativeResize(s.size() + 1);
  s(s.size() - 1) = rhs;
}

int LinearRestrictions::rank() const {
  if (S.rows() == 0) return 0;
  return numerical_rank(S);
}

LinearRestrictions::Explicit LinearRestrictions::to_explicit() const {
  Explicit e;
  if (S.rows() == 0) {
    e.R = Matrix::Identity(dim, dim);
    e.r = Vector::Zero(dim);
    e.free = dim;
    return e;
  }
  Eigen::BDCSVD<Matrix> svd(S, Eigen::ComputeFullV | Eigen::ComputeFullU);
  if (svd.info() != Eigen::Success)
    fail("SvdFailure", "SVD failed while converting restrictions");
  const auto& sv = svd.singularValues();
  const double cutoff =
      (sv.size() > 0 ? sv(0) : 0.0) * 1e-12 * std::max(S.rows(), S.cols());
  int k = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++k;

  const Matrix& V = svd.matrixV();
  e.free = dim - k;
  e.R = V.rightCols(e.free);

  // Minimum-norm particular solution r = V * pinv(Sigma) * U^T * s.
  Vector uts = svd.matrixU().transpose() * s;
  Vector w = Vector::Zero(dim);
  for (int i = 0; i < k; ++i) w(i) = uts(i) / sv(i);
  e.r = V * w;

  const double resid = (S * e.r - s).cwiseAbs().maxCoeff();
  if (resid > 1e-8 * (1.0 + s.cwiseAbs().maxCoeff()))
    fail("InfeasibleRestrictions",
         "constraint system has no solution (residual " +
             std::to_string(resid) + ")");
  return e;
}

LinearRestrictions compile_pattern(const std::vector<std::string>& grid,
                                   int n) {
  if (static_cast<int>(grid.size()) != n * n)
    fail("InvalidArgument", "pattern grid must have n*n cells");
  LinearRestrictions out = LinearRestrictions::none(n * n);
  std::map<std::string, std::vector<int>> classes;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::string& tok = grid[i * n + j];
      const int v = j * n + i;  // column-major vec index
      if (tok == "*") continue;
      if (tok == "0" || tok == "1") {
        Vector row = Vector::Zero(n * n);
        row(v) = 1.0;
        out.append_row(row, tok == "1" ? 1.0 : 0.0);
      } else if (tok.size() >= 2 && tok[0] == '=') {
        classes[tok.substr(1)].push_back(v);
      } else {
        fail("ParseError", "bad pattern token '" + tok + "'");
      }
    }
  }
  for (const auto& [label, members] : classes) {
    (void)label;
    for (std::size_t i = 1; i < members.size(); ++i) {
      Vector row = Vector::Zero(n * n);
      row(members[0]) = 1.0;
      row(members[i]) = -1.0;
      out.append_row(row, 0.0);
    }
  }
  return out;
}

}  // namespace msvar

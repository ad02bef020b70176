#include "msvar/layout.hpp"

#include "msvar/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace msvar {

void FrequencyLayout::validate() const {
  if (n_low < 0 || n_high < 0 || n_low + n_high < 1)
    fail("InvalidArgument", "layout needs at least one variable");
  if (m < 2) fail("InvalidArgument", "frequency ratio m must be >= 2");
  if (p < 1) fail("InvalidArgument", "lag order p must be >= 1");
}

AggregationScheme AggregationScheme::uniform(AggregationKind k) {
  AggregationScheme s;
  s.kind = k;
  return s;
}

AggregationScheme AggregationScheme::make_mixed(
    std::vector<AggregationKind> kinds) {
  AggregationScheme s;
  s.mixed = true;
  s.per_variable = std::move(kinds);
  return s;
}

namespace {

AggregationKind kind_from_name(const std::string& name) {
  if (name == "first") return AggregationKind::FirstObservation;
  if (name == "last") return AggregationKind::LastObservation;
  if (name == "sum") return AggregationKind::Sum;
  if (name == "average") return AggregationKind::Average;
  fail("UnsupportedScheme", "unknown aggregation scheme '" + name + "'");
}

std::string kind_name(AggregationKind k) {
  switch (k) {
    case AggregationKind::FirstObservation: return "first";
    case AggregationKind::LastObservation: return "last";
    case AggregationKind::Sum: return "sum";
    case AggregationKind::Average: return "average";
  }
  return "?";
}

}  // namespace

AggregationScheme AggregationScheme::from_name(const std::string& name) {
  if (name.rfind("mixed:", 0) == 0) {
    std::vector<AggregationKind> kinds;
    std::stringstream ss(name.substr(6));
    std::string tok;
    while (std::getline(ss, tok, ',')) kinds.push_back(kind_from_name(tok));
    if (kinds.empty())
      fail("UnsupportedScheme", "mixed scheme needs per-variable kinds");
    return make_mixed(std::move(kinds));
  }
  return uniform(kind_from_name(name));
}

std::string AggregationScheme::name() const {
  if (!mixed) return kind_name(kind);
  std::string out = "mixed:";
  for (std::size_t i = 0; i < per_variable.size(); ++i) {
    if (i) out += ",";
    out += kind_name(per_variable[i]);
  }
  return out;
}

bool AggregationScheme::operator==(const AggregationScheme& other) const {
  return mixed == other.mixed &&
         (mixed ? per_variable == other.per_variable : kind == other.kind);
}

int stacked_dim(const FrequencyLayout& layout) {
  layout.validate();
  return layout.stacked_dim();
}

namespace {

// One selection row per aggregated variable over m slot positions.
void fill_high_row(Matrix& G, int row, const FrequencyLayout& layout, int var,
                   AggregationKind k) {
  switch (k) {
    case AggregationKind::FirstObservation:
      G(row, layout.high_index(var, 1)) = 1.0;
      break;
    case AggregationKind::LastObservation:
      G(row, layout.high_index(var, layout.m)) = 1.0;
      break;
    case AggregationKind::Sum:
      for (int s = 1; s <= layout.m; ++s)
        G(row, layout.high_index(var, s)) = 1.0;
      break;
    case AggregationKind::Average:
      for (int s = 1; s <= layout.m; ++s)
        G(row, layout.high_index(var, s)) = 1.0 / layout.m;
      break;
  }
}

}  // namespace

Matrix selection_matrix(const FrequencyLayout& layout,
                        const AggregationScheme& scheme) {
  layout.validate();
  if (scheme.mixed &&
      static_cast<int>(scheme.per_variable.size()) != layout.n_high)
    fail("SchemeMismatch",
         "mixed scheme assigns " + std::to_string(scheme.per_variable.size()) +
             " kinds for " + std::to_string(layout.n_high) +
             " high-frequency variables");

  Matrix G = Matrix::Zero(layout.n_low + layout.n_high, layout.stacked_dim());
  for (int v = 0; v < layout.n_high; ++v)
    fill_high_row(G, v, layout, v,
                  scheme.mixed ? scheme.per_variable[v] : scheme.kind);
  for (int l = 0; l < layout.n_low; ++l)
    G(layout.n_high + l, layout.low_index(l)) = 1.0;
  return G;
}

namespace {

// Projector onto the orthogonal complement of the row space of G
// (I - G+G with G+ the Moore-Penrose inverse; G has full row rank).
Matrix rowspace_complement(const Matrix& G) {
  Matrix gram = G * G.transpose();
  Matrix pinv_g = G.transpose() * gram.ldlt().solve(
                                      Matrix::Identity(G.rows(), G.rows()));
  return Matrix::Identity(G.cols(), G.cols()) - pinv_g * G;
}

// Rows of vec-space constraints requiring G * M * Q = 0 for an n x n matrix M
// whose entry (a, b) sits at vec position index(a, b).
void append_compatibility_rows(LinearRestrictions& out, const Matrix& G,
                               const Matrix& Q, int n,
                               const std::function<int(int, int)>& index) {
  for (int r = 0; r < G.rows(); ++r) {
    for (int c = 0; c < Q.cols(); ++c) {
      Vector row = Vector::Zero(out.dim);
      double largest = 0.0;
      for (int a = 0; a < n; ++a) {
        if (G(r, a) == 0.0) continue;
        for (int b = 0; b < n; ++b) {
          const double w = G(r, a) * Q(b, c);
          if (w == 0.0) continue;
          row(index(a, b)) += w;
          largest = std::max(largest, std::abs(w));
        }
      }
      if (largest > 1e-14) out.append_row(row, 0.0);
    }
  }
}

}  // namespace

LinearRestrictions reduced_equivalence_restrictions(
    const FrequencyLayout& layout, const AggregationScheme& scheme,
    const CoefficientLayout& coef, int n_exog_vars) {
  layout.validate();
  const int n = layout.stacked_dim();
  if (coef.nn != n)
    fail("InvalidArgument", "coefficient layout does not match frequency layout");
  Matrix G = selection_matrix(layout, scheme);
  Matrix Q = rowspace_complement(G);

  LinearRestrictions out = LinearRestrictions::none(coef.K() * n);
  for (int lag = 1; lag <= coef.p; ++lag) {
    append_compatibility_rows(
        out, G, Q, n, [&](int a, int b) {
          // A_lag(a, b) multiplies variable b in equation a.
          return coef.vec_index(coef.row_lag(lag, b), a);
        });
  }

  if (n_exog_vars > 0) {
    if (scheme.mixed)
      fail("UnsupportedScheme",
           "mixed schemes with exogenous blocks have no aggregated form");
    const int block = layout.m * n_exog_vars;
    if (coef.n_exog % block != 0)
      fail("InvalidArgument",
           "exogenous columns are not stacked blocks of m slots per variable");
    // Aggregation applied to the stacked exogenous block mirrors the
    // endogenous one: Gz rows select/weight per-slot columns.
    FrequencyLayout zlay;
    zlay.n_low = 0;
    zlay.n_high = n_exog_vars;
    zlay.m = layout.m;
    zlay.p = 1;
    Matrix Gz = selection_matrix(zlay, scheme);
    Matrix Qz = rowspace_complement(Gz);
    const int n_blocks = coef.n_exog / block;
    for (int j = 0; j < n_blocks; ++j) {
      // Constraints vec(G * C_j * Qz) = 0 over the block's columns.
      for (int r = 0; r < G.rows(); ++r) {
        for (int c = 0; c < Qz.cols(); ++c) {
          Vector row = Vector::Zero(out.dim);
          double largest = 0.0;
          for (int a = 0; a < n; ++a) {
            if (G(r, a) == 0.0) continue;
            for (int b = 0; b < block; ++b) {
              const double w = G(r, a) * Qz(b, c);
              if (w == 0.0) continue;
              row(coef.vec_index(coef.row_exog(j * block + b), a)) += w;
              largest = std::max(largest, std::abs(w));
            }
          }
          if (largest > 1e-14) out.append_row(row, 0.0);
        }
      }
    }
  }
  return out;
}

std::pair<LinearRestrictions, LinearRestrictions>
structural_equivalence_restrictions(const FrequencyLayout& layout,
                                    const AggregationScheme& scheme) {
  layout.validate();
  const int n = layout.stacked_dim();
  Matrix G = selection_matrix(layout, scheme);
  Matrix Q = rowspace_complement(G);

  LinearRestrictions on_a = LinearRestrictions::none(n * n);
  LinearRestrictions on_b = LinearRestrictions::none(n * n);
  auto vec_index = [n](int a, int b) { return b * n + a; };
  append_compatibility_rows(on_a, G, Q, n, vec_index);
  append_compatibility_rows(on_b, G, Q, n, vec_index);
  return {std::move(on_a), std::move(on_b)};
}

}  // namespace msvar

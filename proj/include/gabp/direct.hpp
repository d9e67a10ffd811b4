#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "gabp/sym_system.hpp"

namespace gabp {

class SingularMatrixError : public InputError {
 public:
  using InputError::InputError;
};

/// LU factorization with partial pivoting of a dense square matrix.
class DenseLu {
 public:
  explicit DenseLu(std::vector<Vector> a) : lu_(std::move(a)), perm_(lu_.size()) {
    const std::size_t n = lu_.size();
    double scale = 0.0;
    for (const auto& row : lu_) {
      if (row.size() != n) throw InputError("matrix is not square");
      for (double v : row) scale = std::max(scale, std::abs(v));
    }
    for (std::size_t i = 0; i < n; ++i) perm_[i] = i;
    const double tiny = 1e-14 * (scale > 0.0 ? scale : 1.0);

    for (std::size_t k = 0; k < n; ++k) {
      std::size_t piv = k;
      for (std::size_t i = k + 1; i < n; ++i) {
        if (std::abs(lu_[i][k]) > std::abs(lu_[piv][k])) piv = i;
      }
      if (!(std::abs(lu_[piv][k]) > tiny)) {
        throw SingularMatrixError("matrix is singular to working precision (pivot " +
                                  std::to_string(k + 1) + ")");
      }
      std::swap(lu_[k], lu_[piv]);
      std::swap(perm_[k], perm_[piv]);
      for (std::size_t i = k + 1; i < n; ++i) {
        const double f = lu_[i][k] / lu_[k][k];
        lu_[i][k] = f;
        for (std::size_t j = k + 1; j < n; ++j) lu_[i][j] -= f * lu_[k][j];
      }
    }
  }

  std::size_t size() const { return lu_.size(); }

  Vector solve(const Vector& b) const {
    const std::size_t n = size();
    if (b.size() != n) throw InputError("dimension mismatch in solve");
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = b[perm_[i]];
      for (std::size_t j = 0; j < i; ++j) s -= lu_[i][j] * x[j];
      x[i] = s;
    }
    for (std::size_t i = n; i-- > 0;) {
      double s = x[i];
      for (std::size_t j = i + 1; j < n; ++j) s -= lu_[i][j] * x[j];
      x[i] = s / lu_[i][i];
    }
    return x;
  }

 private:
  std::vector<Vector> lu_;
  std::vector<std::size_t> perm_;
};

/// Gaussian elimination with partial pivoting; throws SingularMatrixError.
inline Vector direct_solve_ge(const SymSystem& system) {
  return DenseLu(system.dense()).solve(system.rhs());
}

/// Diagonal of A^{-1}, column by column.
inline Vector inverse_diagonal(const SymSystem& system) {
  DenseLu lu(system.dense());
  Vector d(system.size());
  Vector e(system.size(), 0.0);
  for (std::size_t i = 0; i < system.size(); ++i) {
    e[i] = 1.0;
    d[i] = lu.solve(e)[i];
    e[i] = 0.0;
  }
  return d;
}

}  // namespace gabp

#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gabp {

using Vector = std::vector<double>;

/// Raised for malformed input, dimension mismatches and structurally
/// unusable systems (e.g. a zero on the diagonal).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unordered index pair {i, j} with i < j, used as the key of the
/// off-diagonal store.
struct EdgeKey {
  std::size_t lo = 0;
  std::size_t hi = 0;

  static EdgeKey of(std::size_t i, std::size_t j) {
    return i < j ? EdgeKey{i, j} : EdgeKey{j, i};
  }
  friend auto operator<=>(const EdgeKey&, const EdgeKey&) = default;
};

/// Square symmetric system A x = b. One stored value serves both (i,j)
/// and (j,i); an entry that is exactly zero is never stored.
class SymSystem {
 public:
  SymSystem() = default;

  /// Identity-diagonal placeholder of dimension n with zero rhs.
  explicit SymSystem(std::size_t n) : diag_(n, 1.0), rhs_(n, 0.0) {
    if (n == 0) throw InputError("system dimension must be at least 1");
  }

  SymSystem(Vector diag, Vector rhs) : diag_(std::move(diag)), rhs_(std::move(rhs)) {
    if (diag_.empty()) throw InputError("system dimension must be at least 1");
    if (diag_.size() != rhs_.size()) {
      throw InputError("rhs length " + std::to_string(rhs_.size()) +
                       " does not match dimension " + std::to_string(diag_.size()));
    }
  }

  std::size_t size() const { return diag_.size(); }

  double diag(std::size_t i) const { return diag_.at(i); }
  const Vector& diagonal() const { return diag_; }
  const Vector& rhs() const { return rhs_; }
  double rhs(std::size_t i) const { return rhs_.at(i); }
  const std::map<EdgeKey, double>& offdiag() const { return offdiag_; }

  /// A_ij for any i, j (zero when not stored).
  double at(std::size_t i, std::size_t j) const {
    if (i == j) return diag_.at(i);
    check_index(i);
    check_index(j);
    auto it = offdiag_.find(EdgeKey::of(i, j));
    return it == offdiag_.end() ? 0.0 : it->second;
  }

  void set_diag(std::size_t i, double v) {
    check_index(i);
    diag_[i] = v;
  }

  /// Sets A_ij = A_ji = v. Writing 0 removes the edge.
  void set(std::size_t i, std::size_t j, double v) {
    if (i == j) {
      set_diag(i, v);
      return;
    }
    check_index(i);
    check_index(j);
    if (v == 0.0) {
      offdiag_.erase(EdgeKey::of(i, j));
    } else {
      offdiag_[EdgeKey::of(i, j)] = v;
    }
  }

  void set_rhs(std::size_t i, double v) {
    check_index(i);
    rhs_[i] = v;
  }

  void set_rhs(Vector b) {
    if (b.size() != size()) {
      throw InputError("rhs length " + std::to_string(b.size()) +
                       " does not match dimension " + std::to_string(size()));
    }
    rhs_ = std::move(b);
  }

  /// y = A x
  Vector multiply(const Vector& x) const {
    if (x.size() != size()) throw InputError("dimension mismatch in multiply");
    Vector y(size());
    for (std::size_t i = 0; i < size(); ++i) y[i] = diag_[i] * x[i];
    for (const auto& [key, v] : offdiag_) {
      y[key.lo] += v * x[key.hi];
      y[key.hi] += v * x[key.lo];
    }
    return y;
  }

  /// Row-major dense copy of A.
  std::vector<Vector> dense() const {
    std::vector<Vector> a(size(), Vector(size(), 0.0));
    for (std::size_t i = 0; i < size(); ++i) a[i][i] = diag_[i];
    for (const auto& [key, v] : offdiag_) {
      a[key.lo][key.hi] = v;
      a[key.hi][key.lo] = v;
    }
    return a;
  }

  friend bool operator==(const SymSystem&, const SymSystem&) = default;

 private:
  void check_index(std::size_t i) const {
    if (i >= size()) {
      throw InputError("index " + std::to_string(i) + " out of range for dimension " +
                       std::to_string(size()));
    }
  }

  Vector diag_;
  std::map<EdgeKey, double> offdiag_;
  Vector rhs_;
};

/// Builds a SymSystem from a dense row-major matrix; asymmetric input is
/// rejected.
inline SymSystem from_dense(const std::vector<Vector>& a, Vector rhs) {
  const std::size_t n = a.size();
  Vector d(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i].size() != n) throw InputError("dense matrix is not square");
    d[i] = a[i][i];
  }
  SymSystem s(std::move(d), std::move(rhs));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (a[i][j] != a[j][i]) {
        throw InputError("matrix is not symmetric at (" + std::to_string(i + 1) + "," +
                         std::to_string(j + 1) + ")");
      }
      s.set(i, j, a[i][j]);
    }
  }
  return s;
}

/// Dense or sparse rectangular matrix (m rows, n cols).
class RectMatrix {
 public:
  RectMatrix() = default;
  RectMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {
    if (rows == 0 || cols == 0) throw InputError("matrix dimensions must be at least 1");
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double at(std::size_t i, std::size_t j) const {
    check(i, j);
    auto it = entries_.find({i, j});
    return it == entries_.end() ? 0.0 : it->second;
  }

  void set(std::size_t i, std::size_t j, double v) {
    check(i, j);
    if (v == 0.0) {
      entries_.erase({i, j});
    } else {
      entries_[{i, j}] = v;
    }
  }

  std::size_t nonzeros() const { return entries_.size(); }
  const std::map<std::pair<std::size_t, std::size_t>, double>& entries() const { return entries_; }

  Vector multiply(const Vector& x) const {
    if (x.size() != cols_) throw InputError("dimension mismatch in multiply");
    Vector y(rows_, 0.0);
    for (const auto& [ij, v] : entries_) y[ij.first] += v * x[ij.second];
    return y;
  }

  Vector multiply_transposed(const Vector& x) const {
    if (x.size() != rows_) throw InputError("dimension mismatch in transposed multiply");
    Vector y(cols_, 0.0);
    for (const auto& [ij, v] : entries_) y[ij.second] += v * x[ij.first];
    return y;
  }

  friend bool operator==(const RectMatrix&, const RectMatrix&) = default;

 private:
  void check(std::size_t i, std::size_t j) const {
    if (i >= rows_ || j >= cols_) {
      throw InputError("index (" + std::to_string(i) + "," + std::to_string(j) +
                       ") out of range");
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::map<std::pair<std::size_t, std::size_t>, double> entries_;
};

}  // namespace gabp

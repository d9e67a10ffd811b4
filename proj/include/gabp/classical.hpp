#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gabp/diagnostics.hpp"
#include "gabp/report.hpp"
#include "gabp/sym_system.hpp"

namespace gabp {

struct ClassicalOptions {
  double epsilon = 1e-6;
  std::size_t max_iter = 10000;
  double blowup = 1e10;
  /// Start vector; empty means x0 = b.
  Vector x0;
  /// Damping weight of the damped Gauss-Seidel ("SOR") update.
  double alpha = 0.5;
  IterationObserver on_iteration;

  void validate() const {
    if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
    if (max_iter < 1) throw InputError("max_iter must be at least 1");
    if (!(blowup > 1.0)) throw InputError("blowup threshold must exceed 1");
  }
};

enum class Method { jacobi, gauss_seidel, sor };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::jacobi: return "jacobi";
    case Method::gauss_seidel: return "gs";
    case Method::sor: return "sor";
  }
  return "jacobi";
}

/// Dense row-major iteration x^t = B x^{t-1} + c.
struct StationaryIteration {
  std::vector<Vector> iter_matrix;
  Vector shift;

  Vector apply(const Vector& x) const {
    Vector y(shift);
    for (std::size_t i = 0; i < y.size(); ++i) {
      for (std::size_t j = 0; j < x.size(); ++j) y[i] += iter_matrix[i][j] * x[j];
    }
    return y;
  }
};

namespace detail {

inline void require_nonzero_diagonal(const SymSystem& system) {
  for (std::size_t i = 0; i < system.size(); ++i) {
    if (system.diag(i) == 0.0) {
      throw InputError("zero diagonal entry in row " + std::to_string(i + 1));
    }
  }
}

// Off-diagonal entries of each row, for sweeps that need row access.
struct RowView {
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;

  explicit RowView(const SymSystem& s) : rows(s.size()) {
    for (const auto& [key, v] : s.offdiag()) {
      rows[key.lo].push_back({key.hi, v});
      rows[key.hi].push_back({key.lo, v});
    }
    for (auto& r : rows) std::sort(r.begin(), r.end());
  }
};

inline double jacobi_component(const SymSystem& s, const RowView& rv, const Vector& x,
                               std::size_t i) {
  double sum = s.rhs(i);
  for (const auto& [k, v] : rv.rows[i]) sum -= v * x[k];
  return sum / s.diag(i);
}

}  // namespace detail

/// x_i^t = (b_i - sum_{k != i} A_ik x_k^{t-1}) / A_ii
inline Vector jacobi_step(const SymSystem& system, const Vector& x) {
  const detail::RowView rv(system);
  Vector next(system.size());
  for (std::size_t i = 0; i < system.size(); ++i) next[i] = detail::jacobi_component(system, rv, x, i);
  return next;
}

/// Damped Gauss-Seidel: x_i^t = alpha x_i^{t-1} + (1 - alpha) GS_i, where
/// GS_i already uses the updated x_k^t for k < i. alpha = 0 is plain GS.
inline Vector sor_step(const SymSystem& system, const Vector& x, double alpha) {
  const detail::RowView rv(system);
  Vector next(x);
  for (std::size_t i = 0; i < system.size(); ++i) {
    const double gs = detail::jacobi_component(system, rv, next, i);
    next[i] = alpha * x[i] + (1.0 - alpha) * gs;
  }
  return next;
}

inline Vector gauss_seidel_step(const SymSystem& system, const Vector& x) {
  return sor_step(system, x, 0.0);
}

/// Explicit (B, c) for a stationary method. For GS and SOR with
/// omega = 1 - alpha: (D + omega L) x^t = ((1 - omega) D - omega U) x + omega b.
inline StationaryIteration build_stationary(const SymSystem& system, Method method,
                                            double alpha = 0.0) {
  detail::require_nonzero_diagonal(system);
  const std::size_t n = system.size();
  const auto a = system.dense();
  StationaryIteration it;
  it.iter_matrix.assign(n, Vector(n, 0.0));
  it.shift.assign(n, 0.0);

  if (method == Method::jacobi) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) it.iter_matrix[i][j] = -a[i][j] / a[i][i];
      }
      it.shift[i] = system.rhs(i) / a[i][i];
    }
    return it;
  }

  const double omega = method == Method::gauss_seidel ? 1.0 : 1.0 - alpha;
  // Right-hand operator N = (1 - omega) D - omega U, stacked with omega b,
  // then forward substitution with M = D + omega L on every column.
  std::vector<Vector> rhs(n, Vector(n + 1, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    rhs[i][i] = (1.0 - omega) * a[i][i];
    for (std::size_t j = i + 1; j < n; ++j) rhs[i][j] = -omega * a[i][j];
    rhs[i][n] = omega * system.rhs(i);
  }
  for (std::size_t col = 0; col <= n; ++col) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = rhs[i][col];
      for (std::size_t k = 0; k < i; ++k) {
        const double y = col < n ? it.iter_matrix[k][col] : it.shift[k];
        s -= omega * a[i][k] * y;
      }
      const double v = s / a[i][i];
      if (col < n) {
        it.iter_matrix[i][col] = v;
      } else {
        it.shift[i] = v;
      }
    }
  }
  return it;
}

namespace detail {

template <class Step>
SolveReport run_stationary(const SymSystem& system, const ClassicalOptions& options, Step step) {
  options.validate();
  require_nonzero_diagonal(system);
  Vector x = options.x0.empty() ? system.rhs() : options.x0;
  if (x.size() != system.size()) throw InputError("start vector length does not match dimension");

  SolveReport report;
  for (std::size_t t = 1; t <= options.max_iter; ++t) {
    Vector next = step(x);
    double change = 0.0;
    bool blown = false;
    for (std::size_t i = 0; i < next.size(); ++i) {
      if (!std::isfinite(next[i]) || std::abs(next[i]) > options.blowup) blown = true;
      change = std::max(change, std::abs(next[i] - x[i]));
    }
    x = std::move(next);
    report.iterations = t;
    if (blown) {
      report.diverged = true;
      report.note = "iterate magnitude exceeded blowup threshold";
      report.max_change_history.push_back(std::numeric_limits<double>::infinity());
      report.residual_history.push_back(std::numeric_limits<double>::infinity());
      break;
    }
    report.max_change_history.push_back(change);
    report.residual_history.push_back(residual_norm_per_eq(system, x));
    if (options.on_iteration) options.on_iteration(t, x);
    if (change < options.epsilon) {
      report.converged = true;
      break;
    }
  }
  if (!report.converged && !report.diverged) {
    report.diverged = true;
    report.note = "iteration cap " + std::to_string(options.max_iter) + " reached";
  }
  report.means = std::move(x);
  return report;
}

}  // namespace detail

inline SolveReport jacobi_solve(const SymSystem& system, const ClassicalOptions& options = {}) {
  const detail::RowView rv(system);
  return detail::run_stationary(system, options, [&](const Vector& x) {
    Vector next(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) next[i] = detail::jacobi_component(system, rv, x, i);
    return next;
  });
}

inline SolveReport sor_solve(const SymSystem& system, const ClassicalOptions& options) {
  if (!(options.alpha >= 0.0 && options.alpha < 1.0)) {
    throw InputError("damping alpha must lie in [0, 1)");
  }
  const detail::RowView rv(system);
  const double alpha = options.alpha;
  return detail::run_stationary(system, options, [&](const Vector& x) {
    Vector next(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double gs = detail::jacobi_component(system, rv, next, i);
      next[i] = alpha * x[i] + (1.0 - alpha) * gs;
    }
    return next;
  });
}

inline SolveReport gauss_seidel_solve(const SymSystem& system, ClassicalOptions options = {}) {
  options.alpha = 0.0;
  return sor_solve(system, options);
}

struct SorChoice {
  double alpha = 0.0;
  SolveReport report;  // diverged when every alpha diverges
};

/// Grid search over alpha in {0.01, ..., 0.99}; fewest iterations wins and
/// ties go to the smaller alpha.
inline SorChoice optimal_sor_alpha(const SymSystem& system, ClassicalOptions options = {}) {
  std::optional<SorChoice> best;
  SolveReport last;
  for (int k = 1; k <= 99; ++k) {
    options.alpha = k / 100.0;
    SolveReport r = sor_solve(system, options);
    if (r.converged && (!best || r.iterations < best->report.iterations)) {
      best = SorChoice{options.alpha, std::move(r)};
    } else {
      last = std::move(r);
    }
  }
  if (best) return *best;
  last.note = "diverged for every alpha on the grid";
  return SorChoice{0.0, std::move(last)};
}

}  // namespace gabp

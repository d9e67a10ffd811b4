#pragma once

#include <cstddef>
#include <string>
#include <utility>

#include "gabp/diagnostics.hpp"
#include "gabp/gabp_solver.hpp"
#include "gabp/sym_system.hpp"

namespace gabp {

/// Symmetric embedding of a rectangular least-squares problem:
///
///   [ I_n   S^T    ] [ x ]   [ 0 ]
///   [ S    -psi I_m] [ z ] = [ y ]
///
/// whose leading block solves (S^T S + psi I) x = S^T y.
struct AugmentedSystem {
  RectMatrix base;
  double psi = 0.0;
  SymSystem assembled;

  std::size_t unknowns() const { return base.cols(); }
};

inline AugmentedSystem build_augmented(const RectMatrix& s, const Vector& y, double psi) {
  if (!(psi > 0.0)) throw InputError("regularization psi must be positive");
  if (y.size() != s.rows()) {
    throw InputError("observation length " + std::to_string(y.size()) +
                     " does not match matrix rows " + std::to_string(s.rows()));
  }
  const std::size_t n = s.cols();
  const std::size_t m = s.rows();
  Vector diag(n + m, 1.0);
  Vector rhs(n + m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    diag[n + i] = -psi;
    rhs[n + i] = y[i];
  }
  SymSystem sys(std::move(diag), std::move(rhs));
  for (const auto& [ij, v] : s.entries()) sys.set(ij.second, n + ij.first, v);
  return AugmentedSystem{s, psi, std::move(sys)};
}

inline SolveOptions default_lsq_options() {
  SolveOptions o;
  o.schedule = Schedule::serial;
  return o;
}

struct LeastSquaresResult {
  Vector x;  // leading n entries
  Vector z;  // trailing m entries
  SolveReport report;
  /// Filled when GaBP fails, to show whether the convergence test applied.
  double spectral_radius = 0.0;
};

/// Regularized least squares by GaBP on the augmented system. Serial
/// scheduling unless the caller overrides it.
inline LeastSquaresResult solve_least_squares(const RectMatrix& s, const Vector& y,
                                              double psi = 1e-6,
                                              SolveOptions options = default_lsq_options()) {
  const AugmentedSystem aug = build_augmented(s, y, psi);
  LeastSquaresResult out;
  out.report = solve(aug.assembled, options);
  const std::size_t n = s.cols();
  out.x.assign(out.report.means.begin(), out.report.means.begin() + static_cast<std::ptrdiff_t>(n));
  out.z.assign(out.report.means.begin() + static_cast<std::ptrdiff_t>(n), out.report.means.end());
  if (!out.report.converged) out.spectral_radius = spectral_radius_gabp_test(aug.assembled);
  return out;
}

}  // namespace gabp

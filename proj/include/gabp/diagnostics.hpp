#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>

#include "gabp/direct.hpp"
#include "gabp/sym_system.hpp"

namespace gabp {

/// ||A x - b||_2 / n
inline double residual_norm_per_eq(const SymSystem& system, const Vector& x) {
  if (x.size() != system.size()) {
    throw InputError("solution length " + std::to_string(x.size()) +
                     " does not match dimension " + std::to_string(system.size()));
  }
  const Vector ax = system.multiply(x);
  double sum = 0.0;
  for (std::size_t i = 0; i < ax.size(); ++i) {
    const double r = ax[i] - system.rhs(i);
    sum += r * r;
  }
  return std::sqrt(sum) / static_cast<double>(system.size());
}

enum class Dominance { strict, weak, none };

inline std::string_view to_string(Dominance d) {
  switch (d) {
    case Dominance::strict: return "strict";
    case Dominance::weak: return "weak";
    case Dominance::none: return "none";
  }
  return "none";
}

inline Dominance dominance_class(const SymSystem& system) {
  Vector row_sum(system.size(), 0.0);
  for (const auto& [key, v] : system.offdiag()) {
    row_sum[key.lo] += std::abs(v);
    row_sum[key.hi] += std::abs(v);
  }
  bool strict = true;
  for (std::size_t i = 0; i < system.size(); ++i) {
    const double d = std::abs(system.diag(i));
    if (d < row_sum[i]) return Dominance::none;
    if (!(d > row_sum[i])) strict = false;
  }
  return strict ? Dominance::strict : Dominance::weak;
}

struct PowerIterationSettings {
  double tolerance = 1e-6;
  std::size_t max_iter = 10000;
};

/// rho(|I - D^{-1} A|) by power iteration from the all-ones vector.
///
/// The iteration runs on |I - D^{-1}A| + I, whose Perron root is strictly
/// dominant even when the unshifted matrix is periodic (bipartite graphs
/// give eigenvalue pairs +-rho); the shift is removed from the estimate.
inline double spectral_radius_gabp_test(const SymSystem& system,
                                        PowerIterationSettings settings = {}) {
  const std::size_t n = system.size();
  Vector inv_d(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (system.diag(i) == 0.0) {
      throw InputError("zero diagonal entry in row " + std::to_string(i + 1));
    }
    inv_d[i] = 1.0 / system.diag(i);
  }

  Vector x(n, 1.0 / std::sqrt(static_cast<double>(n)));
  Vector y(n);
  double estimate = 0.0;
  for (std::size_t it = 0; it < settings.max_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i];
    for (const auto& [key, v] : system.offdiag()) {
      y[key.lo] += std::abs(v * inv_d[key.lo]) * x[key.hi];
      y[key.hi] += std::abs(v * inv_d[key.hi]) * x[key.lo];
    }
    double norm = 0.0;
    for (double v : y) norm += v * v;
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / norm;
    const double next = norm - 1.0;
    const bool done = it > 0 && std::abs(next - estimate) < settings.tolerance;
    estimate = next;
    if (done) break;
  }
  return estimate < 0.0 ? 0.0 : estimate;
}

namespace detail {

// Largest |lambda| of a symmetric operator by the norm-ratio form of power
// iteration, which is monotone for symmetric matrices.
template <class Apply>
double dominant_magnitude(std::size_t n, Apply apply, double tol, std::size_t max_iter) {
  Vector x(n);
  double norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = 1.0 + 0.1 * std::sin(static_cast<double>(i + 1));
    norm += x[i] * x[i];
  }
  norm = std::sqrt(norm);
  for (double& v : x) v /= norm;

  double estimate = 0.0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    Vector y = apply(x);
    double ny = 0.0;
    for (double v : y) ny += v * v;
    ny = std::sqrt(ny);
    if (ny == 0.0) return 0.0;
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / ny;
    const bool done = it > 0 && std::abs(ny - estimate) <= tol * ny;
    estimate = ny;
    if (done) break;
  }
  return estimate;
}

}  // namespace detail

/// kappa_2 = |lambda_max| / |lambda_min| for a symmetric matrix; +infinity
/// when the matrix is singular to working precision.
inline double condition_number_normal(const SymSystem& system) {
  constexpr double kTol = 1e-13;
  constexpr std::size_t kMaxIter = 100000;
  const std::size_t n = system.size();
  const double inf = std::numeric_limits<double>::infinity();

  const double lmax = detail::dominant_magnitude(
      n, [&](const Vector& v) { return system.multiply(v); }, kTol, kMaxIter);
  if (lmax == 0.0) return inf;

  try {
    DenseLu lu(system.dense());
    const double inv_lmin = detail::dominant_magnitude(
        n, [&](const Vector& v) { return lu.solve(v); }, kTol, kMaxIter);
    const double lmin = 1.0 / inv_lmin;
    if (!std::isfinite(lmin) || lmin < 1e-12 * lmax) return inf;
    return std::max(1.0, lmax / lmin);
  } catch (const SingularMatrixError&) {
    return inf;
  }
}

struct SpectralReport {
  double rho = 0.0;
  Dominance dominance = Dominance::none;
  double kappa = 1.0;

  /// Strict dominance guarantees GaBP convergence.
  bool dominance_guarantee() const { return dominance == Dominance::strict; }
  /// rho(|I - D^{-1}A|) < 1 guarantees GaBP convergence.
  bool spectral_guarantee() const { return rho < 1.0; }
};

inline SpectralReport analyze(const SymSystem& system) {
  return SpectralReport{spectral_radius_gabp_test(system), dominance_class(system),
                        condition_number_normal(system)};
}

}  // namespace gabp

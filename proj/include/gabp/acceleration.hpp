#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <utility>

#include "gabp/classical.hpp"
#include "gabp/gabp_solver.hpp"
#include "gabp/report.hpp"

namespace gabp {

enum class AccelMode { none, aitken, steffensen };
enum class AccelTarget { solution_vector, mean_messages };

inline std::string_view to_string(AccelMode m) {
  switch (m) {
    case AccelMode::none: return "none";
    case AccelMode::aitken: return "aitken";
    case AccelMode::steffensen: return "steffensen";
  }
  return "none";
}

struct AccelConfig {
  AccelMode mode = AccelMode::none;
  /// Components whose second difference is smaller than this are passed
  /// through unextrapolated.
  double denom_guard = 1e-12;
  AccelTarget target = AccelTarget::mean_messages;
};

/// Componentwise Aitken delta-squared:
///   y = x_n - (x_{n+1} - x_n)^2 / (x_{n+2} - 2 x_{n+1} + x_n)
/// Components with |denominator| < denom_guard take x_{n+2}.
inline Vector aitken_extrapolate(const Vector& x_n, const Vector& x_n1, const Vector& x_n2,
                                 double denom_guard = 1e-12) {
  if (x_n.size() != x_n1.size() || x_n.size() != x_n2.size()) {
    throw InputError("Aitken extrapolation needs three vectors of equal length");
  }
  Vector y(x_n2);
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double d1 = x_n1[k] - x_n[k];
    const double denom = x_n2[k] - 2.0 * x_n1[k] + x_n[k];
    if (std::abs(denom) >= denom_guard) y[k] = x_n[k] - d1 * d1 / denom;
  }
  return y;
}

/// A base iteration that acceleration can drive. step() advances one
/// iteration, target() exposes the sequence that Steffensen rewrites, and
/// solution() is the current tentative solution.
template <class P>
concept IterativeProcess = requires(P p, const P cp) {
  { p.step() } -> std::same_as<SweepResult>;
  { p.target() } -> std::same_as<Vector&>;
  { cp.solution() } -> std::same_as<Vector>;
  { cp.blowup() } -> std::convertible_to<double>;
};

/// GaBP under a fixed schedule; Steffensen rewrites the mean messages and
/// leaves the precision messages alone.
class GabpProcess {
 public:
  GabpProcess(const SymSystem& system, SolveOptions options)
      : graph_(system), options_(std::move(options)) {
    options_.validate(system.size());
    state_ = MessageState::initial(graph_, options_.schedule);
  }

  SweepResult step() { return run_round(graph_, state_, options_); }
  Vector& target() { return state_.mean_msg; }
  Vector solution() const { return infer_marginals(graph_, state_).means; }
  Vector precisions() const { return infer_marginals(graph_, state_).precisions; }
  double blowup() const { return options_.blowup; }
  const GaussianGraph& graph() const { return graph_; }
  const MessageState& state() const { return state_; }

 private:
  GaussianGraph graph_;
  SolveOptions options_;
  MessageState state_;
};

/// Jacobi, Gauss-Seidel or damped GS as a steppable process on x.
class ClassicalProcess {
 public:
  ClassicalProcess(const SymSystem& system, Method method, ClassicalOptions options)
      : system_(system), method_(method), options_(std::move(options)) {
    options_.validate();
    detail::require_nonzero_diagonal(system_);
    x_ = options_.x0.empty() ? system_.rhs() : options_.x0;
    if (x_.size() != system_.size()) throw InputError("start vector length does not match dimension");
  }

  SweepResult step() {
    Vector next = method_ == Method::jacobi         ? jacobi_step(system_, x_)
                  : method_ == Method::gauss_seidel ? gauss_seidel_step(system_, x_)
                                                    : sor_step(system_, x_, options_.alpha);
    SweepResult r;
    for (std::size_t i = 0; i < next.size(); ++i) {
      if (!std::isfinite(next[i]) || std::abs(next[i]) > options_.blowup) {
        r.diverged = true;
        r.reason = "iterate magnitude exceeded blowup threshold";
      }
      r.max_change = std::max(r.max_change, std::abs(next[i] - x_[i]));
    }
    x_ = std::move(next);
    return r;
  }
  Vector& target() { return x_; }
  Vector solution() const { return x_; }
  double blowup() const { return options_.blowup; }

 private:
  SymSystem system_;
  Method method_;
  ClassicalOptions options_;
  Vector x_;
};

namespace detail {

// Records one base iteration; returns false when the run must stop on
// divergence.
template <IterativeProcess P>
bool record_step(const SymSystem& system, const P& process, const SweepResult& r,
                 SolveReport& report) {
  ++report.iterations;
  if (r.diverged) {
    report.diverged = true;
    report.note = r.reason;
    report.max_change_history.push_back(std::numeric_limits<double>::infinity());
    report.residual_history.push_back(std::numeric_limits<double>::infinity());
    return false;
  }
  const Vector x = process.solution();
  report.max_change_history.push_back(r.max_change);
  for (double v : x) {
    if (!std::isfinite(v)) {
      report.diverged = true;
      report.note = "tentative solution is undefined";
      report.residual_history.push_back(std::numeric_limits<double>::infinity());
      return false;
    }
  }
  report.residual_history.push_back(residual_norm_per_eq(system, x));
  return true;
}

inline double max_abs_diff(const Vector& a, const Vector& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace detail

/// Steffensen iteration: from x_n run two base iterations, replace the
/// target sequence with the Aitken extrapolate, repeat. Stops when a base
/// iteration moves less than epsilon or the extrapolate moves less than
/// epsilon from the restart point. `iterations` counts base iterations.
template <IterativeProcess P>
SolveReport steffensen_solve(P& process, const SymSystem& system, double epsilon,
                             std::size_t max_iter, const AccelConfig& accel = {}) {
  if (!(accel.denom_guard > 0.0)) throw InputError("denominator guard must be positive");
  SolveReport report;
  while (report.iterations < max_iter) {
    const Vector x0 = process.target();
    const SweepResult r1 = process.step();
    if (!detail::record_step(system, process, r1, report)) break;
    if (r1.max_change < epsilon) {
      report.converged = true;
      break;
    }
    if (report.iterations >= max_iter) break;
    const Vector x1 = process.target();
    const SweepResult r2 = process.step();
    if (!detail::record_step(system, process, r2, report)) break;
    if (r2.max_change < epsilon) {
      report.converged = true;
      break;
    }
    Vector y = aitken_extrapolate(x0, x1, process.target(), accel.denom_guard);
    bool blown = false;
    for (double v : y) {
      if (!std::isfinite(v) || std::abs(v) > process.blowup()) blown = true;
    }
    if (blown) {
      report.diverged = true;
      report.note = "extrapolated value exceeded blowup threshold";
      break;
    }
    const double moved = detail::max_abs_diff(y, x0);
    process.target() = std::move(y);
    if (moved < epsilon) {
      report.converged = true;
      break;
    }
  }
  if (!report.converged && !report.diverged) {
    report.diverged = true;
    report.note = "iteration cap " + std::to_string(max_iter) + " reached";
  }
  report.means = process.solution();
  return report;
}

/// Non-restarting Aitken: the base iteration runs untouched and the
/// tentative solutions are extrapolated over a trailing window of three.
/// Converges when consecutive extrapolates differ by less than epsilon (or
/// the base iteration itself converges); the reported solution is the last
/// extrapolate.
template <IterativeProcess P>
SolveReport aitken_solve(P& process, const SymSystem& system, double epsilon,
                         std::size_t max_iter, const AccelConfig& accel = {}) {
  if (!(accel.denom_guard > 0.0)) throw InputError("denominator guard must be positive");
  SolveReport report;
  Vector w0, w1, w2 = process.solution();
  Vector prev_y;
  Vector y;
  while (report.iterations < max_iter) {
    const SweepResult r = process.step();
    if (!detail::record_step(system, process, r, report)) break;
    w0 = std::move(w1);
    w1 = std::move(w2);
    w2 = process.solution();
    if (r.max_change < epsilon) {
      report.converged = true;
      y = w2;
      break;
    }
    if (w0.empty()) continue;
    y = aitken_extrapolate(w0, w1, w2, accel.denom_guard);
    if (!prev_y.empty() && detail::max_abs_diff(y, prev_y) < epsilon) {
      report.converged = true;
      break;
    }
    prev_y = y;
  }
  if (!report.converged && !report.diverged) {
    report.diverged = true;
    report.note = "iteration cap " + std::to_string(max_iter) + " reached";
  }
  report.means = y.empty() ? process.solution() : y;
  return report;
}

/// GaBP with optional acceleration.
inline SolveReport solve_accelerated(const SymSystem& system, const SolveOptions& options,
                                     const AccelConfig& accel) {
  if (accel.mode == AccelMode::none) return solve(system, options);
  GabpProcess process(system, options);
  SolveReport report;
  if (accel.mode == AccelMode::steffensen) {
    if (accel.target != AccelTarget::mean_messages) {
      throw InputError("Steffensen restarts GaBP through its mean messages");
    }
    report = steffensen_solve(process, system, options.epsilon, options.max_iter, accel);
  } else {
    report = aitken_solve(process, system, options.epsilon, options.max_iter, accel);
  }
  report.precisions = process.precisions();
  report.precisions_exact = process.graph().is_tree_or_forest();
  report.messages_sent = process.state().messages_sent;
  return report;
}

/// Classical method with optional acceleration on the solution vector.
inline SolveReport solve_classical_accelerated(const SymSystem& system, Method method,
                                               const ClassicalOptions& options,
                                               const AccelConfig& accel) {
  if (accel.mode == AccelMode::none) {
    switch (method) {
      case Method::jacobi: return jacobi_solve(system, options);
      case Method::gauss_seidel: return gauss_seidel_solve(system, options);
      case Method::sor: return sor_solve(system, options);
    }
  }
  ClassicalProcess process(system, method, options);
  return accel.mode == AccelMode::steffensen
             ? steffensen_solve(process, system, options.epsilon, options.max_iter, accel)
             : aitken_solve(process, system, options.epsilon, options.max_iter, accel);
}

}  // namespace gabp

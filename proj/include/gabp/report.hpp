#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "gabp/sym_system.hpp"

namespace gabp {

/// One row of a per-iteration trace.
struct TraceRow {
  std::size_t iteration = 0;
  double max_change = 0.0;
  double residual_per_eq = 0.0;
};

/// Called after every iteration with the iteration number (1-based) and the
/// tentative solution.
using IterationObserver = std::function<void(std::size_t, const Vector&)>;

/// Outcome of an iterative solve. `converged` and `diverged` are never both
/// set; a run that hits the iteration cap is reported as diverged.
struct SolveReport {
  bool converged = false;
  bool diverged = false;
  std::size_t iterations = 0;
  Vector means;
  Vector precisions;  // empty for solvers that carry no precision
  /// Marginal precisions are exact only on cycle-free graphs.
  bool precisions_exact = false;
  std::vector<double> max_change_history;
  std::vector<double> residual_history;
  std::size_t messages_sent = 0;
  std::string note;

  std::vector<TraceRow> trace() const {
    std::vector<TraceRow> rows;
    rows.reserve(max_change_history.size());
    for (std::size_t t = 0; t < max_change_history.size(); ++t) {
      rows.push_back({t + 1, max_change_history[t], residual_history[t]});
    }
    return rows;
  }
};

}  // namespace gabp

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "gabp/diagnostics.hpp"
#include "gabp/graph.hpp"
#include "gabp/report.hpp"
#include "gabp/sym_system.hpp"

namespace gabp {

enum class Schedule { parallel, serial, broadcast };
enum class MessageRule { sum_product, max_product };

inline std::string_view to_string(Schedule s) {
  switch (s) {
    case Schedule::parallel: return "parallel";
    case Schedule::serial: return "serial";
    case Schedule::broadcast: return "broadcast";
  }
  return "parallel";
}

struct SolveOptions {
  double epsilon = 1e-6;
  std::size_t max_iter = 10000;
  /// Any |message| above this marks the run as diverged.
  double blowup = 1e10;
  Schedule schedule = Schedule::parallel;
  MessageRule rule = MessageRule::sum_product;
  /// Node visiting order for the serial schedule; empty means ascending.
  std::vector<std::size_t> serial_order;
  /// Threads used by the parallel schedule. Results do not depend on it.
  std::size_t workers = 1;
  IterationObserver on_iteration;

  void validate(std::size_t n) const {
    if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
    if (max_iter < 1) throw InputError("max_iter must be at least 1");
    if (!(blowup > 1.0)) throw InputError("blowup threshold must exceed 1");
    if (workers < 1) throw InputError("workers must be at least 1");
    if (!serial_order.empty()) {
      if (serial_order.size() != n) throw InputError("serial order is not a permutation");
      std::vector<bool> seen(n, false);
      for (auto i : serial_order) {
        if (i >= n || seen[i]) throw InputError("serial order is not a permutation");
        seen[i] = true;
      }
    }
  }
};

/// Thrown when the precision accumulated at a node, excluding one
/// recipient, is exactly zero.
class SingularSubgraphError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Per-directed-edge precision and mean messages, indexed by EdgeId.
struct MessageState {
  Vector prec_msg;
  Vector mean_msg;
  std::size_t iteration = 0;
  Schedule schedule = Schedule::parallel;
  /// Transmissions so far: one per directed edge per naive sweep, one per
  /// node per broadcast sweep.
  std::size_t messages_sent = 0;

  static MessageState initial(const GaussianGraph& graph, Schedule schedule = Schedule::parallel) {
    MessageState s;
    s.prec_msg.assign(graph.edge_count(), 0.0);
    s.mean_msg.assign(graph.edge_count(), 0.0);
    s.schedule = schedule;
    return s;
  }
};

struct Message {
  double prec = 0.0;
  double mean = 0.0;
};

namespace detail {

// Prior of node i combined with every incoming message except the one on
// edge `skip` (pass graph.edge_count() to skip nothing). Returns the
// precision P and the information P*mu.
inline std::pair<double, double> accumulate_excluding(const GaussianGraph& graph,
                                                      const Vector& prec, const Vector& mean,
                                                      std::size_t i, EdgeId skip) {
  double p = graph.prior_prec(i);
  double h = graph.prior_prec(i) * graph.prior_mean(i);
  for (EdgeId f = graph.first_edge(i); f < graph.end_edge(i); ++f) {
    if (f == skip) continue;
    const EdgeId in = graph.reverse(f);
    p += prec[in];
    h += prec[in] * mean[in];
  }
  return {p, h};
}

inline Message message_on_edge(const GaussianGraph& graph, const Vector& prec, const Vector& mean,
                               EdgeId e, MessageRule rule) {
  const std::size_t i = graph.source(e);
  const auto [p_excl, h_excl] = accumulate_excluding(graph, prec, mean, i, e);
  if (p_excl == 0.0) {
    throw SingularSubgraphError("zero precision at node " + std::to_string(i + 1) +
                                " excluding neighbor " + std::to_string(graph.target(e) + 1));
  }
  const double a = graph.coeff(e);
  if (rule == MessageRule::sum_product) {
    // Integrating x_i out of psi_ij * phi_i * prod m_ki.
    return {-a * a / p_excl, h_excl / a};
  }
  // Maximizing over x_i instead: x_i* = (P mu - a x_j) / P; substituting
  // back leaves exp((P mu - a x_j)^2 / (2P)), a Gaussian in x_j with
  // quadratic coefficient -a^2/P and linear coefficient -a mu.
  const double mu_excl = h_excl / p_excl;
  const double quad = a * a / p_excl;
  const double prec_ij = -quad;
  const double lin = -a * mu_excl;
  return {prec_ij, lin / prec_ij};
}

inline bool out_of_bounds(const Message& m, double blowup) {
  return !std::isfinite(m.prec) || !std::isfinite(m.mean) || std::abs(m.prec) > blowup ||
         std::abs(m.mean) > blowup;
}

}  // namespace detail

/// Message i -> j (sum-product rule) from the messages currently in `state`.
inline Message compute_message(const GaussianGraph& graph, const MessageState& state,
                               std::size_t i, std::size_t j) {
  return detail::message_on_edge(graph, state.prec_msg, state.mean_msg, graph.edge(i, j),
                                 MessageRule::sum_product);
}

/// Message i -> j by the max-product rule. Equal to compute_message in exact
/// arithmetic.
inline Message compute_message_max_product(const GaussianGraph& graph, const MessageState& state,
                                           std::size_t i, std::size_t j) {
  return detail::message_on_edge(graph, state.prec_msg, state.mean_msg, graph.edge(i, j),
                                 MessageRule::max_product);
}

struct SweepResult {
  double max_change = 0.0;
  bool diverged = false;
  std::string reason;
};

namespace detail {

struct NodeRangeResult {
  double max_change = 0.0;
  bool diverged = false;
  std::string reason;
};

// Writes messages for the outgoing edges of nodes [first, last) into `out_*`,
// reading from `in_*`. With in == out this is an in-place (serial) update.
inline NodeRangeResult update_nodes(const GaussianGraph& graph, const Vector& in_prec,
                                    const Vector& in_mean, Vector& out_prec, Vector& out_mean,
                                    const Vector& old_prec, const Vector& old_mean,
                                    const std::size_t* nodes, std::size_t count,
                                    const SolveOptions& options) {
  NodeRangeResult r;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t i = nodes[k];
    for (EdgeId e = graph.first_edge(i); e < graph.end_edge(i); ++e) {
      Message m;
      try {
        m = message_on_edge(graph, in_prec, in_mean, e, options.rule);
      } catch (const SingularSubgraphError& err) {
        r.diverged = true;
        r.reason = err.what();
        return r;
      }
      if (out_of_bounds(m, options.blowup)) {
        r.diverged = true;
        r.reason = "message magnitude exceeded blowup threshold";
        return r;
      }
      r.max_change = std::max({r.max_change, std::abs(m.prec - old_prec[e]),
                               std::abs(m.mean - old_mean[e])});
      out_prec[e] = m.prec;
      out_mean[e] = m.mean;
    }
  }
  return r;
}

inline std::vector<std::size_t> visiting_order(std::size_t n, const SolveOptions& options) {
  if (!options.serial_order.empty()) return options.serial_order;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  return order;
}

}  // namespace detail

/// One round of message updates under the parallel or serial schedule.
///
/// Parallel: every message is computed from the previous round's buffer, so
/// nodes can be split across `options.workers` threads. Serial: nodes are
/// visited in `options.serial_order` and each update is visible to the next.
inline SweepResult sweep(const GaussianGraph& graph, MessageState& state,
                         const SolveOptions& options) {
  const std::size_t n = graph.size();
  SweepResult result;
  const Vector old_prec = state.prec_msg;
  const Vector old_mean = state.mean_msg;

  if (options.schedule == Schedule::serial) {
    const auto order = detail::visiting_order(n, options);
    auto r = detail::update_nodes(graph, state.prec_msg, state.mean_msg, state.prec_msg,
                                  state.mean_msg, old_prec, old_mean, order.data(), n, options);
    result = {r.max_change, r.diverged, r.reason};
  } else {
    Vector next_prec = old_prec;
    Vector next_mean = old_mean;
    const auto order = detail::visiting_order(n, SolveOptions{});
    const std::size_t workers = std::min(options.workers, std::max<std::size_t>(n, 1));
    std::vector<detail::NodeRangeResult> parts(workers);
    auto run = [&](std::size_t w) {
      const std::size_t first = n * w / workers;
      const std::size_t last = n * (w + 1) / workers;
      parts[w] = detail::update_nodes(graph, old_prec, old_mean, next_prec, next_mean, old_prec,
                                      old_mean, order.data() + first, last - first, options);
    };
    if (workers == 1) {
      run(0);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(workers);
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
      for (auto& t : pool) t.join();
    }
    for (const auto& p : parts) {
      result.max_change = std::max(result.max_change, p.max_change);
      if (p.diverged && !result.diverged) {
        result.diverged = true;
        result.reason = p.reason;
      }
    }
    state.prec_msg = std::move(next_prec);
    state.mean_msg = std::move(next_mean);
  }
  ++state.iteration;
  state.messages_sent += graph.edge_count();
  return result;
}

/// Node aggregate broadcast once per round: the marginal (P~_i, mu~_i).
struct NodeBroadcast {
  double prec = 0.0;
  double mean = 0.0;
};

/// One parallel round in which every node broadcasts a single aggregate and
/// each receiver recovers its pairwise message by subtracting its own
/// contribution.
inline SweepResult broadcast_sweep(const GaussianGraph& graph, MessageState& state,
                                   const SolveOptions& options) {
  const std::size_t n = graph.size();
  SweepResult result;
  std::vector<NodeBroadcast> casts(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [p, h] = detail::accumulate_excluding(graph, state.prec_msg, state.mean_msg, i,
                                                     graph.edge_count());
    if (p == 0.0) {
      result.diverged = true;
      result.reason = "zero aggregate precision at node " + std::to_string(i + 1);
      ++state.iteration;
      state.messages_sent += n;
      return result;
    }
    casts[i] = {p, h / p};
  }

  Vector next_prec(state.prec_msg.size());
  Vector next_mean(state.mean_msg.size());
  for (EdgeId e = 0; e < graph.edge_count(); ++e) {
    const std::size_t i = graph.source(e);
    const EdgeId back = graph.reverse(e);  // j -> i, the recipient's own message
    const double p_excl = casts[i].prec - state.prec_msg[back];
    if (p_excl == 0.0) {
      result.diverged = true;
      result.reason = "zero precision at node " + std::to_string(i + 1) + " excluding neighbor " +
                      std::to_string(graph.target(e) + 1);
      break;
    }
    const double h_excl = casts[i].prec * casts[i].mean - state.prec_msg[back] * state.mean_msg[back];
    const double mu_excl = h_excl / p_excl;
    const double a = graph.coeff(e);
    const Message m{-a * a / p_excl, p_excl * mu_excl / a};
    if (detail::out_of_bounds(m, options.blowup)) {
      result.diverged = true;
      result.reason = "message magnitude exceeded blowup threshold";
      break;
    }
    result.max_change = std::max({result.max_change, std::abs(m.prec - state.prec_msg[e]),
                                  std::abs(m.mean - state.mean_msg[e])});
    next_prec[e] = m.prec;
    next_mean[e] = m.mean;
  }
  if (!result.diverged) {
    state.prec_msg = std::move(next_prec);
    state.mean_msg = std::move(next_mean);
  }
  ++state.iteration;
  state.messages_sent += n;
  return result;
}

/// Runs one round under `options.schedule`.
inline SweepResult run_round(const GaussianGraph& graph, MessageState& state,
                             const SolveOptions& options) {
  return options.schedule == Schedule::broadcast ? broadcast_sweep(graph, state, options)
                                                 : sweep(graph, state, options);
}

struct Marginals {
  Vector means;
  Vector precisions;
  /// False when some node's total precision is zero; its mean is NaN.
  bool defined = true;
};

inline Marginals infer_marginals(const GaussianGraph& graph, const MessageState& state) {
  Marginals m;
  m.means.resize(graph.size());
  m.precisions.resize(graph.size());
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const auto [p, h] =
        detail::accumulate_excluding(graph, state.prec_msg, state.mean_msg, i, graph.edge_count());
    m.precisions[i] = p;
    if (p == 0.0) {
      m.means[i] = std::numeric_limits<double>::quiet_NaN();
      m.defined = false;
    } else {
      m.means[i] = h / p;
    }
  }
  return m;
}

namespace detail {

inline void finish_cap(SolveReport& report, std::size_t max_iter) {
  if (!report.converged && !report.diverged) {
    report.diverged = true;
    report.note = "iteration cap " + std::to_string(max_iter) + " reached";
  }
}

}  // namespace detail

/// Solves A x = b by GaBP. Stops when every message moves by less than
/// epsilon in one round; divergence is reported, never thrown.
inline SolveReport solve(const SymSystem& system, const SolveOptions& options = {}) {
  options.validate(system.size());
  const GaussianGraph graph(system);
  MessageState state = MessageState::initial(graph, options.schedule);
  SolveReport report;
  report.precisions_exact = graph.is_tree_or_forest();

  Marginals marg = infer_marginals(graph, state);
  for (std::size_t t = 1; t <= options.max_iter; ++t) {
    const SweepResult sr = run_round(graph, state, options);
    report.iterations = t;
    if (sr.diverged) {
      report.diverged = true;
      report.note = sr.reason;
      report.max_change_history.push_back(std::numeric_limits<double>::infinity());
      report.residual_history.push_back(std::numeric_limits<double>::infinity());
      break;
    }
    marg = infer_marginals(graph, state);
    report.max_change_history.push_back(sr.max_change);
    if (!marg.defined) {
      report.diverged = true;
      report.note = "marginal precision vanished";
      report.residual_history.push_back(std::numeric_limits<double>::infinity());
      break;
    }
    report.residual_history.push_back(residual_norm_per_eq(system, marg.means));
    if (options.on_iteration) options.on_iteration(t, marg.means);
    if (sr.max_change < options.epsilon) {
      report.converged = true;
      break;
    }
  }
  detail::finish_cap(report, options.max_iter);
  report.means = std::move(marg.means);
  report.precisions = std::move(marg.precisions);
  report.messages_sent = state.messages_sent;
  return report;
}

/// GaBP with precision messages pinned to zero and each node's outgoing
/// mean computed from all of its neighbors. Node i then sends the
/// information -A_ij mu_i, and the tentative means follow the Jacobi
/// iteration started at x0_i = b_i / A_ii. Convergence is declared on the
/// change of the tentative means, as for the classical method.
inline SolveReport jacobi_mode_solve(const SymSystem& system, const SolveOptions& options = {}) {
  options.validate(system.size());
  const GaussianGraph graph(system);
  const std::size_t n = graph.size();
  Vector info(graph.edge_count(), 0.0);  // P_ij * mu_ij per directed edge
  Vector means(n);
  for (std::size_t i = 0; i < n; ++i) means[i] = graph.prior_mean(i);

  SolveReport report;
  for (std::size_t t = 1; t <= options.max_iter; ++t) {
    // mu_{i\j} = mu_i for every j: nothing is excluded.
    for (EdgeId e = 0; e < graph.edge_count(); ++e) {
      info[e] = -graph.coeff(e) * means[graph.source(e)];
    }
    Vector next(n);
    double change = 0.0;
    bool blown = false;
    for (std::size_t i = 0; i < n; ++i) {
      double h = graph.rhs(i);
      for (EdgeId f = graph.first_edge(i); f < graph.end_edge(i); ++f) h += info[graph.reverse(f)];
      next[i] = h / graph.prior_prec(i);
      if (!std::isfinite(next[i]) || std::abs(next[i]) > options.blowup) blown = true;
      change = std::max(change, std::abs(next[i] - means[i]));
    }
    report.iterations = t;
    report.messages_sent += graph.edge_count();
    means = std::move(next);
    report.max_change_history.push_back(change);
    if (blown) {
      report.diverged = true;
      report.note = "iterate magnitude exceeded blowup threshold";
      report.residual_history.push_back(std::numeric_limits<double>::infinity());
      break;
    }
    report.residual_history.push_back(residual_norm_per_eq(system, means));
    if (options.on_iteration) options.on_iteration(t, means);
    if (change < options.epsilon) {
      report.converged = true;
      break;
    }
  }
  detail::finish_cap(report, options.max_iter);
  report.means = std::move(means);
  return report;
}

/// Quadratic min-sum state on the unit-diagonal normalized system:
/// gamma (quadratic parameter) and z (linear parameter) per directed edge.
struct MinSumState {
  Vector gamma;
  Vector z;
};

/// Symmetrically normalized system Gamma = D^{-1/2} A D^{-1/2},
/// h = D^{-1/2} b, together with the scale D^{-1/2}.
struct NormalizedSystem {
  GaussianGraph graph;
  Vector scale;
};

inline NormalizedSystem normalize_unit_diagonal(const SymSystem& system) {
  Vector scale(system.size());
  for (std::size_t i = 0; i < system.size(); ++i) {
    if (!(system.diag(i) > 0.0)) {
      throw InputError("min-sum normalization needs a positive diagonal (row " +
                       std::to_string(i + 1) + ")");
    }
    scale[i] = 1.0 / std::sqrt(system.diag(i));
  }
  Vector h(system.size());
  for (std::size_t i = 0; i < system.size(); ++i) h[i] = system.rhs(i) * scale[i];
  SymSystem normalized(Vector(system.size(), 1.0), std::move(h));
  for (const auto& [key, v] : system.offdiag()) {
    normalized.set(key.lo, key.hi, v * scale[key.lo] * scale[key.hi]);
  }
  return {GaussianGraph(normalized), std::move(scale)};
}

/// One min-sum round on a normalized graph (parallel unless the schedule is
/// serial). Returns the largest parameter change.
inline SweepResult min_sum_sweep(const GaussianGraph& g, MinSumState& state,
                                 const SolveOptions& options) {
  SweepResult result;
  const bool serial = options.schedule == Schedule::serial;
  const MinSumState old = state;
  MinSumState next = state;
  const MinSumState& in = serial ? next : old;
  for (std::size_t i : detail::visiting_order(g.size(), serial ? options : SolveOptions{})) {
    for (EdgeId e = g.first_edge(i); e < g.end_edge(i); ++e) {
      double quad = 0.0;
      double lin = 0.0;
      for (EdgeId f = g.first_edge(i); f < g.end_edge(i); ++f) {
        if (f == e) continue;
        const EdgeId u_to_i = g.reverse(f);
        const double gam = g.coeff(u_to_i);
        quad += gam * gam * in.gamma[u_to_i];
        lin += in.z[u_to_i];
      }
      const double denom = 1.0 - quad;
      if (denom == 0.0) {
        result.diverged = true;
        result.reason = "zero quadratic parameter at node " + std::to_string(i + 1);
        return result;
      }
      const double gamma = 1.0 / denom;
      const double z = g.coeff(e) * gamma * (g.rhs(i) - lin);
      if (!std::isfinite(gamma) || !std::isfinite(z) || std::abs(gamma) > options.blowup ||
          std::abs(z) > options.blowup) {
        result.diverged = true;
        result.reason = "parameter magnitude exceeded blowup threshold";
        return result;
      }
      result.max_change = std::max({result.max_change, std::abs(gamma - old.gamma[e]),
                                    std::abs(z - old.z[e])});
      next.gamma[e] = gamma;
      next.z[e] = z;
    }
  }
  state = std::move(next);
  return result;
}

/// Quadratic min-sum parameterization of the same message passing. The
/// system is normalized to unit diagonal, solved, and rescaled back.
inline SolveReport min_sum_solve(const SymSystem& system, const SolveOptions& options = {}) {
  options.validate(system.size());
  const NormalizedSystem ns = normalize_unit_diagonal(system);
  const GaussianGraph& g = ns.graph;
  const std::size_t n = g.size();
  MinSumState state{Vector(g.edge_count(), 0.0), Vector(g.edge_count(), 0.0)};

  SolveReport report;
  report.precisions_exact = g.is_tree_or_forest();
  auto marginals = [&](Vector& means, Vector& precs) {
    means.resize(n);
    precs.resize(n);
    bool ok = true;
    for (std::size_t i = 0; i < n; ++i) {
      double quad = 0.0;
      double lin = 0.0;
      for (EdgeId f = g.first_edge(i); f < g.end_edge(i); ++f) {
        const EdgeId u_to_i = g.reverse(f);
        const double gam = g.coeff(u_to_i);
        quad += gam * gam * state.gamma[u_to_i];
        lin += state.z[u_to_i];
      }
      const double p = 1.0 - quad;
      if (p == 0.0) ok = false;
      means[i] = ns.scale[i] * (g.rhs(i) - lin) / p;
      precs[i] = p / (ns.scale[i] * ns.scale[i]);
    }
    return ok;
  };

  // Convergence is judged on the GaBP messages of the original system that
  // (gamma, z) encode: P_ij = -Gamma_ij^2 gamma_ij / s_j^2 and
  // mu_ij = s_j z_ij / (Gamma_ij^2 gamma_ij), so both parameterizations stop
  // on the same round.
  auto message_change = [&](const MinSumState& before, const MinSumState& after) {
    double change = 0.0;
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
      const double s = ns.scale[g.target(e)];
      const double c2 = g.coeff(e) * g.coeff(e);
      const double p_old = -c2 * before.gamma[e];
      const double p_new = -c2 * after.gamma[e];
      const double mu_old = p_old == 0.0 ? 0.0 : -before.z[e] / p_old;
      const double mu_new = -after.z[e] / p_new;
      change = std::max({change, std::abs(p_new - p_old) / (s * s), std::abs(mu_new - mu_old) * s});
    }
    return change;
  };

  for (std::size_t t = 1; t <= options.max_iter; ++t) {
    const MinSumState before = state;
    SweepResult sr = min_sum_sweep(g, state, options);
    if (!sr.diverged) sr.max_change = message_change(before, state);
    report.iterations = t;
    report.messages_sent += g.edge_count();
    if (sr.diverged) {
      report.diverged = true;
      report.note = sr.reason;
      report.max_change_history.push_back(std::numeric_limits<double>::infinity());
      report.residual_history.push_back(std::numeric_limits<double>::infinity());
      break;
    }
    report.max_change_history.push_back(sr.max_change);
    if (!marginals(report.means, report.precisions)) {
      report.diverged = true;
      report.note = "marginal precision vanished";
      report.residual_history.push_back(std::numeric_limits<double>::infinity());
      break;
    }
    report.residual_history.push_back(residual_norm_per_eq(system, report.means));
    if (options.on_iteration) options.on_iteration(t, report.means);
    if (sr.max_change < options.epsilon) {
      report.converged = true;
      break;
    }
  }
  if (report.means.empty()) marginals(report.means, report.precisions);
  detail::finish_cap(report, options.max_iter);
  return report;
}

}  // namespace gabp

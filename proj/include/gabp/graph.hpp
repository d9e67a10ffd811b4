#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gabp/sym_system.hpp"

namespace gabp {

/// A scalar Gaussian in (mean, precision) form. Precision may be negative
/// for intermediate message-passing quantities.
struct ScalarGaussian {
  double mean = 0.0;
  double prec = 0.0;
};

class DegenerateProductError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Product of two Gaussian densities, up to a constant factor.
inline ScalarGaussian gaussian_product(ScalarGaussian a, ScalarGaussian b) {
  const double prec = a.prec + b.prec;
  if (prec == 0.0) throw DegenerateProductError("precisions cancel in Gaussian product");
  return {(a.prec * a.mean + b.prec * b.mean) / prec, prec};
}

using EdgeId = std::size_t;

/// Pairwise Gaussian graphical model of a SymSystem.
///
/// Directed edges are stored CSR-style: the outgoing edges of node i are the
/// ids [offset(i), offset(i+1)), one per neighbor in ascending order, so the
/// edge i->neighbors(i)[k] has id offset(i)+k. reverse(e) is the id of the
/// opposite direction, which is how a node finds its incoming messages.
class GaussianGraph {
 public:
  explicit GaussianGraph(const SymSystem& system)
      : prior_prec_(system.size()),
        prior_mean_(system.size()),
        rhs_(system.rhs()),
        offsets_(system.size() + 1, 0) {
    const std::size_t n = system.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (system.diag(i) == 0.0) {
        throw InputError("zero diagonal entry in row " + std::to_string(i + 1));
      }
      prior_prec_[i] = system.diag(i);
      prior_mean_[i] = system.rhs(i) / system.diag(i);
    }

    for (const auto& [key, v] : system.offdiag()) {
      ++offsets_[key.lo + 1];
      ++offsets_[key.hi + 1];
    }
    for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];

    const std::size_t m = offsets_[n];
    targets_.resize(m);
    coeff_.resize(m);
    reverse_.resize(m);
    sources_.resize(m);

    // std::map iterates keys in (lo, hi) order, so each node's outgoing list
    // is filled in ascending neighbor order: for node i, neighbors below i
    // arrive while i is the `hi` end, which happens before any key with lo=i.
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (const auto& [key, v] : system.offdiag()) {
      const EdgeId fwd = fill[key.lo]++;
      const EdgeId bwd = fill[key.hi]++;
      targets_[fwd] = key.hi;
      sources_[fwd] = key.lo;
      targets_[bwd] = key.lo;
      sources_[bwd] = key.hi;
      coeff_[fwd] = v;
      coeff_[bwd] = v;
      reverse_[fwd] = bwd;
      reverse_[bwd] = fwd;
    }
  }

  std::size_t size() const { return prior_prec_.size(); }
  std::size_t edge_count() const { return targets_.size(); }

  double prior_prec(std::size_t i) const { return prior_prec_[i]; }
  double prior_mean(std::size_t i) const { return prior_mean_[i]; }
  double rhs(std::size_t i) const { return rhs_[i]; }

  std::span<const std::size_t> neighbors(std::size_t i) const {
    return {targets_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  std::size_t degree(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }

  EdgeId first_edge(std::size_t i) const { return offsets_[i]; }
  EdgeId end_edge(std::size_t i) const { return offsets_[i + 1]; }

  std::size_t source(EdgeId e) const { return sources_[e]; }
  std::size_t target(EdgeId e) const { return targets_[e]; }
  double coeff(EdgeId e) const { return coeff_[e]; }
  EdgeId reverse(EdgeId e) const { return reverse_[e]; }

  /// Id of the directed edge i -> j; throws std::out_of_range if absent.
  EdgeId edge(std::size_t i, std::size_t j) const {
    auto nb = neighbors(i);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      if (nb[k] == j) return offsets_[i] + k;
    }
    throw std::out_of_range("no edge " + std::to_string(i) + "->" + std::to_string(j));
  }

  bool is_tree_or_forest() const { return edge_count() / 2 + components() == size(); }

  std::size_t components() const {
    std::vector<std::size_t> parent(size());
    for (std::size_t i = 0; i < size(); ++i) parent[i] = i;
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    std::size_t count = size();
    for (EdgeId e = 0; e < edge_count(); ++e) {
      auto a = find(sources_[e]);
      auto b = find(targets_[e]);
      if (a != b) {
        parent[a] = b;
        --count;
      }
    }
    return count;
  }

  /// Reassembles the system the graph was built from.
  SymSystem to_system() const {
    SymSystem s(prior_prec_, rhs_);
    for (EdgeId e = 0; e < edge_count(); ++e) s.set(sources_[e], targets_[e], coeff_[e]);
    return s;
  }

 private:
  Vector prior_prec_;
  Vector prior_mean_;
  Vector rhs_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> targets_;
  std::vector<std::size_t> sources_;
  Vector coeff_;
  std::vector<EdgeId> reverse_;
};

inline GaussianGraph build_graph(const SymSystem& system) { return GaussianGraph(system); }

}  // namespace gabp

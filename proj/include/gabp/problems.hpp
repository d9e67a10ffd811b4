#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gabp/gabp_solver.hpp"
#include "gabp/sym_system.hpp"

namespace gabp {

/// A named benchmark system with the reference numbers it is known for.
/// Reference iteration counts are keyed by solver label (see bench).
struct ProblemInstance {
  std::string id;
  SymSystem system;
  std::optional<Vector> reference_solution;
  std::map<std::string, std::size_t> reference_iterations;
  /// Jacobi, GS and SOR are expected to diverge.
  bool expect_classical_divergence = false;
};

/// The 3x3 tree x-y, x-z with solution (1, 2, -1).
inline ProblemInstance gen_toy3() {
  ProblemInstance p;
  p.id = "toy3";
  p.system = from_dense({{1, -2, 3}, {-2, 1, 0}, {3, 0, 1}}, {-6, 0, 2});
  p.reference_solution = Vector{1, 2, -1};
  return p;
}

/// Gold-code cross-correlation matrices for 3 and 4 users (length-7
/// codes), observed with the all-ones vector.
inline ProblemInstance gen_cdma(int users) {
  ProblemInstance p;
  std::vector<Vector> r;
  if (users == 3) {
    r = {{7, -1, 3}, {-1, 7, -5}, {3, -5, 7}};
    p.reference_iterations = {{"jacobi", 111},
                              {"gs", 26},
                              {"parallel_gabp", 23},
                              {"optimal_sor", 17},
                              {"serial_gabp", 16},
                              {"parallel_gabp+steffensen", 13},
                              {"serial_gabp+steffensen", 9}};
  } else if (users == 4) {
    r = {{7, -1, 3, 3}, {-1, 7, 3, -1}, {3, 3, 7, -1}, {3, -1, -1, 7}};
    p.reference_iterations = {{"jacobi", 24},
                              {"gs", 26},
                              {"parallel_gabp", 24},
                              {"optimal_sor", 14},
                              {"serial_gabp", 13},
                              {"parallel_gabp+steffensen", 13},
                              {"serial_gabp+steffensen", 7}};
  } else {
    throw InputError("CDMA instances exist for 3 or 4 users, not " + std::to_string(users));
  }
  for (auto& row : r) {
    for (double& v : row) v /= 7.0;
  }
  p.id = "cdma" + std::to_string(users);
  p.system = from_dense(r, Vector(static_cast<std::size_t>(users), 1.0));
  return p;
}

/// Symmetric indefinite 3x3 on which the stationary methods diverge.
inline ProblemInstance gen_nonpsd3() {
  ProblemInstance p;
  p.id = "nonpsd3";
  p.system = from_dense({{1, 2, 3}, {2, 2, 1}, {3, 1, 1}}, {1, 1, 1});
  p.expect_classical_divergence = true;
  p.reference_iterations = {{"parallel_gabp", 38},
                            {"serial_gabp", 25},
                            {"parallel_gabp+steffensen", 21},
                            {"serial_gabp+steffensen", 14}};
  return p;
}

/// Five-point discretization of Laplace(u) = f on the unit square with zero
/// Dirichlet boundary, p interior points per side, h = 1/(p+1):
///   4U(i,j) - U(i-1,j) - U(i+1,j) - U(i,j-1) - U(i,j+1) = -f h^2
/// Unknowns are numbered left to right, bottom to top.
inline ProblemInstance gen_poisson(std::size_t p, double f = -1.0) {
  if (p < 1) throw InputError("Poisson grid needs p >= 1");
  const std::size_t n = p * p;
  const double h = 1.0 / static_cast<double>(p + 1);
  ProblemInstance inst;
  inst.id = "poisson:" + std::to_string(p);
  inst.system = SymSystem(Vector(n, 4.0), Vector(n, -f * h * h));
  for (std::size_t row = 0; row < p; ++row) {
    for (std::size_t col = 0; col < p; ++col) {
      const std::size_t k = row * p + col;
      if (col + 1 < p) inst.system.set(k, k + 1, -1.0);
      if (row + 1 < p) inst.system.set(k, k + p, -1.0);
    }
  }
  if (p == 3) {
    inst.reference_iterations = {{"jacobi", 354},
                                 {"gs", 136},
                                 {"optimal_sor", 37},
                                 {"parallel_gabp", 134},
                                 {"serial_gabp", 73},
                                 {"parallel_gabp+aitken", 25},
                                 {"parallel_gabp+steffensen", 56},
                                 {"serial_gabp+steffensen", 32}};
  }
  return inst;
}

class SolverDivergedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using VectorSolver = std::function<Vector(const SymSystem&)>;

/// GaBP as a VectorSolver; throws SolverDivergedError when it fails.
inline VectorSolver gabp_vector_solver(SolveOptions options = {}) {
  return [options](const SymSystem& s) {
    SolveReport r = solve(s, options);
    if (!r.converged) throw SolverDivergedError("GaBP did not converge: " + r.note);
    return r.means;
  };
}

/// Decorrelator decisions sign(R^{-1} y); sign(0) is +1.
inline std::vector<int> decorrelator_detect(const SymSystem& correlation, const Vector& y,
                                            const VectorSolver& solver) {
  SymSystem s = correlation;
  s.set_rhs(y);
  const Vector x = solver(s);
  std::vector<int> decisions(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) decisions[i] = x[i] < 0.0 ? -1 : 1;
  return decisions;
}

enum class RandomKind { tree, strict_dominant, spd };

namespace detail {

// Platform-independent uniform draw in [lo, hi); std distributions are
// implementation-defined, which would break bit-determinism.
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % n);
}

}  // namespace detail

/// Seeded random instances for property tests:
///  - tree: a random spanning tree (n-1 edges), diagonal magnitudes in
///    [1, 3) with random sign, edge weights in [-1, 1);
///  - strict_dominant: about half the pairs coupled, diagonal set to the
///    row's absolute sum plus one;
///  - spd: M^T M + I for M uniform in [-1, 1).
/// The right-hand side is uniform in [-1, 1).
inline ProblemInstance gen_random(RandomKind kind, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw InputError("random instance needs n >= 1");
  std::mt19937_64 rng(seed);
  Vector rhs(n);
  ProblemInstance p;
  SymSystem s(Vector(n, 1.0), Vector(n, 0.0));

  switch (kind) {
    case RandomKind::tree: {
      p.id = "random-tree";
      for (std::size_t i = 0; i < n; ++i) {
        const double mag = detail::uniform(rng, 1.0, 3.0);
        s.set_diag(i, (rng() & 1u) ? mag : -mag);
      }
      for (std::size_t i = 1; i < n; ++i) {
        const std::size_t parent = detail::uniform_index(rng, i);
        double w = 0.0;
        while (w == 0.0) w = detail::uniform(rng, -1.0, 1.0);
        s.set(parent, i, w);
      }
      break;
    }
    case RandomKind::strict_dominant: {
      p.id = "random-dominant";
      Vector row_sum(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          if (rng() & 1u) {
            double w = 0.0;
            while (w == 0.0) w = detail::uniform(rng, -1.0, 1.0);
            s.set(i, j, w);
            row_sum[i] += std::abs(w);
            row_sum[j] += std::abs(w);
          }
        }
      }
      for (std::size_t i = 0; i < n; ++i) s.set_diag(i, row_sum[i] + 1.0);
      break;
    }
    case RandomKind::spd: {
      p.id = "random-spd";
      std::vector<Vector> m(n, Vector(n));
      for (auto& row : m) {
        for (double& v : row) v = detail::uniform(rng, -1.0, 1.0);
      }
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
          double dot = 0.0;
          for (std::size_t k = 0; k < n; ++k) dot += m[k][i] * m[k][j];
          if (i == j) {
            s.set_diag(i, dot + 1.0);
          } else {
            s.set(i, j, dot);
          }
        }
      }
      break;
    }
  }
  for (double& v : rhs) v = detail::uniform(rng, -1.0, 1.0);
  s.set_rhs(std::move(rhs));
  p.system = std::move(s);
  return p;
}

/// Built-in instance by name: toy3, cdma3, cdma4, nonpsd3, poisson:P.
inline ProblemInstance problem_by_name(std::string_view name) {
  if (name == "toy3") return gen_toy3();
  if (name == "cdma3") return gen_cdma(3);
  if (name == "cdma4") return gen_cdma(4);
  if (name == "nonpsd3") return gen_nonpsd3();
  if (name.starts_with("poisson")) {
    std::size_t p = 3;
    if (name.size() > 7) {
      if (name[7] != ':') throw InputError("unknown problem '" + std::string(name) + "'");
      const std::string digits(name.substr(8));
      try {
        std::size_t used = 0;
        p = std::stoul(digits, &used);
        if (used != digits.size()) throw std::invalid_argument(digits);
      } catch (const std::exception&) {
        throw InputError("bad Poisson grid size '" + digits + "'");
      }
    }
    return gen_poisson(p);
  }
  throw InputError("unknown problem '" + std::string(name) + "'");
}

}  // namespace gabp

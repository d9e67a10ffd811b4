#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "gabp/graph.hpp"
#include "gabp/problems.hpp"
#include "test_support.hpp"

namespace gabp {
namespace {

double density(ScalarGaussian g, double x) {
  return std::sqrt(g.prec / (2.0 * std::numbers::pi)) * std::exp(-0.5 * g.prec * (x - g.mean) * (x - g.mean));
}

TEST(GaussianGraph, ToyStructureAndPriors) {
  const GaussianGraph g(gen_toy3().system);
  ASSERT_EQ(g.size(), 3u);
  EXPECT_EQ(g.edge_count(), 4u);
  EXPECT_EQ(std::vector<std::size_t>(g.neighbors(0).begin(), g.neighbors(0).end()),
            (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(std::vector<std::size_t>(g.neighbors(1).begin(), g.neighbors(1).end()),
            (std::vector<std::size_t>{0}));
  EXPECT_EQ(std::vector<std::size_t>(g.neighbors(2).begin(), g.neighbors(2).end()),
            (std::vector<std::size_t>{0}));
  // Priors are (b_i / A_ii, A_ii).
  EXPECT_EQ(g.prior_mean(0), -6.0);
  EXPECT_EQ(g.prior_mean(1), 0.0);
  EXPECT_EQ(g.prior_mean(2), 2.0);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(g.prior_prec(i), 1.0);
  EXPECT_EQ(g.coeff(g.edge(0, 1)), -2.0);
  EXPECT_EQ(g.coeff(g.edge(2, 0)), 3.0);
  EXPECT_THROW(g.edge(1, 2), std::out_of_range);
  EXPECT_TRUE(g.is_tree_or_forest());
}

TEST(GaussianGraph, EdgeBookkeepingIsConsistent) {
  for (const char* name : {"cdma4", "poisson:5", "nonpsd3"}) {
    const GaussianGraph g(problem_by_name(name).system);
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (EdgeId e = g.first_edge(i); e < g.end_edge(i); ++e) {
        EXPECT_EQ(g.source(e), i);
        EXPECT_EQ(g.reverse(g.reverse(e)), e);
        EXPECT_EQ(g.source(g.reverse(e)), g.target(e));
        EXPECT_EQ(g.coeff(g.reverse(e)), g.coeff(e));
        EXPECT_EQ(g.edge(i, g.target(e)), e);
      }
    }
  }
}

TEST(GaussianGraph, PoissonCenterNode) {
  // 1-based node 5 of the 3x3 grid is the center, coupled to 2, 4, 6, 8.
  const GaussianGraph g(gen_poisson(3).system);
  EXPECT_EQ(std::vector<std::size_t>(g.neighbors(4).begin(), g.neighbors(4).end()),
            (std::vector<std::size_t>{1, 3, 5, 7}));
  EXPECT_EQ(g.degree(0), 2u);
  EXPECT_EQ(g.degree(1), 3u);
  EXPECT_FALSE(g.is_tree_or_forest());
}

TEST(GaussianGraph, ZeroDiagonalRejected) {
  SymSystem s(Vector{1, 0}, Vector{0, 0});
  s.set(0, 1, 2.0);
  EXPECT_THROW(GaussianGraph{s}, InputError);
}

TEST(GaussianGraph, ReconstructsSystemExactly) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (auto kind : {RandomKind::tree, RandomKind::strict_dominant, RandomKind::spd}) {
      const SymSystem s = gen_random(kind, 15, seed).system;
      EXPECT_EQ(GaussianGraph(s).to_system(), s);
    }
  }
}

TEST(GaussianGraph, ForestDetection) {
  SymSystem s(Vector(5, 1.0), Vector(5, 0.0));
  s.set(0, 1, 0.1);
  s.set(3, 4, 0.1);
  const GaussianGraph g(s);
  EXPECT_EQ(g.components(), 3u);
  EXPECT_TRUE(g.is_tree_or_forest());
  s.set(0, 2, 0.1);
  s.set(1, 2, 0.1);
  EXPECT_FALSE(GaussianGraph(s).is_tree_or_forest());
}

TEST(GaussianProduct, KnownPair) {
  const ScalarGaussian p = gaussian_product({1.0, 2.0}, {4.0, 1.0});
  EXPECT_DOUBLE_EQ(p.mean, 2.0);
  EXPECT_DOUBLE_EQ(p.prec, 3.0);
}

TEST(GaussianProduct, ProportionalToPointwiseProduct) {
  // f(x) g(x) / h(x) must be the same constant for every x.
  const ScalarGaussian a{1.0, 2.0};
  const ScalarGaussian b{4.0, 1.0};
  const ScalarGaussian p = gaussian_product(a, b);
  const double c0 = density(a, 0.0) * density(b, 0.0) / density(p, 0.0);
  for (double x = -3.0; x <= 6.0; x += 0.25) {
    EXPECT_NEAR(density(a, x) * density(b, x) / density(p, x), c0, 1e-12 * c0);
  }
}

TEST(GaussianProduct, NormalizedMomentsByQuadrature) {
  const ScalarGaussian a{1.0, 2.0};
  const ScalarGaussian b{4.0, 1.0};
  const ScalarGaussian p = gaussian_product(a, b);
  // Trapezoid rule on [-10, 10].
  const int steps = 200000;
  const double lo = -10.0;
  const double h = 20.0 / steps;
  double z = 0.0, m1 = 0.0, m2 = 0.0;
  for (int k = 0; k <= steps; ++k) {
    const double x = lo + h * k;
    const double w = (k == 0 || k == steps ? 0.5 : 1.0) * density(a, x) * density(b, x);
    z += w;
    m1 += w * x;
    m2 += w * x * x;
  }
  const double mean = m1 / z;
  const double var = m2 / z - mean * mean;
  EXPECT_NEAR(mean, p.mean, 1e-6);
  EXPECT_NEAR(1.0 / var, p.prec, 1e-6);
}

TEST(GaussianProduct, CommutativeAndAssociative) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> mu(-5, 5), pr(0.1, 4);
  for (int t = 0; t < 100; ++t) {
    const ScalarGaussian a{mu(rng), pr(rng)}, b{mu(rng), pr(rng)}, c{mu(rng), pr(rng)};
    const auto ab = gaussian_product(a, b);
    const auto ba = gaussian_product(b, a);
    EXPECT_EQ(ab.mean, ba.mean);
    EXPECT_EQ(ab.prec, ba.prec);
    const auto l = gaussian_product(ab, c);
    const auto r = gaussian_product(a, gaussian_product(b, c));
    EXPECT_NEAR(l.mean, r.mean, 1e-12 * (1 + std::abs(l.mean)));
    EXPECT_NEAR(l.prec, r.prec, 1e-12 * l.prec);
  }
}

TEST(GaussianProduct, CancellingPrecisionsRejected) {
  EXPECT_THROW(gaussian_product({0.0, 2.0}, {1.0, -2.0}), DegenerateProductError);
}

}  // namespace
}  // namespace gabp

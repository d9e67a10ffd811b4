#include <gtest/gtest.h>

#include <random>

#include "gabp/classical.hpp"
#include "gabp/graph.hpp"
#include "gabp/problems.hpp"
#include "test_support.hpp"

namespace gabp {
namespace {

TEST(Problems, CdmaMatrices) {
  const auto r3 = gen_cdma(3).system.dense();
  const std::vector<Vector> e3{{7, -1, 3}, {-1, 7, -5}, {3, -5, 7}};
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(r3[i][j], e3[i][j] / 7.0);
  }
  const auto r4 = gen_cdma(4).system.dense();
  const std::vector<Vector> e4{{7, -1, 3, 3}, {-1, 7, 3, -1}, {3, 3, 7, -1}, {3, -1, -1, 7}};
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(r4[i][j], e4[i][j] / 7.0);
  }
  EXPECT_EQ(gen_cdma(4).system.rhs(), Vector(4, 1.0));
  EXPECT_THROW(gen_cdma(5), InputError);
}

TEST(Problems, NonPsdIsIndefinite) {
  const auto ev = testing::oracle_eigenvalues(gen_nonpsd3().system);
  EXPECT_LT(ev.minCoeff(), 0.0);
  EXPECT_GT(ev.maxCoeff(), 0.0);
  EXPECT_TRUE(gen_nonpsd3().expect_classical_divergence);
}

TEST(Problems, PoissonThreeByThreeMatrix) {
  const std::vector<Vector> expected{
      {4, -1, 0, -1, 0, 0, 0, 0, 0},  {-1, 4, -1, 0, -1, 0, 0, 0, 0}, {0, -1, 4, 0, 0, -1, 0, 0, 0},
      {-1, 0, 0, 4, -1, 0, -1, 0, 0}, {0, -1, 0, -1, 4, -1, 0, -1, 0}, {0, 0, -1, 0, -1, 4, 0, 0, -1},
      {0, 0, 0, -1, 0, 0, 4, -1, 0},  {0, 0, 0, 0, -1, 0, -1, 4, -1},  {0, 0, 0, 0, 0, -1, 0, -1, 4}};
  const ProblemInstance p = gen_poisson(3);
  EXPECT_EQ(p.system.dense(), expected);
  // f = -1, h = 1/4: b = -f h^2 = 1/16
  EXPECT_EQ(p.system.rhs(), Vector(9, 1.0 / 16.0));
}

TEST(Problems, PoissonSizesAndSymmetry) {
  const ProblemInstance one = gen_poisson(1);
  EXPECT_EQ(one.system.size(), 1u);
  EXPECT_EQ(one.system.rhs()[0], 0.25);
  const SymSystem s = gen_poisson(10).system;
  EXPECT_EQ(s.size(), 100u);
  EXPECT_EQ(s.offdiag().size(), 180u);  // 2 p (p - 1)
  EXPECT_DOUBLE_EQ(gen_poisson(4, 2.0).system.rhs()[0], -2.0 / 25.0);
  EXPECT_THROW(gen_poisson(0), InputError);
}

TEST(Problems, LookupByName) {
  EXPECT_EQ(problem_by_name("poisson").system.size(), 9u);
  EXPECT_EQ(problem_by_name("poisson:5").system.size(), 25u);
  EXPECT_EQ(problem_by_name("cdma4").id, "cdma4");
  EXPECT_THROW(problem_by_name("poisson:x"), InputError);
  EXPECT_THROW(problem_by_name("poissonx"), InputError);
  EXPECT_THROW(problem_by_name("nope"), InputError);
}

TEST(RandomInstances, DeterministicPerSeed) {
  for (auto kind : {RandomKind::tree, RandomKind::strict_dominant, RandomKind::spd}) {
    EXPECT_EQ(gen_random(kind, 12, 42).system, gen_random(kind, 12, 42).system);
    EXPECT_FALSE(gen_random(kind, 12, 42).system == gen_random(kind, 12, 43).system);
  }
}

TEST(RandomInstances, StructuralInvariants) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const SymSystem tree = gen_random(RandomKind::tree, 20, seed).system;
    const GaussianGraph g(tree);
    EXPECT_EQ(g.edge_count(), 38u);
    EXPECT_EQ(g.components(), 1u);
    EXPECT_EQ(dominance_class(gen_random(RandomKind::strict_dominant, 20, seed).system),
              Dominance::strict);
    EXPECT_GT(testing::oracle_eigenvalues(gen_random(RandomKind::spd, 10, seed).system).minCoeff(),
              0.99);
  }
}

TEST(Decorrelator, GabpAgreesWithDirectDecisions) {
  const SymSystem r = gen_cdma(4).system;
  std::mt19937_64 rng(17);
  std::bernoulli_distribution bit(0.5);
  std::normal_distribution<double> noise(0.0, 0.3);
  for (int t = 0; t < 100; ++t) {
    Vector sent(4), y(4, 0.0);
    for (double& v : sent) v = bit(rng) ? 1.0 : -1.0;
    const Vector clean = r.multiply(sent);
    for (std::size_t i = 0; i < 4; ++i) y[i] = clean[i] + noise(rng);
    SymSystem s = r;
    s.set_rhs(y);
    const Vector x = testing::oracle_solve(s);
    bool near_zero = false;
    for (double v : x) near_zero = near_zero || std::abs(v) < 1e-4;
    if (near_zero) continue;
    const auto direct = decorrelator_detect(r, y, [](const SymSystem& sys) { return testing::oracle_solve(sys); });
    EXPECT_EQ(decorrelator_detect(r, y, gabp_vector_solver()), direct) << t;
  }
}

TEST(Decorrelator, SignOfZeroIsPositive) {
  const SymSystem r(Vector(2, 1.0), Vector(2, 0.0));
  EXPECT_EQ(decorrelator_detect(r, {0.0, -1.0}, gabp_vector_solver()), (std::vector<int>{1, -1}));
}

TEST(Decorrelator, DivergenceThrows) {
  SolveOptions o;
  o.max_iter = 1;
  EXPECT_THROW(decorrelator_detect(gen_cdma(3).system, {1, 1, 1}, gabp_vector_solver(o)),
               SolverDivergedError);
}

}  // namespace
}  // namespace gabp

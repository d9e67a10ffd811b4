#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "gabp/diagnostics.hpp"
#include "gabp/direct.hpp"
#include "gabp/matrix_market.hpp"
#include "gabp/problems.hpp"
#include "test_support.hpp"

namespace gabp {
namespace {

constexpr const char* kToyMtx =
    "%%MatrixMarket matrix coordinate real symmetric\n"
    "% toy tree\n"
    "3 3 5\n"
    "3 1 3\n"
    "1 1 1\n"
    "2 1 -2\n"
    "2 2 1\n"
    "3 3 1\n";

TEST(MatrixMarket, ParsesToySystemIndependentOfEntryOrder) {
  const SymSystem s = parse_sym_system(kToyMtx, {-6, 0, 2});
  EXPECT_EQ(s.diagonal(), (Vector{1, 1, 1}));
  ASSERT_EQ(s.offdiag().size(), 2u);
  EXPECT_EQ(s.at(0, 1), -2.0);
  EXPECT_EQ(s.at(0, 2), 3.0);
  EXPECT_EQ(s.at(1, 2), 0.0);
  EXPECT_EQ(s, gen_toy3().system);
}

TEST(MatrixMarket, IdentityHasNoOffDiagonal) {
  const SymSystem s = parse_sym_system(
      "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n2 2 1\n");
  EXPECT_EQ(s.diagonal(), (Vector{1, 1}));
  EXPECT_TRUE(s.offdiag().empty());
}

TEST(MatrixMarket, ArrayFormat) {
  const SymSystem s = parse_sym_system(
      "%%MatrixMarket matrix array real symmetric\n2 2\n4\n-1\n5\n");
  EXPECT_EQ(s.at(0, 0), 4.0);
  EXPECT_EQ(s.at(1, 0), -1.0);
  EXPECT_EQ(s.at(1, 1), 5.0);
}

TEST(MatrixMarket, ExplicitZerosAreNotEdges) {
  const SymSystem s = parse_sym_system(
      "%%MatrixMarket matrix coordinate real symmetric\n2 2 3\n1 1 1\n2 1 0\n2 2 1\n");
  EXPECT_TRUE(s.offdiag().empty());
}

TEST(MatrixMarket, Errors) {
  EXPECT_THROW(parse_matrix_market("%%Matrix coordinate real symmetric\n1 1 1\n1 1 1\n"),
               InputError);
  EXPECT_THROW(parse_matrix_market("%%MatrixMarket matrix coordinate complex general\n1 1 0\n"),
               InputError);
  EXPECT_THROW(
      parse_matrix_market("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n1 1 2\n"),
      InputError);
  // (2,1) and (1,2) are the same entry under a symmetric header.
  EXPECT_THROW(parse_matrix_market(
                   "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n2 1 1\n1 2 1\n"),
               InputError);
  EXPECT_THROW(parse_sym_system(
                   "%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1\n1 2 3\n2 2 1\n"),
               InputError);
  EXPECT_THROW(parse_matrix_market(
                   "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n"),
               InputError);
  EXPECT_THROW(parse_matrix_market("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n"),
               InputError);
}

TEST(MatrixMarket, RoundTripIsLossless) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    SymSystem s{Vector(n), Vector(n)};
    for (std::size_t i = 0; i < n; ++i) {
      s.set_diag(i, u(rng));
      s.set_rhs(i, u(rng) / 3.0);
      for (std::size_t j = i + 1; j < n; ++j) {
        if (rng() % 3 == 0) s.set(i, j, u(rng) * 1e-7);
      }
    }
    const SymSystem back = parse_sym_system(write_matrix_market(s), parse_vector(write_vector(s.rhs())));
    EXPECT_EQ(back, s);
  }
}

TEST(MatrixMarket, VectorParsing) {
  EXPECT_EQ(parse_vector("1\n-2.5\n\n3e2\n"), (Vector{1, -2.5, 300}));
  EXPECT_THROW(parse_vector("1 2\n"), InputError);
  EXPECT_THROW(parse_vector("abc\n"), InputError);
}

TEST(Residual, ToyValues) {
  const SymSystem s = gen_toy3().system;
  EXPECT_EQ(residual_norm_per_eq(s, {1, 2, -1}), 0.0);
  // r = -b = (6, 0, -2)
  EXPECT_DOUBLE_EQ(residual_norm_per_eq(s, {0, 0, 0}), std::sqrt(36.0 + 0.0 + 4.0) / 3.0);
  EXPECT_THROW(residual_norm_per_eq(s, {1, 2}), InputError);
}

TEST(SpectralRadius, PublishedCdmaValues) {
  EXPECT_NEAR(spectral_radius_gabp_test(gen_cdma(3).system), 0.9008, 1e-3);
  EXPECT_NEAR(spectral_radius_gabp_test(gen_cdma(4).system), 0.8747, 1e-3);
}

TEST(SpectralRadius, IdentityIsZero) {
  EXPECT_EQ(spectral_radius_gabp_test(SymSystem(Vector(4, 1.0), Vector(4, 0.0))), 0.0);
}

TEST(SpectralRadius, ZeroDiagonalRejected) {
  SymSystem s(Vector{1, 0}, Vector{0, 0});
  s.set(0, 1, 1.0);
  EXPECT_THROW(spectral_radius_gabp_test(s), InputError);
}

TEST(SpectralRadius, AgreesWithEigenOracleOnBuiltIns) {
  for (const char* name : {"toy3", "cdma3", "cdma4", "nonpsd3", "poisson:3", "poisson:10"}) {
    const SymSystem s = problem_by_name(name).system;
    EXPECT_NEAR(spectral_radius_gabp_test(s), testing::oracle_gabp_spectral_radius(s), 1e-4)
        << name;
  }
}

TEST(Dominance, Classes) {
  EXPECT_EQ(dominance_class(gen_poisson(3).system), Dominance::weak);
  EXPECT_EQ(dominance_class(SymSystem(Vector(3, 1.0), Vector(3, 0.0))), Dominance::strict);
  EXPECT_EQ(dominance_class(gen_toy3().system), Dominance::none);
  EXPECT_EQ(dominance_class(gen_cdma(3).system), Dominance::none);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EXPECT_EQ(dominance_class(gen_random(RandomKind::strict_dominant, 10, seed).system),
              Dominance::strict);
  }
}

TEST(DirectSolve, KnownSolutions) {
  const Vector x = direct_solve_ge(gen_toy3().system);
  EXPECT_NEAR(x[0], 1.0, 1e-14);
  EXPECT_NEAR(x[1], 2.0, 1e-14);
  EXPECT_NEAR(x[2], -1.0, 1e-14);
  EXPECT_EQ(direct_solve_ge(SymSystem(Vector(3, 1.0), Vector{4, -5, 6})), (Vector{4, -5, 6}));
}

TEST(DirectSolve, RandomWellConditionedResidual) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    for (std::size_t n : {8u, 20u, 50u}) {
      const SymSystem s = gen_random(RandomKind::strict_dominant, n, seed).system;
      EXPECT_LE(residual_norm_per_eq(s, direct_solve_ge(s)), 1e-10);
    }
  }
}

TEST(DirectSolve, SingularRejected) {
  SymSystem s(Vector{1, 1}, Vector{1, 1});
  s.set(0, 1, 1.0);
  EXPECT_THROW(direct_solve_ge(s), SingularMatrixError);
}

TEST(DirectSolve, InverseDiagonalOfToy) {
  const Vector d = inverse_diagonal(gen_toy3().system);
  EXPECT_NEAR(d[0], -1.0 / 12.0, 1e-15);
  EXPECT_NEAR(d[1], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(d[2], 1.0 / 4.0, 1e-15);
}

TEST(ConditionNumber, SimpleCases) {
  EXPECT_DOUBLE_EQ(condition_number_normal(SymSystem(Vector(3, 1.0), Vector(3, 0.0))), 1.0);
  EXPECT_NEAR(condition_number_normal(SymSystem(Vector{2, 1}, Vector{0, 0})), 2.0, 1e-10);
  SymSystem singular(Vector{1, 1}, Vector{0, 0});
  singular.set(0, 1, 1.0);
  EXPECT_TRUE(std::isinf(condition_number_normal(singular)));
}

TEST(ConditionNumber, AgreesWithEigenOracle) {
  for (const char* name : {"poisson:3", "cdma3", "cdma4", "nonpsd3", "toy3"}) {
    const SymSystem s = problem_by_name(name).system;
    const auto ev = testing::oracle_eigenvalues(s).cwiseAbs();
    const double expected = ev.maxCoeff() / ev.minCoeff();
    EXPECT_NEAR(condition_number_normal(s), expected, 1e-8 * expected) << name;
  }
}

}  // namespace
}  // namespace gabp

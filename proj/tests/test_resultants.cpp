#include <gtest/gtest.h>

#include <random>

#include "nodallab/polyjet.hpp"
#include "nodallab/resultants.hpp"

using namespace nodallab;

namespace {

RatPoly poly(std::initializer_list<long> low_to_high) {
  RatPoly p;
  for (long c : low_to_high) p.emplace_back(c);
  return p;
}

RatPoly random_monic(int k, std::mt19937_64& rng) {
  std::uniform_int_distribution<long> d(-9, 9);
  RatPoly p;
  for (int j = 0; j < k; ++j) p.push_back(make_rational(d(rng), 1 + j));
  p.emplace_back(1);
  return p;
}

// Independent oracle: Leibniz expansion of the Sylvester determinant.
Rational leibniz_det(const std::vector<std::vector<Rational>>& m) {
  const int n = static_cast<int>(m.size());
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  Rational total = 0;
  do {
    int inversions = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) inversions += perm[i] > perm[j];
    Rational term = inversions % 2 ? -1 : 1;
    for (int i = 0; i < n; ++i) term *= m[i][perm[i]];
    total += term;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

}  // namespace

TEST(SylvesterResultant, LinearConvention) {
  EXPECT_EQ(sylvester_resultant(poly({-1, 1}), poly({-2, 1})), Rational(-1));
  const auto s = sylvester_matrix(poly({-1, 1}), poly({-2, 1}), 1, 1);
  EXPECT_EQ(s[0][0], Rational(1));
  EXPECT_EQ(s[0][1], Rational(-1));
  EXPECT_EQ(s[1][0], Rational(1));
  EXPECT_EQ(s[1][1], Rational(-2));
  for (long a = -3; a <= 3; ++a)
    for (long b = -3; b <= 3; ++b) EXPECT_EQ(sylvester_resultant(poly({-a, 1}), poly({-b, 1})), Rational(a - b));
}

TEST(SylvesterResultant, CommonRootGivesZero) {
  EXPECT_EQ(sylvester_resultant(poly({-1, 0, 1}), poly({-1, 1})), Rational(0));
}

TEST(SylvesterResultant, ProductFormula) {
  EXPECT_EQ(sylvester_resultant(poly({1, 0, 1}), poly({-1, 0, 1})), Rational(4));
}

TEST(SylvesterResultant, Errors) {
  EXPECT_THROW(sylvester_resultant(poly({3}), poly({2})), PreconditionError);
  EXPECT_THROW(sylvester_resultant(RatPoly{}, poly({1, 1})), PreconditionError);
  EXPECT_THROW(sylvester_resultant(poly({1, 1, 1}), poly({1, 1}), 1, 1), PreconditionError);
}

TEST(SylvesterResultant, MatchesLeibnizOracle) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 20; ++t) {
    const RatPoly f = random_monic(1 + t % 3, rng), g = random_monic(1 + (t / 3) % 3, rng);
    EXPECT_EQ(sylvester_resultant(f, g), leibniz_det(sylvester_matrix(f, g, degree(f), degree(g))));
  }
}

TEST(SylvesterResultant, JetCoefficientsAgreeWithFieldEvaluation) {
  // F = t^2 + x1 t - x2, G = t^2 - x2 t + x1 over Q[x1, x2]; evaluate R at points.
  const int order = 6;
  const RationalJet x1 = RationalJet::variable(2, order, 0), x2 = RationalJet::variable(2, order, 1);
  const RationalJet one = RationalJet::constant(2, order, Rational(1));
  const UPoly<RationalJet> f{-x2, x1, one}, g{x1, -x2, one};
  const RationalJet r = sylvester_resultant(f, g, 2, 2);
  for (long a = -2; a <= 2; ++a)
    for (long b = -2; b <= 2; ++b) {
      const RatPoly fe{Rational(-b), Rational(a), 1}, ge{Rational(a), Rational(-b), 1};
      EXPECT_EQ(r.evaluate({Rational(a), Rational(b)}), sylvester_resultant(fe, ge));
    }
}

TEST(SylvesterResultant, WeightedHomogeneity) {
  std::mt19937_64 rng(22);
  std::uniform_int_distribution<long> d(-5, 5);
  for (int k = 1; k <= 4; ++k)
    for (int t = 0; t < 5; ++t) {
      const RatPoly f = random_monic(k, rng), g = random_monic(k, rng);
      long num = 0;
      while (num == 0) num = d(rng);
      const Rational lambda = make_rational(num, 1 + t);
      RatPoly fs = f, gs = g;
      for (int j = 0; j < k; ++j) {
        Rational w = 1;
        for (int p = 0; p < k - j; ++p) w *= lambda;
        fs[j] *= w;
        gs[j] *= w;
      }
      Rational lk2 = 1;
      for (int p = 0; p < k * k; ++p) lk2 *= lambda;
      EXPECT_EQ(sylvester_resultant(fs, gs), lk2 * sylvester_resultant(f, g));
    }
}

TEST(SylvesterResultant, VanishesIffGcdNonconstant) {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> coin(0, 1);
  int vanishing = 0;
  for (int t = 0; t < 50; ++t) {
    RatPoly f = random_monic(1 + t % 3, rng), g = random_monic(1 + (t + 1) % 3, rng);
    if (coin(rng)) {
      const RatPoly shared = random_monic(1, rng);
      f = poly_mul(f, shared);
      g = poly_mul(g, shared);
    }
    const bool zero = is_zero(sylvester_resultant(f, g));
    vanishing += zero;
    EXPECT_EQ(zero, degree(poly_gcd(f, g)) >= 1);
  }
  EXPECT_GT(vanishing, 5);
}

TEST(CommonRootTest, Examples) {
  EXPECT_TRUE(common_root_test({poly({-1, 0, 1}), poly({0, -1, 1})}));
  EXPECT_FALSE(common_root_test({poly({-1, 1}), poly({-2, 1})}));
  EXPECT_TRUE(common_root_test({poly({-6, 1, 1}), poly({-9, 0, 1})}));
  EXPECT_EQ(poly_gcd(poly({-6, 1, 1}), poly({-9, 0, 1})), poly({3, 1}));
}

TEST(CommonRootTest, ThreePolynomials) {
  const RatPoly a = poly_mul(poly({-1, 1}), poly({2, 1}));
  const RatPoly b = poly_mul(poly({-1, 1}), poly({5, 1}));
  const RatPoly c = poly_mul(poly({-1, 1}), poly({-7, 1}));
  EXPECT_TRUE(common_root_test({a, b, c}, 8, 3));
  const RatPoly d = poly_mul(poly({4, 1}), poly({-7, 1}));
  EXPECT_FALSE(common_root_test({a, b, d}, 8, 3));
}

TEST(CommonRootTest, Errors) {
  EXPECT_THROW(common_root_test({poly({-1, 2}), poly({1, 1})}), PreconditionError);
  EXPECT_THROW(common_root_test({poly({-1, 1})}), PreconditionError);
  EXPECT_THROW(common_root_test({poly({-1, 1}), poly({0, 0, 1})}), PreconditionError);
}

TEST(RealRoots, Examples) {
  auto r = real_roots_sorted(poly({-1, 0, 1}));
  ASSERT_EQ(r.size(), 2u);
  EXPECT_NEAR(r[0].value, -1.0, 1e-12);
  EXPECT_NEAR(r[1].value, 1.0, 1e-12);
  EXPECT_TRUE(real_roots_sorted(poly({1, 0, 1})).empty());
  r = real_roots_sorted(poly_mul(poly_mul(poly({-1, 1}), poly({-1, 1})), poly({2, 1})));
  ASSERT_EQ(r.size(), 2u);
  EXPECT_NEAR(r[0].value, -2.0, 1e-12);
  EXPECT_EQ(r[0].multiplicity, 1);
  EXPECT_NEAR(r[1].value, 1.0, 1e-12);
  EXPECT_EQ(r[1].multiplicity, 2);
}

TEST(RealRoots, SquareFreeDecompositionReassembles) {
  const RatPoly p = poly_mul(poly_mul(poly({-3, 1}), poly({-3, 1})), poly_mul(poly({1, 0, 1}), poly({5, 1})));
  const auto parts = square_free_decomposition(p);
  RatPoly acc = poly({1});
  for (std::size_t i = 0; i < parts.size(); ++i)
    for (std::size_t m = 0; m <= i; ++m) acc = poly_mul(acc, parts[i]);
  EXPECT_EQ(acc, p);
}

TEST(RealRoots, IrrationalRootsRefined) {
  const auto r = real_roots_sorted(poly({-2, 0, 1}), 1e-14);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_NEAR(r[1].value, std::sqrt(2.0), 1e-13);
  EXPECT_EQ(distinct_real_root_count(poly({-2, 0, 1})), 2);
  EXPECT_EQ(distinct_real_root_count(poly({1, 0, 1})), 0);
}

TEST(RootLipschitz, BoundedAwayFromDiscriminant) {
  // t^2 + u1 t + u0 along a segment where the discriminant stays positive.
  const std::vector<Rational> start{Rational(-4), Rational(0)}, end{Rational(-1), Rational(1)};
  const auto coarse = probe_root_path(start, end, 16);
  const auto fine = probe_root_path(start, end, 64);
  for (int c : coarse.distinct_counts) EXPECT_EQ(c, 2);
  EXPECT_EQ(coarse.constant_count_pairs, 16);
  EXPECT_GT(coarse.max_lipschitz_ratio, 0.0);
  // The finite-difference constant stabilizes under refinement.
  EXPECT_LT(fine.max_lipschitz_ratio, 1.2 * coarse.max_lipschitz_ratio + 1e-9);
  EXPECT_LT(fine.max_lipschitz_ratio, 2.0);
}

TEST(RootLipschitz, CountChangeDetectedAcrossDiscriminant) {
  const std::vector<Rational> start{Rational(-1), Rational(0)}, end{Rational(1), Rational(0)};
  const auto probe = probe_root_path(start, end, 10);
  EXPECT_EQ(probe.distinct_counts.front(), 2);
  EXPECT_EQ(probe.distinct_counts.back(), 0);
}

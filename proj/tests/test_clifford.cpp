#include <gtest/gtest.h>

#include <random>

#include "nodallab/clifford.hpp"

using namespace nodallab;

namespace {

// Independent oracle: naive triple-loop product over Gaussian rationals.
GaussianMatrix naive_product(const GaussianMatrix& a, const GaussianMatrix& b) {
  GaussianMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      GaussianRational acc;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  return out;
}

std::vector<GaussianRational> random_spinor(int rank, std::mt19937_64& rng) {
  std::uniform_int_distribution<long> d(-5, 5);
  std::vector<GaussianRational> s;
  for (int i = 0; i < rank; ++i) s.emplace_back(Rational(d(rng)), make_rational(d(rng), 3));
  return s;
}

GaussianRational hermitian(const std::vector<GaussianRational>& a, const std::vector<GaussianRational>& b) {
  GaussianRational acc;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i].conj();
  return acc;
}

}  // namespace

TEST(BuildGamma, OneDimensionalIsSquareRootOfMinusOne) {
  const GammaRep rep = build_gamma(1);
  ASSERT_EQ(rep.rank, 1);
  EXPECT_EQ(rep.gammas[0](0, 0), GaussianRational::i());
  EXPECT_EQ(naive_product(rep.gammas[0], rep.gammas[0])(0, 0), GaussianRational(-1));
}

TEST(BuildGamma, TwoDimensionalBaseCase) {
  const GammaRep rep = build_gamma(2);
  const GaussianRational i = GaussianRational::i();
  ASSERT_EQ(rep.rank, 2);
  EXPECT_EQ(rep.gammas[0](0, 0), i);
  EXPECT_EQ(rep.gammas[0](1, 1), -i);
  EXPECT_EQ(rep.gammas[1](0, 1), GaussianRational(1));
  EXPECT_EQ(rep.gammas[1](1, 0), GaussianRational(-1));
  const GaussianMatrix g12 = naive_product(rep.gammas[0], rep.gammas[1]);
  EXPECT_EQ(g12(0, 1), i);
  EXPECT_EQ(g12(1, 0), i);
  EXPECT_TRUE(g12(0, 0).is_zero());
}

TEST(BuildGamma, RelationsHoldExhaustively) {
  for (int n = 1; n <= 6; ++n) {
    const GammaRep rep = build_gamma(n);
    EXPECT_EQ(rep.rank, 1 << (n / 2)) << n;
    for (int a = 0; a < n; ++a) {
      const GaussianMatrix& ga = rep.gammas[a];
      for (std::size_t r = 0; r < ga.rows(); ++r)
        for (std::size_t c = 0; c < ga.cols(); ++c) {
          EXPECT_EQ(ga(r, c), -ga(c, r).conj());
          const GaussianRational& e = ga(r, c);
          const bool unit_entry = e.is_zero() || e.norm() == 1;
          EXPECT_TRUE(unit_entry);
        }
      for (int b = 0; b < n; ++b) {
        GaussianMatrix ac = naive_product(ga, rep.gammas[b]) + naive_product(rep.gammas[b], ga);
        for (std::size_t r = 0; r < ac.rows(); ++r)
          for (std::size_t c = 0; c < ac.cols(); ++c)
            EXPECT_EQ(ac(r, c), GaussianRational(a == b && r == c ? -2 : 0));
      }
    }
    EXPECT_TRUE(relations_check(rep).ok);
  }
}

TEST(BuildGamma, RejectsZeroDimension) { EXPECT_THROW(build_gamma(0), PreconditionError); }

TEST(CliffordAction, ZeroVectorGivesZero) {
  const GammaRep rep = build_gamma(3);
  std::mt19937_64 rng(1);
  const auto s = random_spinor(rep.rank, rng);
  for (const auto& c : clifford_action(std::vector<Rational>{0, 0, 0}, s, rep)) EXPECT_TRUE(c.is_zero());
}

TEST(CliffordAction, BasisVectorIsGenerator) {
  const GammaRep rep = build_gamma(4);
  std::mt19937_64 rng(2);
  const auto s = random_spinor(rep.rank, rng);
  for (int i = 0; i < 4; ++i) {
    std::vector<Rational> e(4, Rational(0));
    e[i] = 1;
    EXPECT_EQ(clifford_action(e, s, rep), rep.gammas[i].apply(s));
  }
}

TEST(CliffordAction, TwiceIsMinusNormSquared) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<long> d(-7, 7);
  for (int n = 1; n <= 5; ++n) {
    const GammaRep rep = build_gamma(n);
    std::vector<Rational> v;
    Rational norm2 = 0;
    for (int i = 0; i < n; ++i) {
      v.push_back(make_rational(d(rng), 1 + i));
      norm2 += v.back() * v.back();
    }
    const auto s = random_spinor(rep.rank, rng);
    const auto twice = clifford_action(v, clifford_action(v, s, rep), rep);
    for (int i = 0; i < rep.rank; ++i) EXPECT_EQ(twice[i], s[i] * GaussianRational(-norm2));
  }
}

TEST(CliffordAction, DimensionMismatchThrows) {
  const GammaRep rep = build_gamma(3);
  std::vector<GaussianRational> s(rep.rank);
  EXPECT_THROW(clifford_action(std::vector<Rational>{1, 2}, s, rep), DimensionMismatch);
  EXPECT_THROW(clifford_action(std::vector<Rational>{1, 2, 3}, std::vector<GaussianRational>(5), rep),
               DimensionMismatch);
}

TEST(CliffordAction, NumericMatchesExact) {
  const GammaRep rep = build_gamma(3);
  const auto num = rep.numeric();
  Eigen::VectorXcd s(2);
  s << std::complex<double>(1, 2), std::complex<double>(-0.5, 0.25);
  std::vector<GaussianRational> se{GaussianRational(Rational(1), Rational(2)),
                                   GaussianRational(make_rational(-1, 2), make_rational(1, 4))};
  const auto exact = clifford_action(std::vector<Rational>{1, -2, 3}, se, rep);
  const auto approx = clifford_action({1.0, -2.0, 3.0}, s, num);
  for (int i = 0; i < 2; ++i) EXPECT_LT(std::abs(approx(i) - to_complex(exact[i])), 1e-15);
}

TEST(CliffordAction, PolarizationIdentity) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<long> d(-9, 9);
  for (int n = 2; n <= 5; ++n) {
    const GammaRep rep = build_gamma(n);
    std::vector<Rational> v, w;
    Rational dot = 0;
    for (int i = 0; i < n; ++i) {
      v.push_back(make_rational(d(rng), 2));
      w.push_back(make_rational(d(rng), 5));
      dot += v.back() * w.back();
    }
    const GaussianMatrix mv = rep.matrix_of(v), mw = rep.matrix_of(w);
    const GaussianMatrix sum = naive_product(mv, mw) + naive_product(mw, mv);
    EXPECT_EQ(sum, GaussianMatrix::identity(rep.rank) * GaussianRational(-2 * dot));
  }
}

TEST(CliffordAction, SkewAdjointness) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<long> d(-9, 9);
  for (int n = 1; n <= 5; ++n) {
    const GammaRep rep = build_gamma(n);
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<Rational> v;
      for (int i = 0; i < n; ++i) v.push_back(make_rational(d(rng), 3));
      const auto s1 = random_spinor(rep.rank, rng), s2 = random_spinor(rep.rank, rng);
      const GaussianRational lhs =
          hermitian(clifford_action(v, s1, rep), s2) + hermitian(s1, clifford_action(v, s2, rep));
      EXPECT_TRUE(lhs.is_zero());
    }
  }
}

TEST(OnePlusVInverse, ZeroVectorIsIdentity) {
  const GammaRep rep = build_gamma(3);
  EXPECT_EQ(one_plus_v_inverse({0, 0, 0}, rep), GaussianMatrix::identity(rep.rank));
}

TEST(OnePlusVInverse, UnitVectorHalvesOneMinusV) {
  const GammaRep rep = build_gamma(3);
  const std::vector<Rational> v{make_rational(3, 5), make_rational(4, 5), 0};
  const GaussianMatrix expected =
      (GaussianMatrix::identity(rep.rank) - rep.matrix_of(v)) * GaussianRational(make_rational(1, 2));
  EXPECT_EQ(one_plus_v_inverse(v, rep), expected);
}

TEST(OnePlusVInverse, TwoSidedInverseOnRandomVectors) {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<long> d(-20, 20);
  for (int n = 1; n <= 5; ++n) {
    const GammaRep rep = build_gamma(n);
    for (int trial = 0; trial < 4; ++trial) {
      std::vector<Rational> v;
      for (int i = 0; i < n; ++i) v.push_back(make_rational(d(rng), 7));
      const GaussianMatrix m = one_plus_v_inverse(v, rep);
      const GaussianMatrix a = GaussianMatrix::identity(rep.rank) + rep.matrix_of(v);
      EXPECT_EQ(naive_product(m, a), GaussianMatrix::identity(rep.rank));
      EXPECT_EQ(naive_product(a, m), GaussianMatrix::identity(rep.rank));
    }
  }
}

TEST(RelationsCheck, DetectsDuplicateGenerator) {
  GammaRep rep = build_gamma(2);
  EXPECT_TRUE(relations_check(rep).ok);
  rep.gammas[1] = rep.gammas[0];
  const auto report = relations_check(rep);
  EXPECT_FALSE(report.ok);
  EXPECT_DOUBLE_EQ(report.max_anticommutator_deviation, 2.0);
}

TEST(RelationsCheck, DetectsPerturbedEntry) {
  GammaRep rep = build_gamma(3);
  rep.gammas[2](0, 0) += GaussianRational(1);
  const auto report = relations_check(rep);
  EXPECT_FALSE(report.ok);
  EXPECT_GT(report.max_skew_deviation, 0.0);
}

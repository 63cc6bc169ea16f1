#include <gtest/gtest.h>

#include <random>

#include "nodallab/resultants.hpp"
#include "nodallab/weierstrass.hpp"

using namespace nodallab;

namespace {

RationalJet var(int n, int order, int i) { return RationalJet::variable(n, order, i); }
RationalJet cst(int n, int order, long c) { return RationalJet::constant(n, order, Rational(c)); }

// Random x1-regular jet of exact order k: c x1^k + random terms of degree >= k
// avoiding x1^k, with c != 0.
RationalJet random_regular(int n, int k, int order, std::mt19937_64& rng) {
  std::uniform_int_distribution<long> coef(-5, 5);
  std::uniform_int_distribution<int> deg(k, order);
  std::uniform_int_distribution<int> pick(0, n - 1);
  Exponent ek(n, 0);
  ek[0] = k;
  long lead = 0;
  while (lead == 0) lead = coef(rng);
  RationalJet f = RationalJet::monomial(n, order, ek, Rational(lead));
  for (int t = 0; t < 8; ++t) {
    Exponent e(n, 0);
    const int d = deg(rng);
    for (int p = 0; p < d; ++p) ++e[pick(rng)];
    if (e == ek) continue;
    f += RationalJet::monomial(n, order, e, make_rational(coef(rng), 1 + t % 4));
  }
  return f;
}

void expect_form_invariants(const WeierstrassForm& form, const RationalJet& source) {
  EXPECT_NE(form.v.constant_term(), Rational(0));
  ASSERT_EQ(static_cast<int>(form.u.size()), form.k);
  for (int j = 0; j < form.k; ++j) {
    EXPECT_EQ(form.u[j].nvars(), source.nvars() - 1);
    if (!form.u[j].is_zero()) {
      EXPECT_GE(*vanishing_order(form.u[j]), form.k - j);
    }
  }
  EXPECT_EQ(form.reexpand(), source);
}

}  // namespace

TEST(Prepare, AlreadyNormalForm) {
  const RationalJet x1 = var(2, 6, 0), x2 = var(2, 6, 1);
  const RationalJet f = x1 * x1 + x2 * x2;
  const auto form = prepare(f);
  EXPECT_EQ(form.k, 2);
  EXPECT_EQ(form.v, cst(2, 6, 1));
  EXPECT_TRUE(form.u[1].is_zero());
  EXPECT_EQ(form.u[0], RationalJet::monomial(1, 6, {2}, Rational(1)));
  expect_form_invariants(form, f);
}

TEST(Prepare, UnitFactorRecovered) {
  const int order = 5;
  const RationalJet x1 = var(2, order, 0), x2 = var(2, order, 1), one = cst(2, order, 1);
  const RationalJet f = (one + x2) * (x1 * x1 - x2 * x2 * x2);
  const auto form = prepare(f, order);
  EXPECT_EQ(form.k, 2);
  EXPECT_EQ(form.v, one + x2);
  EXPECT_TRUE(form.u[1].is_zero());
  EXPECT_EQ(form.u[0], RationalJet::monomial(1, order, {3}, Rational(-1)));
  expect_form_invariants(form, f);
}

TEST(Prepare, LinearCase) {
  const auto form = prepare(var(3, 4, 0));
  EXPECT_EQ(form.k, 1);
  EXPECT_EQ(form.v, cst(3, 4, 1));
  EXPECT_TRUE(form.u[0].is_zero());
}

TEST(Prepare, Errors) {
  EXPECT_THROW(prepare(cst(2, 4, 1) + var(2, 4, 0)), PreconditionError);
  EXPECT_THROW(prepare(RationalJet(2, 4)), TruncationError);
  EXPECT_THROW(prepare(var(2, 4, 1)), PreconditionError);
  EXPECT_THROW(prepare(var(2, 4, 0) * var(2, 4, 1)), PreconditionError);
}

TEST(Prepare, RoundTripOnRandomRegularJets) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 24; ++t) {
    const int n = 1 + t % 3;
    const int k = 1 + t % 4;
    const RationalJet f = random_regular(n, k, 8, rng);
    const auto form = prepare(f);
    EXPECT_EQ(form.k, k);
    expect_form_invariants(form, f);
  }
}

TEST(Prepare, UniquenessOnReexpandedForm) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 10; ++t) {
    const RationalJet f = random_regular(3, 1 + t % 3, 7, rng);
    const auto first = prepare(f);
    // Build a fresh unit times the same monic polynomial part and prepare again.
    const RationalJet g = first.v * first.polynomial_part();
    const auto second = prepare(g);
    EXPECT_EQ(second.v, first.v);
    EXPECT_EQ(second.u, first.u);
    // A different unit leaves the polynomial part unchanged.
    const RationalJet unit = cst(3, 7, 2) + var(3, 7, 1) - var(3, 7, 2) * var(3, 7, 0);
    const auto third = prepare(unit * first.polynomial_part());
    EXPECT_EQ(third.u, first.u);
    EXPECT_EQ(third.v, unit);
  }
}

TEST(PrepareSystem, LinearPairUsesCommonDirection) {
  const RationalJet x1 = var(2, 4, 0), x2 = var(2, 4, 1);
  const auto ps = prepare_system(VectorJet<Rational>({x1, x2}), 0);
  EXPECT_EQ(ps.k, 1);
  EXPECT_EQ(ps.mixing, RationalMatrix::identity(2));
  EXPECT_EQ(ps.direction.w, (std::vector<Rational>{1, 1}));
  for (std::size_t m = 0; m < 2; ++m) {
    EXPECT_EQ(ps.forms[m].k, 1);
    EXPECT_NE(ps.transformed[m].coeff({1, 0}), Rational(0));
    expect_form_invariants(ps.forms[m], ps.transformed[m]);
  }
}

TEST(PrepareSystem, SharedRegularAxis) {
  const RationalJet x1 = var(2, 5, 0), x2 = var(2, 5, 1);
  const auto ps = prepare_system(VectorJet<Rational>({x1 * x1, x1 * x1 + x2 * x2}), 0);
  EXPECT_EQ(ps.k, 2);
  EXPECT_EQ(ps.mixing, RationalMatrix::identity(2));
  EXPECT_EQ(ps.direction.w, (std::vector<Rational>{1, 0}));
  EXPECT_EQ(ps.direction.a, RationalMatrix::identity(2));
}

TEST(PrepareSystem, MixesUnequalOrders) {
  const RationalJet x1 = var(2, 5, 0), x2 = var(2, 5, 1);
  const auto ps = prepare_system(VectorJet<Rational>({x2, x1 * x1 * x1}), 7);
  EXPECT_EQ(ps.k, 1);
  EXPECT_NE(ps.mixing, RationalMatrix::identity(2));
  EXPECT_NE(determinant(ps.mixing), Rational(0));
  for (std::size_t m = 0; m < 2; ++m) {
    EXPECT_EQ(vanishing_order(ps.transformed[m]), 1);
    EXPECT_NE(ps.transformed[m].coeff({1, 0}), Rational(0));
    expect_form_invariants(ps.forms[m], ps.transformed[m]);
  }
}

TEST(PrepareSystem, AllVanishingThrows) {
  EXPECT_THROW(prepare_system(VectorJet<Rational>({RationalJet(2, 3), RationalJet(2, 3)}), 0), TruncationError);
}

// Common zeros of polynomial truncations survive mixing: at fixed rational x',
// the original and mixed systems (as polynomials in x1) share a root exactly
// when their gcds agree up to a nonconstant factor.
TEST(PrepareSystem, MixingPreservesCommonRoots) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 8; ++t) {
    const int order = 4;
    const RationalJet x1 = var(2, order, 0), x2 = var(2, order, 1);
    const RationalJet root = x1 - x2 * Rational(t % 3 + 1);
    const RationalJet s1 = root * (x1 + cst(2, order, 2));
    const RationalJet s2 = root * x1 * x1;  // order 3 vs order 1 forces mixing
    const auto ps = prepare_system(VectorJet<Rational>({s1, s2}), 100 + t);
    std::vector<RationalJet> mixed;
    for (std::size_t m = 0; m < 2; ++m) {
      RationalJet row(2, order);
      row += s1 * ps.mixing(m, 0);
      row += s2 * ps.mixing(m, 1);
      mixed.push_back(row);
    }
    for (long xv : {1L, -2L, 3L}) {
      auto in_x1 = [&](const RationalJet& f) {
        RatPoly p(order + 1, Rational(0));
        for (const auto& [key, c] : f.terms()) {
          const auto e = detail::unpack(key, 2);
          Rational term = c;
          for (int q = 0; q < e[1]; ++q) term *= xv;
          p[e[0]] += term;
        }
        return trim(p);
      };
      const int orig = degree(poly_gcd(in_x1(s1), in_x1(s2)));
      const int mix = degree(poly_gcd(in_x1(mixed[0]), in_x1(mixed[1])));
      EXPECT_EQ(orig >= 1, mix >= 1);
      EXPECT_EQ(orig, mix);
    }
  }
}

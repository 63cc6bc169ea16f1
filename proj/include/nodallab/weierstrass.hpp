#pragma once

// Jet-level preparation: f = v * (x1^k + sum_{j<k} u_j(x') x1^j) with v a
// unit and u_j vanishing to order k - j.  All conclusions hold modulo
// terms of total degree above the jet's truncation order.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "nodallab/error.hpp"
#include "nodallab/exact.hpp"
#include "nodallab/polyjet.hpp"

namespace nodallab {

struct WeierstrassForm {
  int k = 0;
  RationalJet v;               // n variables; coefficients known through degree order - k
  std::vector<RationalJet> u;  // u[j], j < k, in the n - 1 variables x' = (x2..xn)

  int nvars() const { return v.nvars(); }
  int order() const { return v.order(); }

  /// x1^k + sum u_j x1^j as a jet in n variables.
  RationalJet polynomial_part() const {
    const int n = nvars();
    RationalJet p = RationalJet::monomial(n, order(), unit_exponent(n, k), Rational(1));
    for (int j = 0; j < k; ++j) {
      RationalJet term = embed_vars(u[j], n, 1, order());
      p += term * RationalJet::monomial(n, order(), unit_exponent(n, j), Rational(1));
    }
    return p;
  }

  RationalJet reexpand() const { return v * polynomial_part(); }

  static Exponent unit_exponent(int n, int power) {
    Exponent e(n, 0);
    e[0] = power;
    return e;
  }
};

namespace detail {

// Divides the homogeneous E by the x1-monic homogeneous p_k (x1^k + lower in x1):
// E = q * p_k + r with deg_x1(r) < k.
inline std::pair<RationalJet, RationalJet> divide_by_monic_x1(RationalJet e, const RationalJet& pk, int k) {
  RationalJet q(e.nvars(), e.order());
  const MonomialKey x1k = pack(WeierstrassForm::unit_exponent(e.nvars(), k));
  while (true) {
    // Largest key = highest x1 exponent (x1 is the most significant byte).
    if (e.is_zero()) break;
    const auto& [key, c] = *e.terms().rbegin();
    if (key_exponent(key, 0) < k) break;
    const MonomialKey shift = key - x1k;
    const Rational coef = c;
    q.add_term(shift, coef);
    for (const auto& [pkey, pc] : pk.terms()) e.add_term(pkey + shift, -coef * pc);
  }
  return {q, e};
}

}  // namespace detail

/// Formal Weierstrass division, degree by degree.  Requires f(0) = 0, a
/// finite vanishing order k within the truncation, and a nonzero x1^k
/// coefficient.
inline WeierstrassForm prepare(const RationalJet& f) {
  const int n = f.nvars();
  const int order = f.order();
  if (n < 1) throw PreconditionError("prepare: jet has no variables");
  if (!is_zero(f.constant_term())) throw PreconditionError("prepare: f(0) != 0");
  const auto vo = vanishing_order(f);
  if (!vo) throw TruncationError("prepare: vanishing order exceeds truncation");
  const int k = *vo;
  const Rational lead = f.coeff(WeierstrassForm::unit_exponent(n, k));
  if (is_zero(lead)) throw PreconditionError("prepare: f is not x1-regular");

  std::vector<RationalJet> v_parts(order - k + 1, RationalJet(n, order));  // v_a, degree a
  std::vector<RationalJet> p_parts(order + 1, RationalJet(n, order));      // P_b, degree b
  v_parts[0] = RationalJet::constant(n, order, lead);
  p_parts[k] = f.homogeneous_part(k) * (1 / lead);

  for (int d = k + 1; d <= order; ++d) {
    RationalJet e = f.homogeneous_part(d);
    for (int b = k + 1; b < d; ++b) e -= v_parts[d - b] * p_parts[b];
    auto [q, r] = detail::divide_by_monic_x1(std::move(e), p_parts[k], k);
    v_parts[d - k] = std::move(q);
    p_parts[d] = r * (1 / lead);
  }

  WeierstrassForm form;
  form.k = k;
  form.v = RationalJet(n, order);
  for (const auto& part : v_parts) form.v += part;
  form.u.assign(k, RationalJet(n - 1, order));
  const detail::MonomialKey x1k = detail::pack(WeierstrassForm::unit_exponent(n, k));
  for (int b = k; b <= order; ++b)
    for (const auto& [key, c] : p_parts[b].terms()) {
      if (key == x1k) continue;
      const int j = detail::key_exponent(key, 0);
      form.u[j].add_term(key << 8, c);
    }
  return form;
}

/// Overload that first re-truncates f at `order`.
inline WeierstrassForm prepare(const RationalJet& f, int order) { return prepare(f.with_order(order)); }

struct PreparedSystem {
  int k = 0;
  RationalMatrix mixing;             // T, r x r, invertible
  RegularDirection direction;        // common x1 direction: transformed jets are (T s) o A^{-1}
  std::vector<RationalJet> transformed;
  std::vector<WeierstrassForm> forms;
};

namespace detail {

inline std::vector<RationalJet> mix(const std::vector<RationalJet>& s, const RationalMatrix& t) {
  std::vector<RationalJet> out;
  for (std::size_t m = 0; m < t.rows(); ++m) {
    RationalJet row(s.front().nvars(), s.front().order());
    for (std::size_t c = 0; c < t.cols(); ++c)
      if (!is_zero(t(m, c))) row += s[c] * t(m, c);
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace detail

/// Prepares every component of s along one common x1 direction.  When the
/// components do not all vanish to the same order k, they are first mixed by
/// a near-identity T = I + M / 1000 (M a seeded integer matrix) until every
/// mixed component has order exactly k.
inline PreparedSystem prepare_system(const VectorJet<Rational>& s, std::uint64_t seed = 0) {
  if (s.size() == 0) throw PreconditionError("prepare_system: empty system");
  const auto& comps = s.components();
  const int n = s.nvars();
  const std::size_t r = s.size();

  std::optional<int> k;
  for (const auto& c : comps) {
    const auto vo = vanishing_order(c);
    if (vo && (!k || *vo < *k)) k = vo;
  }
  if (!k) throw TruncationError("prepare_system: all components vanish beyond truncation");
  if (*k == 0) throw PreconditionError("prepare_system: system does not vanish at 0");

  auto all_exact = [&](const std::vector<RationalJet>& js) {
    for (const auto& j : js) {
      const auto vo = vanishing_order(j);
      if (!vo || *vo != *k) return false;
    }
    return true;
  };

  PreparedSystem out;
  out.k = *k;
  out.mixing = RationalMatrix::identity(r);
  std::vector<RationalJet> mixed = comps;
  if (!all_exact(mixed)) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<long> entry(-3, 3);
    const Rational eps(1, 1000);
    bool ok = false;
    for (int attempt = 0; attempt < 64 && !ok; ++attempt) {
      RationalMatrix t = RationalMatrix::identity(r);
      for (std::size_t a = 0; a < r; ++a)
        for (std::size_t b = 0; b < r; ++b) t(a, b) += eps * Rational(entry(rng));
      if (is_zero(determinant(t))) continue;
      auto candidate = detail::mix(comps, t);
      if (!all_exact(candidate)) continue;
      out.mixing = t;
      mixed = std::move(candidate);
      ok = true;
    }
    if (!ok) throw PreconditionError("prepare_system: no admissible mixing matrix found");
  }

  // A direction where every leading form is nonzero: regular for their product.
  const int product_order = static_cast<int>(r) * *k;
  RationalJet product = RationalJet::constant(n, product_order, Rational(1));
  for (const auto& m : mixed) product = product * m.homogeneous_part(*k).with_order(product_order);
  out.direction = regular_direction(product);

  for (const auto& m : mixed) {
    out.transformed.push_back(compose_linear(m, out.direction.a_inv));
    out.forms.push_back(prepare(out.transformed.back()));
  }
  return out;
}

}  // namespace nodallab

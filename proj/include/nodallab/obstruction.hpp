#pragma once

// Leading-term solutions w(x) = sum_j y_j(x') x1^j of the constant
// coefficient Dirac equation sum_i gamma_i dw/dx_i = 0, and the search for
// linear combinations of their (realified) components whose resultant in x1
// does not vanish identically.

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "nodallab/clifford.hpp"
#include "nodallab/error.hpp"
#include "nodallab/exact.hpp"
#include "nodallab/polyjet.hpp"
#include "nodallab/resultants.hpp"
#include "nodallab/weierstrass.hpp"

namespace nodallab {

/// Vector-valued polynomial with values in the spinor space: one jet per
/// component, all sharing nvars and order.
using SpinorPoly = std::vector<GaussianJet>;

namespace detail {

inline SpinorPoly apply_matrix(const GaussianMatrix& m, const SpinorPoly& y) {
  if (m.cols() != y.size()) throw DimensionMismatch("apply_matrix: rank mismatch");
  SpinorPoly out(m.rows(), GaussianJet(y.front().nvars(), y.front().order()));
  for (std::size_t a = 0; a < m.rows(); ++a)
    for (std::size_t b = 0; b < m.cols(); ++b)
      if (!is_zero(m(a, b))) out[a] += y[b] * m(a, b);
  return out;
}

inline void add_to(SpinorPoly& acc, const SpinorPoly& y) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += y[i];
}

inline SpinorPoly scaled(SpinorPoly y, const Rational& s) {
  for (auto& c : y) c *= GaussianRational(s);
  return y;
}

inline bool all_zero(const SpinorPoly& y) {
  for (const auto& c : y)
    if (!c.is_zero()) return false;
  return true;
}

}  // namespace detail

/// D1 y = sum_{j=2}^n gamma_1 gamma_j dy/dx_j for y a function of x' = (x2..xn).
inline SpinorPoly d1_apply(const SpinorPoly& y, const GammaRep& rep) {
  if (static_cast<int>(y.size()) != rep.rank) throw DimensionMismatch("d1_apply: spinor rank mismatch");
  if (y.front().nvars() != rep.n - 1) throw DimensionMismatch("d1_apply: expected n - 1 variables");
  SpinorPoly out(y.size(), GaussianJet(y.front().nvars(), y.front().order()));
  for (int j = 1; j < rep.n; ++j) {
    SpinorPoly dy;
    for (const auto& c : y) dy.push_back(c.derivative(j - 1));
    detail::add_to(out, detail::apply_matrix(rep.gammas[0] * rep.gammas[j], dy));
  }
  return out;
}

/// sum_i gamma_i dw/dx_i.
inline SpinorPoly hat_dirac_residual(const SpinorPoly& w, const GammaRep& rep) {
  if (static_cast<int>(w.size()) != rep.rank) throw DimensionMismatch("hat_dirac_residual: spinor rank mismatch");
  if (w.front().nvars() != rep.n) throw DimensionMismatch("hat_dirac_residual: expected n variables");
  SpinorPoly out(w.size(), GaussianJet(w.front().nvars(), w.front().order()));
  for (int i = 0; i < rep.n; ++i) {
    SpinorPoly dw;
    for (const auto& c : w) dw.push_back(c.derivative(i));
    detail::add_to(out, detail::apply_matrix(rep.gammas[i], dw));
  }
  return out;
}

struct LeadingSolution {
  int n = 0;
  int k = 0;
  GammaRep rep;
  std::vector<SpinorPoly> y;  // y[j] homogeneous of degree k - j in x'
  SpinorPoly w;               // sum_j y_j(x') x1^j, n variables
};

/// y_j = D1^j y0 / j!, assembled into w.  Throws std::logic_error if any of
/// the defining identities fails (they are theorems of the construction).
inline LeadingSolution build_leading_solution(const SpinorPoly& y0, const GammaRep& rep) {
  if (static_cast<int>(y0.size()) != rep.rank) throw DimensionMismatch("build_leading_solution: rank mismatch");
  if (rep.n < 2) throw PreconditionError("build_leading_solution: need n >= 2");
  if (y0.front().nvars() != rep.n - 1) throw DimensionMismatch("build_leading_solution: expected n - 1 variables");

  int k = 0;
  for (const auto& c : y0) k = std::max(k, c.degree());
  for (const auto& c : y0)
    if (!c.is_zero() && (vanishing_order(c).value_or(k) != k || c.degree() != k))
      throw PreconditionError("build_leading_solution: y0 is not homogeneous");

  LeadingSolution ls;
  ls.n = rep.n;
  ls.k = k;
  ls.rep = rep;
  SpinorPoly current;
  for (const auto& c : y0) current.push_back(c.with_order(k));
  ls.y.push_back(current);
  for (int j = 0; j < k; ++j) {
    current = detail::scaled(d1_apply(current, rep), Rational(1, j + 1));
    ls.y.push_back(current);
  }

  ls.w.assign(rep.rank, GaussianJet(rep.n, k));
  for (int j = 0; j <= k; ++j) {
    Exponent e(rep.n, 0);
    e[0] = j;
    const GaussianJet x1j = GaussianJet::monomial(rep.n, k, e, GaussianRational(1));
    for (int m = 0; m < rep.rank; ++m) ls.w[m] += embed_vars(ls.y[j][m], rep.n, 1, k) * x1j;
  }

  // Recursion D1 y_j = (j+1) y_{j+1}, D1 y_k = 0, closed form D1^j y0 / j!, and D^ w = 0.
  for (int j = 0; j <= k; ++j) {
    const SpinorPoly lhs = d1_apply(ls.y[j], rep);
    const SpinorPoly rhs = j < k ? detail::scaled(ls.y[j + 1], Rational(j + 1))
                                 : SpinorPoly(rep.rank, GaussianJet(rep.n - 1, k));
    if (lhs != rhs) throw std::logic_error("build_leading_solution: recursion identity failed");
  }
  SpinorPoly power = ls.y[0];
  Rational factorial = 1;
  for (int j = 1; j <= k; ++j) {
    power = d1_apply(power, rep);
    factorial *= j;
    if (detail::scaled(power, 1 / factorial) != ls.y[j])
      throw std::logic_error("build_leading_solution: closed form identity failed");
  }
  if (!detail::all_zero(hat_dirac_residual(ls.w, rep)))
    throw std::logic_error("build_leading_solution: hat Dirac residual is nonzero");
  return ls;
}

/// Splits complex components into real and imaginary parts:
/// (Re w1, Im w1, Re w2, Im w2, ...).
inline std::vector<RationalJet> realify(const SpinorPoly& w) {
  std::vector<RationalJet> out;
  for (const auto& c : w) {
    RationalJet re(c.nvars(), c.order()), im(c.nvars(), c.order());
    for (const auto& [key, z] : c.terms()) {
      re.add_term(key, z.real());
      im.add_term(key, z.imag());
    }
    out.push_back(std::move(re));
    out.push_back(std::move(im));
  }
  return out;
}

/// Polynomial in t = x1 with coefficients in x' (n - 1 variables, truncated at `order`).
inline UPoly<RationalJet> as_polynomial_in_x1(const RationalJet& f, int degree, int order) {
  auto coefs = coefficients_in_first(f);
  UPoly<RationalJet> p;
  for (int j = 0; j <= degree; ++j)
    p.push_back(j < static_cast<int>(coefs.size()) ? coefs[j].with_order(order) : RationalJet(f.nvars() - 1, order));
  for (int j = degree + 1; j < static_cast<int>(coefs.size()); ++j)
    if (!coefs[j].is_zero()) throw PreconditionError("as_polynomial_in_x1: x1-degree exceeds declared degree");
  return p;
}

inline UPoly<RationalJet> linear_combination(const std::vector<UPoly<RationalJet>>& polys,
                                             const std::vector<Rational>& weights) {
  if (polys.size() != weights.size()) throw DimensionMismatch("linear_combination: weight count mismatch");
  UPoly<RationalJet> out = polys.front();
  for (auto& c : out) c *= Rational(0);
  for (std::size_t m = 0; m < polys.size(); ++m) {
    if (is_zero(weights[m])) continue;
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += polys[m][j] * weights[m];
  }
  return out;
}

struct ResultantWitness {
  std::vector<Rational> alpha;
  std::vector<Rational> beta;
  RationalJet resultant;  // in x' = (x2..xn), homogeneous of degree k^2
  int trial = 0;
};

/// Resultant in x1 of F = sum alpha_m w_m and G = sum beta_m w_m over the
/// realified components of ls.w, optionally after dividing each by its
/// (constant) x1^k coefficient.
inline RationalJet combination_resultant(const LeadingSolution& ls, const std::vector<Rational>& alpha,
                                         const std::vector<Rational>& beta, bool monic) {
  const int k = ls.k;
  const int order = std::max(1, k * k);
  std::vector<UPoly<RationalJet>> polys;
  for (const auto& c : realify(ls.w)) polys.push_back(as_polynomial_in_x1(c, k, order));
  UPoly<RationalJet> f = linear_combination(polys, alpha);
  UPoly<RationalJet> g = linear_combination(polys, beta);
  if (monic) {
    const Rational cf = f[k].constant_term(), cg = g[k].constant_term();
    if (is_zero(cf) || is_zero(cg)) throw PreconditionError("combination_resultant: zero leading coefficient");
    for (auto& c : f) c *= 1 / cf;
    for (auto& c : g) c *= 1 / cg;
  }
  return sylvester_resultant(f, g, k, k);
}

/// Seeded search for alpha, beta (integers in [-3, 3]) such that the
/// resultant of the monic-normalized combinations is not the zero polynomial.
/// Returns nullopt after `trials` unsuccessful attempts; that outcome says
/// nothing about whether such a pair exists.
inline std::optional<ResultantWitness> find_nonvanishing_resultant(const LeadingSolution& ls, int trials = 100,
                                                                    std::uint64_t seed = 0) {
  if (ls.y.empty() || detail::all_zero(ls.y.back()))
    throw PreconditionError("find_nonvanishing_resultant: y_k = 0");
  const int k = ls.k;
  const int order = std::max(1, k * k);
  std::vector<UPoly<RationalJet>> polys;
  for (const auto& c : realify(ls.w)) polys.push_back(as_polynomial_in_x1(c, k, order));
  const std::size_t count = polys.size();

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long> coef(-3, 3);
  for (int t = 0; t < trials; ++t) {
    std::vector<Rational> alpha(count), beta(count);
    for (auto& a : alpha) a = coef(rng);
    for (auto& b : beta) b = coef(rng);
    UPoly<RationalJet> f = linear_combination(polys, alpha);
    UPoly<RationalJet> g = linear_combination(polys, beta);
    const Rational cf = f[k].constant_term(), cg = g[k].constant_term();
    if (is_zero(cf) || is_zero(cg)) continue;
    for (auto& c : f) c *= 1 / cf;
    for (auto& c : g) c *= 1 / cg;
    RationalJet r = sylvester_resultant(f, g, k, k);
    if (!r.is_zero()) return ResultantWitness{alpha, beta, r, t};
  }
  return std::nullopt;
}

struct LowestOrderComparison {
  int k = 0;
  int order = 0;
  std::vector<Rational> alpha;
  std::vector<Rational> beta;
  RationalJet full_resultant;      // R_{F,G}(x') from the prepared jets, truncated
  RationalJet lowest_part;         // its lowest-degree homogeneous part
  RationalJet leading_resultant;   // R_{Fhat,Ghat} from the leading terms
  bool agree = false;
};

/// Perturbs the realified leading solution by seeded higher-order terms
/// (degrees k+1..order), prepares the system, and compares the lowest-order
/// part of R_{F,G} for F = sum alpha_m v_m(0) P_m with R_{Fhat,Ghat} for
/// Fhat = sum alpha_m w_m (both in the prepared coordinates).  Needs
/// order >= k^2 + k - 1 so that the degree-k^2 part is exact.
inline LowestOrderComparison compare_lowest_order_resultant(const LeadingSolution& ls, int order, std::uint64_t seed,
                                                            int trials = 100) {
  const int k = ls.k;
  const int n = ls.n;
  if (k < 1) throw PreconditionError("compare_lowest_order_resultant: need k >= 1");
  if (order < k * k + k - 1) throw PreconditionError("compare_lowest_order_resultant: order too small");

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long> coef(-4, 4);
  std::uniform_int_distribution<int> degree_pick(k + 1, order);
  std::uniform_int_distribution<int> var_pick(0, n - 1);
  std::vector<RationalJet> comps;
  for (const auto& c : realify(ls.w)) {
    RationalJet s = c.with_order(order);
    for (int t = 0; t < 4; ++t) {
      Exponent e(n, 0);
      const int d = degree_pick(rng);
      for (int p = 0; p < d; ++p) ++e[var_pick(rng)];
      s += RationalJet::monomial(n, order, e, make_rational(coef(rng), 1 + t));
    }
    comps.push_back(std::move(s));
  }
  const PreparedSystem ps = prepare_system(VectorJet<Rational>(comps), seed);

  std::vector<UPoly<RationalJet>> full, leading;
  std::vector<Rational> v0;
  for (std::size_t m = 0; m < ps.forms.size(); ++m) {
    const auto& form = ps.forms[m];
    v0.push_back(form.v.constant_term());
    UPoly<RationalJet> p;
    for (int j = 0; j < k; ++j) p.push_back(form.u[j]);
    p.push_back(RationalJet::constant(n - 1, order, Rational(1)));
    full.push_back(std::move(p));
    leading.push_back(as_polynomial_in_x1(ps.transformed[m].homogeneous_part(k), k, order));
  }

  LowestOrderComparison out;
  out.k = k;
  out.order = order;
  for (int t = 0; t < trials; ++t) {
    std::vector<Rational> alpha(full.size()), beta(full.size());
    for (auto& a : alpha) a = coef(rng);
    for (auto& b : beta) b = coef(rng);
    UPoly<RationalJet> fhat = linear_combination(leading, alpha);
    UPoly<RationalJet> ghat = linear_combination(leading, beta);
    if (is_zero(fhat[k].constant_term()) || is_zero(ghat[k].constant_term())) continue;
    RationalJet rhat = sylvester_resultant(fhat, ghat, k, k);
    if (rhat.is_zero()) continue;

    std::vector<Rational> av(alpha.size()), bv(beta.size());
    for (std::size_t m = 0; m < alpha.size(); ++m) {
      av[m] = alpha[m] * v0[m];
      bv[m] = beta[m] * v0[m];
    }
    out.alpha = alpha;
    out.beta = beta;
    out.full_resultant =
        sylvester_resultant(linear_combination(full, av), linear_combination(full, bv), k, k);
    out.leading_resultant = rhat;
    const auto lowest = vanishing_order(out.full_resultant);
    out.lowest_part = lowest ? out.full_resultant.homogeneous_part(*lowest) : out.full_resultant;
    out.agree = lowest && *lowest == k * k && out.lowest_part == rhat;
    return out;
  }
  throw PreconditionError("compare_lowest_order_resultant: no pair with nonvanishing leading resultant found");
}

}  // namespace nodallab

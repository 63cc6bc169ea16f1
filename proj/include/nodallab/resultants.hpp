#pragma once

// Sylvester resultants over exact rings, common-root tests for systems of
// monic polynomials, and real-root isolation over Q.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <type_traits>
#include <vector>

#include "nodallab/error.hpp"
#include "nodallab/exact.hpp"
#include "nodallab/polyjet.hpp"

namespace nodallab {

/// Univariate polynomial, ascending coefficients: p[j] is the coefficient of t^j.
template <class R>
using UPoly = std::vector<R>;

using RatPoly = UPoly<Rational>;

namespace detail {

template <class R>
int effective_degree(const UPoly<R>& p) {
  for (int j = static_cast<int>(p.size()) - 1; j >= 0; --j)
    if (!is_zero(p[j])) return j;
  return -1;
}

template <class R>
constexpr bool is_field_v = std::is_same_v<R, Rational> || std::is_same_v<R, GaussianRational>;

// Division-free determinant by dynamic programming over column subsets:
// dp[mask] sums the signed products that use the first popcount(mask) rows
// and exactly the columns in mask.  Works over any commutative ring.
template <class R>
R subset_determinant(const std::vector<std::vector<R>>& m, const R& zero) {
  const int n = static_cast<int>(m.size());
  if (n == 0) return one_like(zero);
  if (n > 20) throw PreconditionError("subset_determinant: matrix too large");
  std::vector<R> dp(std::size_t{1} << n, zero);
  std::vector<bool> live(dp.size(), false);
  dp[0] = one_like(zero);
  live[0] = true;
  for (std::uint32_t mask = 0; mask < dp.size(); ++mask) {
    if (!live[mask]) continue;
    const int row = __builtin_popcount(mask);
    if (row == n) continue;
    for (int c = 0; c < n; ++c) {
      if (mask & (1u << c)) continue;
      if (is_zero(m[row][c])) continue;
      const int above = __builtin_popcount(mask >> (c + 1));
      R term = dp[mask] * m[row][c];
      const std::uint32_t next = mask | (1u << c);
      if (above % 2) dp[next] -= term;
      else dp[next] += term;
      live[next] = true;
    }
    dp[mask] = zero;  // no longer needed
  }
  return dp.back();
}

}  // namespace detail

/// Sylvester matrix for declared degrees (deg_f, deg_g): the first deg_g rows
/// hold the shifted coefficients of f (leading coefficient first), the last
/// deg_f rows those of g.
template <class R>
std::vector<std::vector<R>> sylvester_matrix(const UPoly<R>& f, const UPoly<R>& g, int deg_f, int deg_g) {
  const R zero = zero_like(f.empty() ? g.front() : f.front());
  const int m = deg_f + deg_g;
  std::vector<std::vector<R>> s(m, std::vector<R>(m, zero));
  auto coef = [&](const UPoly<R>& p, int j) { return j < static_cast<int>(p.size()) ? p[j] : zero; };
  for (int r = 0; r < deg_g; ++r)
    for (int j = 0; j <= deg_f; ++j) s[r][r + j] = coef(f, deg_f - j);
  for (int r = 0; r < deg_f; ++r)
    for (int j = 0; j <= deg_g; ++j) s[deg_g + r][r + j] = coef(g, deg_g - j);
  return s;
}

/// Determinant of the Sylvester matrix.  Degrees default to the actual
/// degrees; declared degrees may exceed them (leading coefficients are then
/// zero ring elements).  With F = t - a and G = t - b the value is a - b.
template <class R>
R sylvester_resultant(const UPoly<R>& f, const UPoly<R>& g, int deg_f = -1, int deg_g = -1) {
  if (f.empty() || g.empty()) throw PreconditionError("sylvester_resultant: empty polynomial");
  if (deg_f < 0) deg_f = std::max(0, detail::effective_degree(f));
  if (deg_g < 0) deg_g = std::max(0, detail::effective_degree(g));
  if (detail::effective_degree(f) > deg_f || detail::effective_degree(g) > deg_g)
    throw PreconditionError("sylvester_resultant: coefficient above declared degree");
  if (deg_f == 0 && deg_g == 0) throw PreconditionError("sylvester_resultant: both polynomials have degree 0");
  auto s = sylvester_matrix(f, g, deg_f, deg_g);
  if constexpr (detail::is_field_v<R>) {
    ExactMatrix<R> m(s.size(), s.size());
    for (std::size_t r = 0; r < s.size(); ++r)
      for (std::size_t c = 0; c < s.size(); ++c) m(r, c) = s[r][c];
    return determinant(m);
  } else {
    return detail::subset_determinant(s, zero_like(f.front()));
  }
}

// ---------------------------------------------------------------------------
// Polynomial arithmetic over Q.

inline RatPoly trim(RatPoly p) {
  while (!p.empty() && sgn(p.back()) == 0) p.pop_back();
  return p;
}

inline int degree(const RatPoly& p) { return detail::effective_degree(p); }

inline RatPoly poly_add(const RatPoly& a, const RatPoly& b) {
  RatPoly out(std::max(a.size(), b.size()), Rational(0));
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return trim(out);
}

inline RatPoly poly_scale(RatPoly a, const Rational& s) {
  for (auto& x : a) x *= s;
  return trim(a);
}

inline RatPoly poly_mul(const RatPoly& a, const RatPoly& b) {
  if (a.empty() || b.empty()) return {};
  RatPoly out(a.size() + b.size() - 1, Rational(0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return trim(out);
}

struct PolyDivision {
  RatPoly quotient;
  RatPoly remainder;
};

inline PolyDivision poly_divmod(const RatPoly& a, const RatPoly& b) {
  const RatPoly d = trim(b);
  if (d.empty()) throw PreconditionError("poly_divmod: division by zero polynomial");
  RatPoly r = trim(a);
  const int db = static_cast<int>(d.size()) - 1;
  RatPoly q(std::max(0, static_cast<int>(r.size()) - db), Rational(0));
  while (static_cast<int>(r.size()) - 1 >= db && !r.empty()) {
    const int shift = static_cast<int>(r.size()) - 1 - db;
    const Rational f = r.back() / d.back();
    q[shift] = f;
    for (int j = 0; j <= db; ++j) r[shift + j] -= f * d[j];
    r = trim(r);
  }
  return {trim(q), r};
}

inline RatPoly make_monic(RatPoly p) {
  p = trim(p);
  if (p.empty()) return p;
  const Rational lc = p.back();
  for (auto& x : p) x /= lc;
  return p;
}

/// Monic gcd by the Euclidean algorithm; gcd(0, 0) = 0.
inline RatPoly poly_gcd(RatPoly a, RatPoly b) {
  a = trim(a);
  b = trim(b);
  while (!b.empty()) {
    RatPoly r = poly_divmod(a, b).remainder;
    a = std::move(b);
    b = std::move(r);
  }
  return make_monic(a);
}

inline RatPoly poly_derivative(const RatPoly& p) {
  RatPoly d;
  for (std::size_t j = 1; j < p.size(); ++j) d.push_back(p[j] * Rational(static_cast<long>(j)));
  return trim(d);
}

inline Rational poly_eval(const RatPoly& p, const Rational& t) {
  Rational v = 0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) v = v * t + *it;
  return v;
}

inline double poly_eval(const RatPoly& p, double t) {
  double v = 0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) v = v * t + it->get_d();
  return v;
}

/// Yun's square-free decomposition: p = lc * prod_i factors[i]^(i+1), each
/// factor monic and square-free (constant factors are returned as {1}).
inline std::vector<RatPoly> square_free_decomposition(const RatPoly& p) {
  RatPoly f = make_monic(p);
  if (degree(f) < 1) return {};
  std::vector<RatPoly> out;
  RatPoly a = poly_gcd(f, poly_derivative(f));
  RatPoly b = poly_divmod(f, a).quotient;
  RatPoly c = poly_divmod(poly_derivative(f), a).quotient;
  RatPoly d = poly_add(c, poly_scale(poly_derivative(b), Rational(-1)));
  while (degree(b) >= 1) {
    RatPoly g = poly_gcd(b, d);
    out.push_back(g);
    b = poly_divmod(b, g).quotient;
    c = poly_divmod(d, g).quotient;
    d = poly_add(c, poly_scale(poly_derivative(b), Rational(-1)));
  }
  while (!out.empty() && degree(out.back()) < 1) out.pop_back();
  return out;
}

/// Decides whether monic degree-k polynomials P_1..P_r share a root over the
/// algebraic closure.  Random pairs of linear combinations with nonzero
/// leading coefficients are tested; one nonzero resultant proves there is no
/// common root.  If every trial vanishes, the exact gcd decides.
inline bool common_root_test(const std::vector<RatPoly>& polys, int trials = 8, std::uint64_t seed = 0) {
  if (polys.size() < 2) throw PreconditionError("common_root_test: need at least two polynomials");
  const int k = degree(polys.front());
  if (k < 1) throw PreconditionError("common_root_test: degree must be >= 1");
  for (const auto& p : polys)
    if (degree(p) != k || p[k] != 1) throw PreconditionError("common_root_test: input must be monic of common degree");

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long> coef(-5, 5);
  auto combine = [&](const std::vector<long>& w) {
    RatPoly out(k + 1, Rational(0));
    for (std::size_t m = 0; m < polys.size(); ++m)
      for (int j = 0; j <= k; ++j) out[j] += Rational(w[m]) * polys[m][j];
    return out;
  };
  for (int t = 0; t < trials; ++t) {
    std::vector<long> alpha(polys.size()), beta(polys.size());
    long sa = 0, sb = 0;
    while (sa == 0 || sb == 0) {
      sa = sb = 0;
      for (auto& x : alpha) sa += (x = coef(rng));
      for (auto& x : beta) sb += (x = coef(rng));
    }
    if (!is_zero(sylvester_resultant(combine(alpha), combine(beta), k, k))) return false;
  }
  RatPoly g = polys.front();
  for (std::size_t m = 1; m < polys.size(); ++m) g = poly_gcd(g, polys[m]);
  return degree(g) >= 1;
}

// ---------------------------------------------------------------------------
// Real roots.

struct RealRoot {
  double value = 0.0;
  int multiplicity = 1;
  Rational lo;  // isolating interval [lo, hi]
  Rational hi;
};

namespace detail {

inline std::vector<RatPoly> sturm_sequence(const RatPoly& p) {
  std::vector<RatPoly> seq{trim(p), poly_derivative(p)};
  while (degree(seq.back()) >= 1) {
    RatPoly r = poly_divmod(seq[seq.size() - 2], seq.back()).remainder;
    if (r.empty()) break;
    seq.push_back(poly_scale(r, Rational(-1)));
  }
  return seq;
}

inline int sign_changes(const std::vector<RatPoly>& seq, const Rational& t) {
  int changes = 0, last = 0;
  for (const auto& p : seq) {
    const int s = sgn(poly_eval(p, t));
    if (s == 0) continue;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

// Number of distinct roots in (a, b] of the square-free p.
inline int roots_in(const std::vector<RatPoly>& seq, const Rational& a, const Rational& b) {
  return sign_changes(seq, a) - sign_changes(seq, b);
}

inline Rational cauchy_bound(const RatPoly& p) {
  Rational m = 0;
  for (std::size_t j = 0; j + 1 < p.size(); ++j) m = std::max(m, Rational(abs(p[j] / p.back())));
  return m + 1;
}

}  // namespace detail

/// Number of distinct real roots (Sturm count of the square-free part).
inline int distinct_real_root_count(const RatPoly& p) {
  const RatPoly f = trim(p);
  if (degree(f) < 1) return 0;
  const RatPoly sqf = poly_divmod(f, poly_gcd(f, poly_derivative(f))).quotient;
  const auto seq = detail::sturm_sequence(sqf);
  const Rational bound = detail::cauchy_bound(sqf);
  return detail::roots_in(seq, -bound, bound);
}

/// All real roots ascending, with multiplicities, each isolated by a Sturm
/// sequence and refined by exact bisection to width below `tolerance`.
inline std::vector<RealRoot> real_roots_sorted(const RatPoly& p, double tolerance = 1e-12) {
  if (degree(p) < 1) throw PreconditionError("real_roots_sorted: degree must be >= 1");
  const Rational tol(tolerance);
  std::vector<RealRoot> roots;
  const auto factors = square_free_decomposition(p);
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const RatPoly& f = factors[i];
    if (degree(f) < 1) continue;
    const auto seq = detail::sturm_sequence(f);
    const Rational bound = detail::cauchy_bound(f);
    std::vector<std::pair<Rational, Rational>> pending{{-bound, bound}};
    while (!pending.empty()) {
      auto [a, b] = pending.back();
      pending.pop_back();
      const int count = detail::roots_in(seq, a, b);
      if (count == 0) continue;
      if (count > 1) {
        Rational mid = (a + b) / 2;
        pending.emplace_back(a, mid);
        pending.emplace_back(mid, b);
        continue;
      }
      // Exactly one root in (a, b]; refine.
      while (b - a > tol) {
        if (sgn(poly_eval(f, b)) == 0) {
          a = b;
          break;
        }
        Rational mid = (a + b) / 2;
        if (detail::roots_in(seq, a, mid) == 1) b = mid;
        else a = mid;
      }
      if (sgn(poly_eval(f, b)) == 0) a = b;
      roots.push_back({Rational((a + b) / 2).get_d(), static_cast<int>(i) + 1, a, b});
    }
  }
  std::sort(roots.begin(), roots.end(), [](const RealRoot& x, const RealRoot& y) { return x.value < y.value; });
  return roots;
}

struct RootPathProbe {
  std::vector<int> distinct_counts;  // per sample
  double max_lipschitz_ratio = 0.0;  // over consecutive samples with equal counts
  int constant_count_pairs = 0;
};

/// Samples the monic polynomial t^k + sum u_j t^j along the segment from
/// u_start to u_end at samples+1 rational points.  On consecutive samples
/// where the number of distinct real roots agrees, the distinct sorted roots
/// are compared and max |delta root| / |delta u| is recorded.
inline RootPathProbe probe_root_path(const std::vector<Rational>& u_start, const std::vector<Rational>& u_end,
                                     int samples, double tolerance = 1e-13) {
  if (u_start.size() != u_end.size() || u_start.empty())
    throw DimensionMismatch("probe_root_path: coefficient vectors differ in length");
  if (samples < 1) throw PreconditionError("probe_root_path: samples must be positive");
  const int k = static_cast<int>(u_start.size());
  RootPathProbe probe;
  std::vector<double> prev_roots;
  std::vector<double> prev_u;
  for (int s = 0; s <= samples; ++s) {
    const Rational t = make_rational(s, samples);
    RatPoly p(k + 1, Rational(0));
    std::vector<double> u(k);
    for (int j = 0; j < k; ++j) {
      p[j] = u_start[j] + t * (u_end[j] - u_start[j]);
      u[j] = p[j].get_d();
    }
    p[k] = 1;
    std::vector<double> distinct;
    for (const auto& r : real_roots_sorted(p, tolerance)) distinct.push_back(r.value);
    probe.distinct_counts.push_back(static_cast<int>(distinct.size()));
    if (s > 0 && distinct.size() == prev_roots.size() && !distinct.empty()) {
      double du = 0.0, dr = 0.0;
      for (int j = 0; j < k; ++j) du += (u[j] - prev_u[j]) * (u[j] - prev_u[j]);
      for (std::size_t j = 0; j < distinct.size(); ++j) dr = std::max(dr, std::abs(distinct[j] - prev_roots[j]));
      if (du > 0) probe.max_lipschitz_ratio = std::max(probe.max_lipschitz_ratio, dr / std::sqrt(du));
      ++probe.constant_count_pairs;
    }
    prev_roots = std::move(distinct);
    prev_u = std::move(u);
  }
  return probe;
}

}  // namespace nodallab

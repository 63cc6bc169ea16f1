#pragma once

// Truncated multivariate power series ("jets") with exact coefficients.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "nodallab/error.hpp"
#include "nodallab/exact.hpp"

namespace nodallab {

using Exponent = std::vector<int>;

namespace detail {

inline constexpr int kMaxJetVars = 8;
inline constexpr int kMaxJetOrder = 255;

// Exponent vectors packed one byte per variable, x_1 in the most significant
// byte.  Adding two keys multiplies the monomials as long as no exponent
// exceeds 255, which the order bound guarantees.
using MonomialKey = std::uint64_t;

inline MonomialKey pack(const Exponent& e) {
  MonomialKey key = 0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (e[i] < 0 || e[i] > kMaxJetOrder) throw PreconditionError("Jet: exponent out of range");
    key |= static_cast<MonomialKey>(e[i]) << (8 * (kMaxJetVars - 1 - i));
  }
  return key;
}

inline Exponent unpack(MonomialKey key, int nvars) {
  Exponent e(nvars);
  for (int i = 0; i < nvars; ++i) e[i] = static_cast<int>((key >> (8 * (kMaxJetVars - 1 - i))) & 0xffu);
  return e;
}

inline int key_degree(MonomialKey key) {
  int d = 0;
  for (; key != 0; key >>= 8) d += static_cast<int>(key & 0xffu);
  return d;
}

inline int key_exponent(MonomialKey key, int var) {
  return static_cast<int>((key >> (8 * (kMaxJetVars - 1 - var))) & 0xffu);
}

inline MonomialKey key_unit(int var) { return MonomialKey{1} << (8 * (kMaxJetVars - 1 - var)); }

}  // namespace detail

/// Power series in `nvars` variables truncated above total degree `order`.
/// Only nonzero coefficients are stored; absent monomials are zero.
template <class C>
class Jet {
 public:
  using Key = detail::MonomialKey;

  Jet() = default;
  Jet(int nvars, int order) : nvars_(nvars), order_(order) {
    if (nvars < 0 || nvars > detail::kMaxJetVars) throw PreconditionError("Jet: unsupported variable count");
    if (order < 0 || order > detail::kMaxJetOrder) throw PreconditionError("Jet: unsupported order");
  }

  static Jet constant(int nvars, int order, const C& c) {
    Jet j(nvars, order);
    j.add_term(Key{0}, c);
    return j;
  }
  /// x_{var+1} (variables are 0-based in code).
  static Jet variable(int nvars, int order, int var) {
    if (var < 0 || var >= nvars) throw PreconditionError("Jet: variable index out of range");
    Jet j(nvars, order);
    j.add_term(detail::key_unit(var), C(1));
    return j;
  }
  static Jet monomial(int nvars, int order, const Exponent& e, const C& c) {
    if (static_cast<int>(e.size()) != nvars) throw DimensionMismatch("Jet: exponent length mismatch");
    Jet j(nvars, order);
    j.add_term(detail::pack(e), c);
    return j;
  }

  int nvars() const { return nvars_; }
  int order() const { return order_; }
  const std::map<Key, C>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  C coeff(const Exponent& e) const {
    if (static_cast<int>(e.size()) != nvars_) throw DimensionMismatch("Jet: exponent length mismatch");
    auto it = terms_.find(detail::pack(e));
    return it == terms_.end() ? C(0) : it->second;
  }
  C coeff(Key key) const {
    auto it = terms_.find(key);
    return it == terms_.end() ? C(0) : it->second;
  }
  C constant_term() const { return coeff(Key{0}); }

  void set(const Exponent& e, const C& c) {
    if (static_cast<int>(e.size()) != nvars_) throw DimensionMismatch("Jet: exponent length mismatch");
    const Key key = detail::pack(e);
    terms_.erase(key);
    add_term(key, c);
  }

  /// Adds c x^key, silently dropping terms above the truncation order.
  void add_term(Key key, const C& c) {
    if (nodallab::is_zero(c) || detail::key_degree(key) > order_) return;
    auto [it, inserted] = terms_.try_emplace(key, c);
    if (!inserted) {
      it->second += c;
      if (nodallab::is_zero(it->second)) terms_.erase(it);
    }
  }

  /// Highest total degree with a nonzero coefficient, -1 for the zero jet.
  int degree() const {
    int d = -1;
    for (const auto& [k, c] : terms_) d = std::max(d, detail::key_degree(k));
    return d;
  }

  Jet homogeneous_part(int d) const {
    Jet out(nvars_, order_);
    for (const auto& [k, c] : terms_)
      if (detail::key_degree(k) == d) out.terms_.emplace(k, c);
    return out;
  }

  /// Same coefficients with a different truncation order (dropping terms above it).
  Jet with_order(int order) const {
    Jet out(nvars_, order);
    for (const auto& [k, c] : terms_)
      if (detail::key_degree(k) <= order) out.terms_.emplace(k, c);
    return out;
  }

  Jet derivative(int var) const {
    if (var < 0 || var >= nvars_) throw PreconditionError("Jet: variable index out of range");
    Jet out(nvars_, order_);
    const Key unit = detail::key_unit(var);
    for (const auto& [k, c] : terms_) {
      const int e = detail::key_exponent(k, var);
      if (e == 0) continue;
      out.add_term(k - unit, c * C(e));
    }
    return out;
  }

  C evaluate(const std::vector<C>& point) const {
    if (static_cast<int>(point.size()) != nvars_) throw DimensionMismatch("Jet: evaluation point length mismatch");
    C total(0);
    for (const auto& [k, c] : terms_) {
      C term = c;
      for (int v = 0; v < nvars_; ++v)
        for (int p = detail::key_exponent(k, v); p > 0; --p) term *= point[v];
      total += term;
    }
    return total;
  }

  Jet& operator+=(const Jet& o) {
    check_compatible(o);
    for (const auto& [k, c] : o.terms_) add_term(k, c);
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    check_compatible(o);
    for (const auto& [k, c] : o.terms_) add_term(k, -c);
    return *this;
  }
  Jet& operator*=(const C& s) {
    if (nodallab::is_zero(s)) {
      terms_.clear();
      return *this;
    }
    for (auto& [k, c] : terms_) c *= s;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator-(Jet a) { return a *= C(-1); }
  friend Jet operator*(Jet a, const C& s) { return a *= s; }
  friend Jet operator*(const C& s, Jet a) { return a *= s; }

  /// Truncated product.
  friend Jet operator*(const Jet& a, const Jet& b) {
    a.check_compatible(b);
    Jet out(a.nvars_, a.order_);
    for (const auto& [ka, ca] : a.terms_) {
      const int da = detail::key_degree(ka);
      for (const auto& [kb, cb] : b.terms_) {
        if (da + detail::key_degree(kb) > a.order_) continue;
        out.add_term(ka + kb, ca * cb);
      }
    }
    return out;
  }

  friend bool operator==(const Jet& a, const Jet& b) {
    return a.nvars_ == b.nvars_ && a.order_ == b.order_ && a.terms_ == b.terms_;
  }
  friend bool operator!=(const Jet& a, const Jet& b) { return !(a == b); }

  friend std::ostream& operator<<(std::ostream& os, const Jet& j) {
    if (j.terms_.empty()) return os << "0";
    // Graded order: by total degree, then lexicographically with x1 first.
    std::vector<std::pair<Key, C>> sorted(j.terms_.begin(), j.terms_.end());
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
      const int da = detail::key_degree(a.first), db = detail::key_degree(b.first);
      return da != db ? da < db : a.first > b.first;
    });
    bool first = true;
    for (const auto& [k, c] : sorted) {
      os << (first ? "" : " + ") << c;
      first = false;
      for (int v = 0; v < j.nvars_; ++v) {
        const int e = detail::key_exponent(k, v);
        if (e == 1) os << "*x" << v + 1;
        if (e > 1) os << "*x" << v + 1 << "^" << e;
      }
    }
    return os;
  }

 private:
  void check_compatible(const Jet& o) const {
    if (nvars_ != o.nvars_ || order_ != o.order_) throw DimensionMismatch("Jet: nvars/order mismatch");
  }

  int nvars_ = 0;
  int order_ = 0;
  std::map<Key, C> terms_;
};

template <class C>
bool is_zero(const Jet<C>& j) {
  return j.is_zero();
}
template <class C>
Jet<C> zero_like(const Jet<C>& j) {
  return Jet<C>(j.nvars(), j.order());
}
template <class C>
Jet<C> one_like(const Jet<C>& j) {
  return Jet<C>::constant(j.nvars(), j.order(), C(1));
}

using RationalJet = Jet<Rational>;
using GaussianJet = Jet<GaussianRational>;

/// r jets sharing nvars and order.
template <class C>
class VectorJet {
 public:
  VectorJet() = default;
  explicit VectorJet(std::vector<Jet<C>> components) : components_(std::move(components)) {
    for (const auto& c : components_)
      if (c.nvars() != components_.front().nvars() || c.order() != components_.front().order())
        throw DimensionMismatch("VectorJet: components disagree on nvars/order");
  }

  std::size_t size() const { return components_.size(); }
  const Jet<C>& operator[](std::size_t i) const { return components_[i]; }
  const std::vector<Jet<C>>& components() const { return components_; }
  int nvars() const { return components_.empty() ? 0 : components_.front().nvars(); }
  int order() const { return components_.empty() ? 0 : components_.front().order(); }

 private:
  std::vector<Jet<C>> components_;
};

/// Truncated product; both factors must share nvars and order.
template <class C>
Jet<C> jet_mul(const Jet<C>& a, const Jet<C>& b) {
  return a * b;
}

/// Smallest total degree with a nonzero coefficient; nullopt when every
/// coefficient up to the truncation order vanishes.
template <class C>
std::optional<int> vanishing_order(const Jet<C>& j) {
  std::optional<int> best;
  for (const auto& [k, c] : j.terms()) {
    const int d = detail::key_degree(k);
    if (!best || d < *best) best = d;
  }
  return best;
}

template <class C>
struct TaylorSplit {
  Jet<C> leading;    // homogeneous of degree k
  Jet<C> remainder;  // vanishing order >= k + 1
};

/// f = fhat + psi with fhat the degree-k homogeneous part.
template <class C>
TaylorSplit<C> taylor_leading(const Jet<C>& j, int k) {
  const auto order = vanishing_order(j);
  if (!order || *order != k) throw PreconditionError("taylor_leading: vanishing order differs from k");
  TaylorSplit<C> split{j.homogeneous_part(k), j};
  split.remainder -= split.leading;
  return split;
}

namespace detail {

template <class C>
C lift(const Rational& q) {
  return C(q);
}

}  // namespace detail

/// (j o A)(x) = j(A x), truncated at the jet's order.  A must be invertible.
template <class C>
Jet<C> compose_linear(const Jet<C>& j, const RationalMatrix& a) {
  const int n = j.nvars();
  if (static_cast<int>(a.rows()) != n || static_cast<int>(a.cols()) != n)
    throw DimensionMismatch("compose_linear: matrix size differs from nvars");
  if (n > 0 && is_zero(determinant(a))) throw PreconditionError("compose_linear: matrix is singular");
  const int order = j.order();

  // Linear forms L_i(x) = sum_j A_ij x_j and their powers, cached lazily.
  std::vector<std::vector<Jet<C>>> powers(n);
  for (int i = 0; i < n; ++i) {
    Jet<C> li(n, order);
    for (int c = 0; c < n; ++c) li.add_term(detail::key_unit(c), detail::lift<C>(a(i, c)));
    powers[i].push_back(Jet<C>::constant(n, order, C(1)));
    powers[i].push_back(std::move(li));
  }
  auto power = [&](int i, int p) -> const Jet<C>& {
    while (static_cast<int>(powers[i].size()) <= p) powers[i].push_back(powers[i].back() * powers[i][1]);
    return powers[i][p];
  };

  Jet<C> out(n, order);
  for (const auto& [k, c] : j.terms()) {
    Jet<C> term = Jet<C>::constant(n, order, c);
    for (int i = 0; i < n; ++i) {
      const int e = detail::key_exponent(k, i);
      if (e > 0) term = term * power(i, e);
    }
    out += term;
  }
  return out;
}

struct RegularDirection {
  std::vector<Rational> w;
  RationalMatrix a;      // a * w = e1; rows mutually orthogonal
  RationalMatrix a_inv;  // a_inv * e1 = w
};

namespace detail {

inline int spiral_rank(long c) { return c == 0 ? 0 : (c > 0 ? static_cast<int>(2 * c - 1) : static_cast<int>(-2 * c)); }

// Integer vectors with max-norm exactly r, ordered by L1 norm then by the
// coordinate order 0, 1, -1, 2, -2, ...
inline std::vector<std::vector<long>> lattice_shell(int n, long r) {
  std::vector<std::vector<long>> shell;
  std::vector<long> v(n, -r);
  while (true) {
    long mx = 0;
    for (long x : v) mx = std::max(mx, x < 0 ? -x : x);
    if (mx == r) shell.push_back(v);
    int i = n - 1;
    while (i >= 0 && v[i] == r) v[i--] = -r;
    if (i < 0) break;
    ++v[i];
  }
  std::stable_sort(shell.begin(), shell.end(), [](const auto& a, const auto& b) {
    long la = 0, lb = 0;
    for (long x : a) la += x < 0 ? -x : x;
    for (long x : b) lb += x < 0 ? -x : x;
    if (la != lb) return la < lb;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] != b[i]) return spiral_rank(a[i]) < spiral_rank(b[i]);
    return false;
  });
  return shell;
}

inline Rational dot(const std::vector<Rational>& a, const std::vector<Rational>& b) {
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace detail

/// Finds w with fhat(w) != 0 (basis vectors first, then a deterministic
/// lattice spiral) and a rational linear map A with A w = e1, so that
/// compose_linear(fhat, A^{-1}) has a nonzero x1^k coefficient.
template <class C>
RegularDirection regular_direction(const Jet<C>& fhat) {
  if (fhat.is_zero()) throw PreconditionError("regular_direction: polynomial is identically zero");
  const int n = fhat.nvars();
  if (n == 0) throw PreconditionError("regular_direction: no variables");

  auto evaluate_at = [&](const std::vector<long>& v) {
    std::vector<C> p;
    for (long x : v) p.push_back(C(Rational(x)));
    return fhat.evaluate(p);
  };

  std::optional<std::vector<long>> found;
  for (int i = 0; i < n && !found; ++i) {
    std::vector<long> e(n, 0);
    e[i] = 1;
    if (!is_zero(evaluate_at(e))) found = e;
  }
  // A nonzero polynomial of degree d cannot vanish on all of {-r..r}^n once
  // 2r + 1 > d, so the search terminates.
  const long limit = fhat.degree() / 2 + 1;
  for (long r = 1; r <= limit && !found; ++r)
    for (const auto& v : detail::lattice_shell(n, r))
      if (!is_zero(evaluate_at(v))) {
        found = v;
        break;
      }
  if (!found) throw PreconditionError("regular_direction: no direction found");

  RegularDirection out;
  for (long x : *found) out.w.emplace_back(x);

  // Rows: w / |w|^2, then Gram-Schmidt on e_1..e_n against the span so far.
  std::vector<std::vector<Rational>> rows{out.w};
  std::vector<std::vector<Rational>> basis{out.w};
  for (int i = 0; i < n && static_cast<int>(basis.size()) < n; ++i) {
    std::vector<Rational> v(n, Rational(0));
    v[i] = 1;
    for (const auto& b : basis) {
      const Rational f = detail::dot(v, b) / detail::dot(b, b);
      for (int c = 0; c < n; ++c) v[c] -= f * b[c];
    }
    bool nonzero = false;
    for (const auto& x : v) nonzero = nonzero || sgn(x) != 0;
    if (!nonzero) continue;
    basis.push_back(v);
    rows.push_back(v);
  }
  const Rational w2 = detail::dot(out.w, out.w);
  for (auto& x : rows[0]) x /= w2;
  out.a = RationalMatrix(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) out.a(r, c) = rows[r][c];
  out.a_inv = inverse(out.a);
  return out;
}

/// Coefficients of x1^p, p = 0..order, as jets in the remaining nvars - 1 variables.
template <class C>
std::vector<Jet<C>> coefficients_in_first(const Jet<C>& j) {
  if (j.nvars() == 0) throw PreconditionError("coefficients_in_first: jet has no variables");
  std::vector<Jet<C>> out(j.order() + 1, Jet<C>(j.nvars() - 1, j.order()));
  for (const auto& [k, c] : j.terms()) {
    const int p = detail::key_exponent(k, 0);
    out[p].add_term(k << 8, c);
  }
  return out;
}

/// Re-embeds a jet in nvars variables as one in new_nvars >= nvars variables,
/// shifting variable i to i + offset.
template <class C>
Jet<C> embed_vars(const Jet<C>& j, int new_nvars, int offset, int order) {
  if (offset < 0 || j.nvars() + offset > new_nvars) throw DimensionMismatch("embed_vars: variables do not fit");
  Jet<C> out(new_nvars, order);
  for (const auto& [k, c] : j.terms()) out.add_term(k >> (8 * offset), c);
  return out;
}

}  // namespace nodallab

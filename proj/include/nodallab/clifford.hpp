#pragma once

// Exact matrix representations of the Clifford generators of R^n.

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <vector>

#include "nodallab/error.hpp"
#include "nodallab/exact.hpp"

namespace nodallab {

/// Generators gamma_1..gamma_n as rank x rank matrices with entries in
/// {0, +-1, +-i}, satisfying gamma_i gamma_j + gamma_j gamma_i = -2 delta_ij
/// and gamma_i^* = -gamma_i.
struct GammaRep {
  int n = 0;
  int rank = 0;
  std::vector<GaussianMatrix> gammas;

  /// Clifford multiplication by v = sum v_i e_i as a matrix.
  template <class Scalar>
  GaussianMatrix matrix_of(const std::vector<Scalar>& v) const {
    if (static_cast<int>(v.size()) != n) throw DimensionMismatch("GammaRep: vector dimension mismatch");
    GaussianMatrix m(rank, rank);
    for (int i = 0; i < n; ++i) m += gammas[i] * GaussianRational(Rational(v[i]));
    return m;
  }

  /// Floating-point copies of the generators.
  std::vector<Eigen::MatrixXcd> numeric() const {
    std::vector<Eigen::MatrixXcd> out;
    for (const auto& g : gammas) {
      Eigen::MatrixXcd m(rank, rank);
      for (int r = 0; r < rank; ++r)
        for (int c = 0; c < rank; ++c) m(r, c) = to_complex(g(r, c));
      out.push_back(std::move(m));
    }
    return out;
  }
};

namespace detail {

inline GaussianMatrix pauli_base(int which) {
  const GaussianRational i = GaussianRational::i();
  GaussianMatrix m(2, 2);
  switch (which) {
    case 1:  // [[i, 0], [0, -i]]
      m(0, 0) = i;
      m(1, 1) = -i;
      break;
    case 2:  // [[0, 1], [-1, 0]]
      m(0, 1) = 1;
      m(1, 0) = -1;
      break;
    default:  // sigma = i * gamma1 * gamma2 = [[0, -1], [-1, 0]], sigma^2 = I
      m(0, 1) = -1;
      m(1, 0) = -1;
      break;
  }
  return m;
}

}  // namespace detail

/// Generators for R^n, n >= 1.  Base cases n = 1 ([[i]]) and n = 2; higher
/// n by gamma_i^(n+2) = gamma_i^(n) (x) sigma for i <= n, plus I (x) tau_1 and
/// I (x) tau_2 with tau_{1,2} the n = 2 generators.  Rank is 2^floor(n/2).
inline GammaRep build_gamma(int n) {
  if (n < 1) throw PreconditionError("build_gamma: n must be >= 1");
  GammaRep rep;
  if (n % 2 == 1) {
    GaussianMatrix g(1, 1);
    g(0, 0) = GaussianRational::i();
    rep = {1, 1, {g}};
  } else {
    rep = {2, 2, {detail::pauli_base(1), detail::pauli_base(2)}};
  }
  const GaussianMatrix sigma = detail::pauli_base(0);
  const GaussianMatrix tau1 = detail::pauli_base(1);
  const GaussianMatrix tau2 = detail::pauli_base(2);
  while (rep.n < n) {
    GammaRep next;
    next.n = rep.n + 2;
    next.rank = rep.rank * 2;
    const GaussianMatrix id = GaussianMatrix::identity(rep.rank);
    for (const auto& g : rep.gammas) next.gammas.push_back(kron(g, sigma));
    next.gammas.push_back(kron(id, tau1));
    next.gammas.push_back(kron(id, tau2));
    rep = std::move(next);
  }
  return rep;
}

/// (sum v_i gamma_i) s, exact.
template <class Scalar>
std::vector<GaussianRational> clifford_action(const std::vector<Scalar>& v, const std::vector<GaussianRational>& s,
                                              const GammaRep& rep) {
  if (static_cast<int>(s.size()) != rep.rank) throw DimensionMismatch("clifford_action: spinor rank mismatch");
  return rep.matrix_of(v).apply(s);
}

/// Floating-point Clifford action with precomputed numeric generators.
inline Eigen::VectorXcd clifford_action(const std::vector<double>& v, const Eigen::VectorXcd& s,
                                        const std::vector<Eigen::MatrixXcd>& gammas) {
  if (v.size() != gammas.size()) throw DimensionMismatch("clifford_action: vector dimension mismatch");
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(s.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (gammas[i].cols() != s.size()) throw DimensionMismatch("clifford_action: spinor rank mismatch");
    out += v[i] * (gammas[i] * s);
  }
  return out;
}

/// (1 + v)^{-1} = (1 - v) / (1 + |v|^2) in the Clifford algebra, using v.v = -|v|^2.
inline GaussianMatrix one_plus_v_inverse(const std::vector<Rational>& v, const GammaRep& rep) {
  Rational norm2 = 0;
  for (const auto& x : v) norm2 += x * x;
  GaussianMatrix m = GaussianMatrix::identity(rep.rank) - rep.matrix_of(v);
  const Rational scale = 1 / (1 + norm2);
  return m * GaussianRational(scale);
}

struct RelationsReport {
  bool ok = false;
  double max_anticommutator_deviation = 0.0;
  double max_skew_deviation = 0.0;
  bool rank_ok = false;
};

inline RelationsReport relations_check(const GammaRep& rep) {
  RelationsReport report;
  auto max_abs = [](const GaussianMatrix& m) {
    double best = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r)
      for (std::size_t c = 0; c < m.cols(); ++c) best = std::max(best, std::abs(to_complex(m(r, c))));
    return best;
  };
  bool exact = static_cast<int>(rep.gammas.size()) == rep.n;
  for (const auto& g : rep.gammas)
    if (static_cast<int>(g.rows()) != rep.rank || static_cast<int>(g.cols()) != rep.rank) exact = false;
  if (!exact) return report;

  const GaussianMatrix id = GaussianMatrix::identity(rep.rank);
  for (int i = 0; i < rep.n; ++i) {
    const GaussianMatrix skew = rep.gammas[i].adjoint() + rep.gammas[i];
    if (!skew.is_zero()) exact = false;
    report.max_skew_deviation = std::max(report.max_skew_deviation, max_abs(skew));
    for (int j = 0; j < rep.n; ++j) {
      GaussianMatrix dev = rep.gammas[i] * rep.gammas[j] + rep.gammas[j] * rep.gammas[i];
      if (i == j) dev += id * GaussianRational(2);
      if (!dev.is_zero()) exact = false;
      report.max_anticommutator_deviation = std::max(report.max_anticommutator_deviation, max_abs(dev));
    }
  }
  report.rank_ok = rep.rank == (1 << (rep.n / 2));
  report.ok = exact;
  return report;
}

}  // namespace nodallab

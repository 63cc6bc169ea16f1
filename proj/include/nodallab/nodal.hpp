#pragma once

// Zero-set extraction on sampled fields, box-counting dimension, discreteness
// across refinements, nodal domains, singular points and crossing angles.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <deque>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "nodallab/error.hpp"
#include "nodallab/fields.hpp"

namespace nodallab {

// ---------------------------------------------------------------------------
// Sampled fields

/// Real-valued components on the nodes of a grid.  One component is a scalar
/// field; more components are a vector field whose zero set is sought.
struct SampledField {
  Grid grid;
  std::vector<std::vector<double>> comps;

  bool scalar() const { return comps.size() == 1; }
  double norm_at(std::size_t k) const {
    double s = 0;
    for (const auto& c : comps) s += c[k] * c[k];
    return std::sqrt(s);
  }
};

inline SampledField sampled_scalar(const Grid& g, std::vector<double> values) {
  if (values.size() != g.node_count()) throw DimensionMismatch("sampled_scalar: sample count");
  return {g, {std::move(values)}};
}

namespace detail {

// Real and imaginary parts of the given complex components, dropping parts
// that are zero to within 1e-13 of the largest magnitude.
inline SampledField split_parts(const Grid& g, const std::vector<const std::vector<cplx>*>& parts) {
  double biggest = 0;
  for (const auto* c : parts)
    for (const auto& z : *c) biggest = std::max({biggest, std::abs(z.real()), std::abs(z.imag())});
  SampledField out{g, {}};
  for (const auto* c : parts) {
    for (int im = 0; im < 2; ++im) {
      std::vector<double> v(c->size());
      double m = 0;
      for (std::size_t k = 0; k < v.size(); ++k) {
        v[k] = im ? (*c)[k].imag() : (*c)[k].real();
        m = std::max(m, std::abs(v[k]));
      }
      if (m > 1e-13 * biggest) out.comps.push_back(std::move(v));
    }
  }
  if (out.comps.empty()) out.comps.emplace_back(g.node_count(), 0.0);
  return out;
}

}  // namespace detail

inline SampledField sampled_from(const FormField& w) {
  std::vector<const std::vector<cplx>*> parts;
  for (const auto& c : w.comps)
    if (!c.empty()) parts.push_back(&c);
  if (parts.empty()) return {w.grid, {std::vector<double>(w.grid.node_count(), 0.0)}};
  return detail::split_parts(w.grid, parts);
}

inline SampledField sampled_from(const SpinorField& s) {
  std::vector<const std::vector<cplx>*> parts;
  for (const auto& c : s.comps) parts.push_back(&c);
  return detail::split_parts(s.grid, parts);
}

/// Components sqrt(lambda) f (f itself when lambda = 0) and the partials of f,
/// evaluated analytically at the nodes.
inline SampledField sample_mixed_eigenform(const ScalarFunction& f, const Grid& g, double lambda) {
  if (f.dim != g.dim()) throw DimensionMismatch("sample_mixed_eigenform: dimension");
  if (lambda < 0) throw PreconditionError("sample_mixed_eigenform: lambda must be >= 0");
  const int n = g.dim();
  const double scale = lambda > 0 ? std::sqrt(lambda) : 1.0;
  SampledField out{g, std::vector<std::vector<double>>(n + 1, std::vector<double>(g.node_count()))};
  Eigen::VectorXd x(n);
  int idx[3];
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    g.node_unravel(k, idx);
    for (int a = 0; a < n; ++a) x(a) = g.coord(a, idx[a]);
    out.comps[0][k] = scale * f.value(x);
    const Eigen::VectorXd gr = f.gradient(x);
    for (int a = 0; a < n; ++a) out.comps[a + 1][k] = gr(a);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cells

/// Cells are indexed row-major over grid.cell_shape(); the cell with lower
/// corner node i spans [coord(i), coord(i) + h) on every axis.
struct CellSet {
  Grid grid;
  std::vector<std::size_t> cells;                // sorted, unique
  std::vector<std::vector<double>> targets;      // confirmed zero estimates (vector fields)
};

namespace detail {

inline void cell_unravel(const Grid& g, std::size_t c, int* idx) {
  for (int a = g.dim() - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(c % g.cells(a));
    c /= g.cells(a);
  }
}

inline std::size_t cell_index(const Grid& g, const int* idx) {
  std::size_t c = 0;
  for (int a = 0; a < g.dim(); ++a) c = c * g.cells(a) + idx[a];
  return c;
}

inline std::size_t corner_node(const Grid& g, const int* cell, unsigned bits) {
  int idx[3];
  for (int a = 0; a < g.dim(); ++a) {
    idx[a] = cell[a] + static_cast<int>((bits >> a) & 1u);
    if (idx[a] == g.nodes(a)) idx[a] = 0;
  }
  return g.node_index(idx);
}

inline void require_resolution(const Grid& g, const char* what) {
  for (int a = 0; a < g.dim(); ++a)
    if (g.nodes(a) < 8) throw PreconditionError(std::string(what) + ": resolution below 8 nodes per axis");
}

// Periodic minimum-image difference along axis a.
inline double wrapped_delta(const Grid& g, int a, double d) {
  if (!g.periodic()) return d;
  const double L = g.extent(a);
  return d - L * std::round(d / L);
}

// Cell containing x, or nullopt outside a bounded grid.
inline std::optional<std::size_t> locate_cell(const Grid& g, const std::vector<double>& x) {
  int idx[3];
  for (int a = 0; a < g.dim(); ++a) {
    long i = static_cast<long>(std::floor((x[a] - g.origin(a)) / g.spacing(a)));
    if (g.periodic()) {
      i %= g.cells(a);
      if (i < 0) i += g.cells(a);
    } else if (i < 0 || i >= g.cells(a)) {
      return std::nullopt;
    }
    idx[a] = static_cast<int>(i);
  }
  return cell_index(g, idx);
}

// Points kept only if no earlier point lies within radius in the sup norm.
class PointDeduper {
 public:
  PointDeduper(const Grid& g, double radius) : g_(g), r_(radius) {
    for (int a = 0; a < g.dim(); ++a) {
      buckets_[a] = std::max(1, static_cast<int>(std::floor(g.extent(a) / r_)));
      width_[a] = g.periodic() ? g.extent(a) / buckets_[a] : r_;
    }
  }

  bool insert(const std::vector<double>& x) {
    const int n = g_.dim();
    long key[3];
    for (int a = 0; a < n; ++a) key[a] = bucket(a, x[a]);
    int total = 1;
    for (int a = 0; a < n; ++a) total *= 3;
    for (int t = 0; t < total; ++t) {
      long probe[3];
      int rest = t;
      for (int a = 0; a < n; ++a) {
        probe[a] = key[a] + rest % 3 - 1;
        rest /= 3;
        if (g_.periodic()) probe[a] = ((probe[a] % buckets_[a]) + buckets_[a]) % buckets_[a];
      }
      const auto it = map_.find(hash(probe));
      if (it == map_.end()) continue;
      for (std::size_t p : it->second) {
        double d = 0;
        for (int a = 0; a < n; ++a) d = std::max(d, std::abs(wrapped_delta(g_, a, points_[p][a] - x[a])));
        if (d < r_) return false;
      }
    }
    map_[hash(key)].push_back(points_.size());
    points_.push_back(x);
    return true;
  }

  const std::vector<std::vector<double>>& points() const { return points_; }

 private:
  long bucket(int a, double v) const {
    long b = static_cast<long>(std::floor((v - g_.origin(a)) / width_[a]));
    if (g_.periodic()) b = ((b % buckets_[a]) + buckets_[a]) % buckets_[a];
    return b;
  }
  std::size_t hash(const long* key) const {
    std::size_t h = 1469598103934665603ull;
    for (int a = 0; a < g_.dim(); ++a) h = (h ^ static_cast<std::size_t>(key[a] + (1l << 30))) * 1099511628211ull;
    return h;
  }

  const Grid& g_;
  double r_;
  std::array<int, 3> buckets_{};
  std::array<double, 3> width_{};
  std::unordered_map<std::size_t, std::vector<std::size_t>> map_;
  std::vector<std::vector<double>> points_;
};

}  // namespace detail

inline std::vector<double> cell_center(const Grid& g, std::size_t cell) {
  int idx[3];
  detail::cell_unravel(g, cell, idx);
  std::vector<double> p(g.dim());
  for (int a = 0; a < g.dim(); ++a) p[a] = g.coord(a, idx[a]) + 0.5 * g.spacing(a);
  return p;
}

struct ZeroCellOptions {
  double threshold_constant = 4.0;  // C in min-corner-norm < C h |J|_F
};

/// Scalar fields: cells whose corners take both signs or touch zero.
/// Vector fields: cells whose smallest corner norm is below C h |J|_F, kept
/// when one damped Gauss-Newton step from the cell center lands within one
/// spacing of the center and at least halves the linearized residual; the
/// cell containing each (deduplicated) landing point is flagged.
inline CellSet zero_cells(const SampledField& field, const ZeroCellOptions& opts = {}) {
  const Grid& g = field.grid;
  detail::require_resolution(g, "zero_cells");
  for (const auto& c : field.comps)
    if (c.size() != g.node_count()) throw DimensionMismatch("zero_cells: component size");
  const int n = g.dim();
  const unsigned corners = 1u << n;
  const std::size_t m = field.comps.size();
  CellSet out{g, {}, {}};
  int idx[3];
  std::size_t node[8];

  if (field.scalar()) {
    const auto& f = field.comps[0];
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
      detail::cell_unravel(g, c, idx);
      bool pos = false, neg = false, zero = false;
      for (unsigned b = 0; b < corners; ++b) {
        const double v = f[detail::corner_node(g, idx, b)];
        pos = pos || v > 0;
        neg = neg || v < 0;
        zero = zero || v == 0;
      }
      if ((pos && neg) || zero) out.cells.push_back(c);
    }
    return out;
  }

  double hmax = 0;
  for (int a = 0; a < n; ++a) hmax = std::max(hmax, g.spacing(a));
  detail::PointDeduper dedupe(g, 0.5 * hmax);
  std::vector<std::size_t> flagged;
  Eigen::MatrixXd J(m, n);
  Eigen::VectorXd center(m);
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    detail::cell_unravel(g, c, idx);
    double minnorm = std::numeric_limits<double>::infinity();
    for (unsigned b = 0; b < corners; ++b) {
      node[b] = detail::corner_node(g, idx, b);
      minnorm = std::min(minnorm, field.norm_at(node[b]));
    }
    J.setZero();
    center.setZero();
    for (std::size_t q = 0; q < m; ++q) {
      const auto& f = field.comps[q];
      for (unsigned b = 0; b < corners; ++b) {
        center(q) += f[node[b]];
        for (int a = 0; a < n; ++a)
          if (!((b >> a) & 1u)) J(q, a) += f[node[b | (1u << a)]] - f[node[b]];
      }
    }
    center /= corners;
    for (int a = 0; a < n; ++a) J.col(a) /= (corners / 2) * g.spacing(a);
    const double jf = J.norm();
    if (!(minnorm < opts.threshold_constant * hmax * jf)) continue;

    const Eigen::MatrixXd jtj = J.transpose() * J;
    const double mu = 1e-10 * jtj.trace() / n;
    const Eigen::VectorXd step =
        -(jtj + mu * Eigen::MatrixXd::Identity(n, n)).ldlt().solve(J.transpose() * center);
    bool inside = true;
    for (int a = 0; a < n; ++a) inside = inside && std::abs(step(a)) <= g.spacing(a);
    if (!inside || (center + J * step).norm() > 0.5 * center.norm()) continue;

    std::vector<double> target(n);
    for (int a = 0; a < n; ++a) {
      target[a] = g.coord(a, idx[a]) + 0.5 * g.spacing(a) + step(a);
      if (g.periodic()) {
        const double L = g.extent(a);
        target[a] = g.origin(a) + std::fmod(std::fmod(target[a] - g.origin(a), L) + L, L);
      }
    }
    const auto home = detail::locate_cell(g, target);
    if (!home || !dedupe.insert(target)) continue;
    flagged.push_back(*home);
  }
  out.targets = dedupe.points();
  std::sort(flagged.begin(), flagged.end());
  flagged.erase(std::unique(flagged.begin(), flagged.end()), flagged.end());
  out.cells = std::move(flagged);
  return out;
}

// ---------------------------------------------------------------------------
// Components and box counts

struct Component {
  std::size_t size = 0;
  double diameter = 0;           // diagonal of the bounding box of its cells
  std::vector<double> centroid;  // mean cell center, wrapped into the domain
  std::vector<std::size_t> cells;
};

/// Connected components under full (8 / 26) neighbourhood adjacency.
inline std::vector<Component> components(const CellSet& set) {
  const Grid& g = set.grid;
  const int n = g.dim();
  std::vector<char> flagged(g.cell_count(), 0), seen(g.cell_count(), 0);
  for (std::size_t c : set.cells) flagged[c] = 1;
  int total = 1;
  for (int a = 0; a < n; ++a) total *= 3;

  std::vector<Component> out;
  for (std::size_t start : set.cells) {
    if (seen[start]) continue;
    Component comp;
    std::deque<std::pair<std::size_t, std::array<long, 3>>> queue;
    int idx[3];
    detail::cell_unravel(g, start, idx);
    queue.push_back({start, {idx[0], n > 1 ? idx[1] : 0, n > 2 ? idx[2] : 0}});
    seen[start] = 1;
    std::array<long, 3> lo{queue.front().second}, hi{queue.front().second};
    std::vector<double> sum(n, 0.0);
    while (!queue.empty()) {
      const auto [c, pos] = queue.front();
      queue.pop_front();
      comp.cells.push_back(c);
      for (int a = 0; a < n; ++a) {
        lo[a] = std::min(lo[a], pos[a]);
        hi[a] = std::max(hi[a], pos[a]);
        sum[a] += g.coord(a, 0) + (pos[a] + 0.5) * g.spacing(a);
      }
      for (int t = 0; t < total; ++t) {
        int rest = t;
        std::array<long, 3> np{pos};
        bool valid = true;
        int nidx[3];
        for (int a = 0; a < n; ++a) {
          np[a] += rest % 3 - 1;
          rest /= 3;
          long w = np[a];
          if (g.periodic()) {
            w %= g.cells(a);
            if (w < 0) w += g.cells(a);
          } else if (w < 0 || w >= g.cells(a)) {
            valid = false;
          }
          nidx[a] = static_cast<int>(w);
        }
        if (!valid) continue;
        const std::size_t nc = detail::cell_index(g, nidx);
        if (!flagged[nc] || seen[nc]) continue;
        seen[nc] = 1;
        queue.push_back({nc, np});
      }
    }
    comp.size = comp.cells.size();
    double d2 = 0;
    comp.centroid.resize(n);
    for (int a = 0; a < n; ++a) {
      const double span = (hi[a] - lo[a] + 1) * g.spacing(a);
      d2 += span * span;
      double c = sum[a] / comp.size;
      if (g.periodic()) c = g.origin(a) + std::fmod(std::fmod(c - g.origin(a), g.extent(a)) + g.extent(a), g.extent(a));
      comp.centroid[a] = c;
    }
    comp.diameter = std::sqrt(d2);
    std::sort(comp.cells.begin(), comp.cells.end());
    out.push_back(std::move(comp));
  }
  return out;
}

struct BoxCount {
  int level = 0;         // coarsening exponent s
  double epsilon = 0;    // box side h 2^s (largest axis spacing)
  std::size_t count = 0;
};

/// Occupied boxes of side 2^s cells for every s with at least 8 boxes per axis.
inline std::vector<BoxCount> box_counts(const CellSet& set) {
  const Grid& g = set.grid;
  const int n = g.dim();
  double h = 0;
  for (int a = 0; a < n; ++a) h = std::max(h, g.spacing(a));
  std::vector<BoxCount> out;
  for (int s = 0;; ++s) {
    bool enough = true;
    for (int a = 0; a < n; ++a) enough = enough && (g.cells(a) >> s) >= 8;
    if (!enough) break;
    std::vector<std::size_t> coarse;
    coarse.reserve(set.cells.size());
    int idx[3];
    for (std::size_t c : set.cells) {
      detail::cell_unravel(g, c, idx);
      std::size_t key = 0;
      for (int a = 0; a < n; ++a) key = key * (static_cast<std::size_t>(g.cells(a) >> s) + 1) + (idx[a] >> s);
      coarse.push_back(key);
    }
    std::sort(coarse.begin(), coarse.end());
    const auto count = static_cast<std::size_t>(std::unique(coarse.begin(), coarse.end()) - coarse.begin());
    out.push_back({s, h * std::ldexp(1.0, s), count});
  }
  return out;
}

/// Least-squares slope of log N against log(1/epsilon): an estimate of the
/// upper box-counting dimension, itself an upper bound for Hausdorff dimension.
struct DimensionFit {
  double dimension = 0;
  double intercept = 0;
  double residual = 0;  // RMS of the log-log fit
  int scales = 0;
};

inline DimensionFit box_dimension(const std::vector<BoxCount>& scales) {
  if (scales.size() < 4) throw PreconditionError("box_dimension: at least 4 scales required");
  double emin = scales.front().epsilon, emax = emin;
  for (const auto& s : scales) {
    if (s.count == 0 || !(s.epsilon > 0)) throw PreconditionError("box_dimension: empty or degenerate scale");
    emin = std::min(emin, s.epsilon);
    emax = std::max(emax, s.epsilon);
  }
  if (emax < 4 * emin * (1 - 1e-12)) throw PreconditionError("box_dimension: scales span under two octaves");
  const double k = static_cast<double>(scales.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& s : scales) {
    const double x = -std::log(s.epsilon), y = std::log(static_cast<double>(s.count));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  DimensionFit fit;
  fit.scales = static_cast<int>(scales.size());
  fit.dimension = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  fit.intercept = (sy - fit.dimension * sx) / k;
  double ss = 0;
  for (const auto& s : scales) {
    const double r = std::log(static_cast<double>(s.count)) - fit.intercept + fit.dimension * std::log(s.epsilon);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / k);
  return fit;
}

// ---------------------------------------------------------------------------
// Discreteness across refinements

struct DiscretenessResult {
  bool discrete = false;
  std::vector<std::size_t> component_counts;  // per level, coarse to fine
  std::vector<double> max_diameters;
  std::vector<double> shrink_ratios;          // max diameter coarse / fine per doubling
};

/// True iff the component count agrees on the two finest levels and the
/// largest component diameter shrinks by at least 1.8 per halving of h.
inline DiscretenessResult discreteness_check(const std::vector<CellSet>& levels) {
  if (levels.size() < 3) throw PreconditionError("discreteness_check: at least 3 levels required");
  for (std::size_t l = 1; l < levels.size(); ++l) {
    const Grid& a = levels[l - 1].grid;
    const Grid& b = levels[l].grid;
    if (a.dim() != b.dim() || a.periodic() != b.periodic())
      throw PreconditionError("discreteness_check: inconsistent levels");
    for (int q = 0; q < a.dim(); ++q)
      if (std::abs(a.spacing(q) / b.spacing(q) - 2.0) > 1e-9 || std::abs(a.extent(q) - b.extent(q)) > 1e-9 * a.extent(q))
        throw PreconditionError("discreteness_check: levels must halve the spacing on the same domain");
  }
  DiscretenessResult out;
  for (const auto& lv : levels) {
    const auto comps = components(lv);
    double dmax = 0;
    for (const auto& c : comps) dmax = std::max(dmax, c.diameter);
    out.component_counts.push_back(comps.size());
    out.max_diameters.push_back(dmax);
  }
  const std::size_t L = levels.size();
  bool ok = out.component_counts[L - 1] == out.component_counts[L - 2];
  for (std::size_t l = 1; l < L; ++l) {
    const double coarse = out.max_diameters[l - 1], fine = out.max_diameters[l];
    if (coarse == 0 && fine == 0) {
      out.shrink_ratios.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    const double ratio = fine > 0 ? coarse / fine : std::numeric_limits<double>::infinity();
    out.shrink_ratios.push_back(ratio);
    ok = ok && ratio >= 1.8;
  }
  out.discrete = ok;
  return out;
}

// ---------------------------------------------------------------------------
// Nodal domains

/// Connected components of the unflagged cells under face adjacency.
inline int nodal_domains(const SampledField& f) {
  if (!f.scalar()) throw PreconditionError("nodal_domains: scalar field required");
  const CellSet zeros = zero_cells(f);
  const Grid& g = f.grid;
  if (zeros.cells.size() == g.cell_count()) throw PreconditionError("nodal_domains: zero cells cover the grid");
  const int n = g.dim();
  std::vector<char> blocked(g.cell_count(), 0);
  for (std::size_t c : zeros.cells) blocked[c] = 1;
  int domains = 0;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < g.cell_count(); ++start) {
    if (blocked[start]) continue;
    ++domains;
    blocked[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t c = stack.back();
      stack.pop_back();
      int idx[3];
      detail::cell_unravel(g, c, idx);
      for (int a = 0; a < n; ++a)
        for (int dir : {-1, 1}) {
          int nidx[3] = {idx[0], idx[1], idx[2]};
          nidx[a] += dir;
          if (g.periodic()) {
            nidx[a] = (nidx[a] + g.cells(a)) % g.cells(a);
          } else if (nidx[a] < 0 || nidx[a] >= g.cells(a)) {
            continue;
          }
          const std::size_t nc = detail::cell_index(g, nidx);
          if (blocked[nc]) continue;
          blocked[nc] = 1;
          stack.push_back(nc);
        }
    }
  }
  return domains;
}

// ---------------------------------------------------------------------------
// Singular points

/// Common zeros of f and df, seeded from the vector zero cells of the mixed
/// eigenform and polished by Gauss-Newton on (f, df).  Every returned point
/// has |f|, |df| < 1e-6, lies inside the sampled region and is at least one
/// spacing from every other returned point.
inline std::vector<std::vector<double>> singular_set(const ScalarFunction& f, const Grid& g, double lambda) {
  if (eigen_residual(f, g, lambda) >= 1e-8) throw PreconditionError("singular_set: not an eigenfunction");
  const int n = g.dim();
  const CellSet seeds = zero_cells(sample_mixed_eigenform(f, g, lambda));
  double hmax = 0;
  for (int a = 0; a < n; ++a) hmax = std::max(hmax, g.spacing(a));
  detail::PointDeduper dedupe(g, hmax);
  for (const auto& seed : seeds.targets) {
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(seed.data(), n);
    const Eigen::VectorXd x0 = x;
    Eigen::VectorXd F(n + 1);
    Eigen::MatrixXd J(n + 1, n);
    for (int it = 0; it < 50; ++it) {
      F(0) = f.value(x);
      F.tail(n) = f.gradient(x);
      if (F.norm() < 1e-14) break;
      J.row(0) = f.gradient(x).transpose();
      J.bottomRows(n) = f.hessian(x);
      const Eigen::MatrixXd jtj = J.transpose() * J;
      const double mu = 1e-14 * std::max(1.0, jtj.trace());
      const Eigen::VectorXd step = -(jtj + mu * Eigen::MatrixXd::Identity(n, n)).ldlt().solve(J.transpose() * F);
      x += step;
      if (step.norm() < 1e-15 * (1 + x.norm())) break;
    }
    if (std::abs(f.value(x)) >= 1e-6 || f.gradient(x).norm() >= 1e-6) continue;
    bool near = true;
    for (int a = 0; a < n; ++a) near = near && std::abs(detail::wrapped_delta(g, a, x(a) - x0(a))) <= 2 * g.spacing(a);
    if (!near) continue;
    std::vector<double> p(x.data(), x.data() + n);
    bool inside = true;
    for (int a = 0; a < n; ++a) {
      if (g.periodic()) {
        const double L = g.extent(a);
        p[a] = g.origin(a) + std::fmod(std::fmod(p[a] - g.origin(a), L) + L, L);
      } else {
        inside = inside && p[a] >= g.coord(a, 0) && p[a] <= g.coord(a, g.nodes(a) - 1);
      }
    }
    if (inside) dedupe.insert(p);
  }
  auto out = dedupe.points();
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Crossing angles

struct CrossingOptions {
  double spacing = 0.02;  // stencil step
  int stencil = 9;        // points per axis
  int max_order = 3;
  double relative = 1e-3;  // leading block threshold relative to the largest block
};

struct CrossingAngles {
  int order = 0;
  std::vector<double> rays_deg;  // ascending in [0, 360)
  std::vector<double> gaps_deg;  // consecutive, wrapping
};

/// Nodal rays at p from the zero set on the unit circle of the leading
/// homogeneous part of a least-squares Taylor fit.
inline CrossingAngles crossing_angles(const ScalarFunction& f, const std::vector<double>& p,
                                      const CrossingOptions& opts = {}) {
  if (f.dim != 2 || p.size() != 2) throw PreconditionError("crossing_angles: two-dimensional input required");
  const int K = opts.max_order;
  std::vector<std::pair<int, int>> monos;
  for (int d = 0; d <= K; ++d)
    for (int i = d; i >= 0; --i) monos.push_back({i, d - i});
  const int half = opts.stencil / 2;
  const int rows = opts.stencil * opts.stencil;
  Eigen::MatrixXd A(rows, static_cast<int>(monos.size()));
  Eigen::VectorXd b(rows);
  int r = 0;
  Eigen::VectorXd x(2);
  for (int i = -half; i <= half; ++i)
    for (int j = -half; j <= half; ++j, ++r) {
      x << p[0] + i * opts.spacing, p[1] + j * opts.spacing;
      b(r) = f.value(x);
      for (std::size_t q = 0; q < monos.size(); ++q)
        A(r, static_cast<int>(q)) = std::pow(double(i), monos[q].first) * std::pow(double(j), monos[q].second);
    }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);

  std::vector<double> block(K + 1, 0.0);
  for (std::size_t q = 0; q < monos.size(); ++q) {
    const int d = monos[q].first + monos[q].second;
    block[d] += c(static_cast<int>(q)) * c(static_cast<int>(q));
  }
  double biggest = 0;
  for (auto& v : block) biggest = std::max(biggest, v = std::sqrt(v));
  if (!(biggest > 1e-14 * std::max(1.0, b.cwiseAbs().maxCoeff())))
    throw PreconditionError("crossing_angles: fitted form vanishes identically");
  CrossingAngles out;
  while (block[out.order] < opts.relative * biggest) ++out.order;
  if (out.order == 0) throw PreconditionError("crossing_angles: point is not a zero");

  auto form = [&](double t) {
    double s = 0;
    const double ct = std::cos(t), st = std::sin(t);
    for (std::size_t q = 0; q < monos.size(); ++q)
      if (monos[q].first + monos[q].second == out.order)
        s += c(static_cast<int>(q)) * std::pow(ct, monos[q].first) * std::pow(st, monos[q].second);
    return s;
  };
  // Samples start at an irrational phase so rays at multiples of the step are
  // not hit exactly; a zero sample counts as nonnegative, and the loop closes on
  // the first sample, so each simple sign change yields exactly one ray.
  const int samples = 7200;
  const double two_pi = 2 * std::numbers::pi;
  const double step = two_pi / samples;
  const double t0 = step * (std::numbers::sqrt2 - 1);
  std::vector<double> vals(samples);
  for (int k = 0; k < samples; ++k) vals[k] = form(t0 + step * k);
  for (int k = 0; k < samples; ++k) {
    const double va = vals[k], vb = vals[(k + 1) % samples];
    if ((va < 0) == (vb < 0)) continue;
    double lo = t0 + step * k, hi = lo + step, flo = va;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi), fm = form(mid);
      if ((fm < 0) == (flo < 0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    out.rays_deg.push_back(0.5 * (lo + hi) * 180 / std::numbers::pi);
  }
  for (auto& ray : out.rays_deg)
    if (ray >= 360.0) ray -= 360.0;
  std::sort(out.rays_deg.begin(), out.rays_deg.end());
  for (std::size_t q = 0; q < out.rays_deg.size(); ++q) {
    const double next = q + 1 < out.rays_deg.size() ? out.rays_deg[q + 1] : out.rays_deg.front() + 360.0;
    out.gaps_deg.push_back(next - out.rays_deg[q]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Regular / singular decomposition of the nodal cells

struct NodalDecomposition {
  std::size_t total = 0;
  std::size_t regular = 0;        // farther than the exclusion radius from every singular point
  std::size_t near_singular = 0;
  double exclusion = 0;
  double min_regular_gradient = std::numeric_limits<double>::infinity();  // |df| at regular cell centers
};

inline NodalDecomposition decompose_nodal_cells(const ScalarFunction& f, const Grid& g,
                                                const std::vector<std::vector<double>>& singular,
                                                double exclusion_cells = 3.0) {
  const CellSet zeros = zero_cells(sampled_scalar(g, sample(f, g)));
  double hmax = 0;
  for (int a = 0; a < g.dim(); ++a) hmax = std::max(hmax, g.spacing(a));
  NodalDecomposition out;
  out.total = zeros.cells.size();
  out.exclusion = exclusion_cells * hmax;
  Eigen::VectorXd x(g.dim());
  for (std::size_t c : zeros.cells) {
    const auto ctr = cell_center(g, c);
    bool near = false;
    for (const auto& s : singular) {
      double d2 = 0;
      for (int a = 0; a < g.dim(); ++a) {
        const double d = detail::wrapped_delta(g, a, ctr[a] - s[a]);
        d2 += d * d;
      }
      near = near || std::sqrt(d2) <= out.exclusion;
    }
    if (near) {
      ++out.near_singular;
      continue;
    }
    ++out.regular;
    for (int a = 0; a < g.dim(); ++a) x(a) = ctr[a];
    out.min_regular_gradient = std::min(out.min_regular_gradient, f.gradient(x).norm());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Multi-level report

struct LevelReport {
  int resolution = 0;  // cells along the first axis
  double spacing = 0;
  std::vector<std::size_t> cells;
  std::vector<Component> components;
};

struct SingularPoint {
  std::vector<double> position;
  std::optional<CrossingAngles> angles;
};

/// Box dimension estimates the upper box-counting dimension only; it does not
/// certify rectifiability of the zero set.
struct NodalSetReport {
  std::vector<LevelReport> levels;               // coarse to fine
  std::vector<BoxCount> box_counts;              // finest level, coarsened
  std::optional<DimensionFit> dimension;         // absent when fewer than 4 scales or the set is empty
  std::optional<DiscretenessResult> discreteness;  // present with 3 or more levels
  std::optional<int> nodal_domains;              // scalar fields
  std::vector<SingularPoint> singular_points;    // filled by callers for 2D eigenfunctions
};

inline NodalSetReport analyze_nodal_set(const std::vector<SampledField>& levels, const ZeroCellOptions& opts = {}) {
  if (levels.empty()) throw PreconditionError("analyze_nodal_set: no levels");
  NodalSetReport out;
  std::vector<CellSet> sets;
  for (const auto& f : levels) {
    sets.push_back(zero_cells(f, opts));
    LevelReport lr;
    lr.resolution = f.grid.cells(0);
    lr.spacing = f.grid.spacing(0);
    lr.cells = sets.back().cells;
    lr.components = components(sets.back());
    out.levels.push_back(std::move(lr));
  }
  out.box_counts = box_counts(sets.back());
  bool nonempty = !out.box_counts.empty() && out.box_counts.front().count > 0;
  if (nonempty && out.box_counts.size() >= 4) out.dimension = box_dimension(out.box_counts);
  if (levels.size() >= 3) out.discreteness = discreteness_check(sets);
  if (levels.back().scalar() && sets.back().cells.size() < levels.back().grid.cell_count())
    out.nodal_domains = nodal_domains(levels.back());
  return out;
}

// ---------------------------------------------------------------------------
// CSV export

inline void write_boxcounts_csv(const std::string& path, const std::vector<BoxCount>& counts) {
  std::ofstream os(path);
  if (!os) throw ConfigError("write_boxcounts_csv: cannot open " + path);
  os.precision(17);
  os << "level,epsilon,count\n";
  for (const auto& c : counts) os << c.level << ',' << c.epsilon << ',' << c.count << '\n';
}

/// Cell centers of the flagged cells with the norm of the corner-mean field value.
inline void write_nodal_cells_csv(const std::string& path, const CellSet& set, const SampledField& field) {
  std::ofstream os(path);
  if (!os) throw ConfigError("write_nodal_cells_csv: cannot open " + path);
  os.precision(17);
  const Grid& g = set.grid;
  const int n = g.dim();
  detail::write_coords_header(os, n);
  os << ",norm\n";
  int idx[3];
  const unsigned corners = 1u << n;
  for (std::size_t c : set.cells) {
    const auto p = cell_center(g, c);
    detail::cell_unravel(g, c, idx);
    double s = 0;
    for (const auto& comp : field.comps) {
      double v = 0;
      for (unsigned b = 0; b < corners; ++b) v += comp[detail::corner_node(g, idx, b)];
      v /= corners;
      s += v * v;
    }
    for (int a = 0; a < n; ++a) os << (a ? "," : "") << p[a];
    os << ',' << std::sqrt(s) << '\n';
  }
}

inline void write_singular_points_csv(const std::string& path, const std::vector<SingularPoint>& points, int dim) {
  std::ofstream os(path);
  if (!os) throw ConfigError("write_singular_points_csv: cannot open " + path);
  os.precision(17);
  os << "id,";
  detail::write_coords_header(os, dim);
  os << ",order,min_gap_deg,max_gap_deg\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    os << i;
    for (double v : points[i].position) os << ',' << v;
    if (points[i].angles && !points[i].angles->gaps_deg.empty()) {
      const auto& g = points[i].angles->gaps_deg;
      os << ',' << points[i].angles->order << ',' << *std::min_element(g.begin(), g.end()) << ','
         << *std::max_element(g.begin(), g.end()) << '\n';
    } else {
      os << ",,,\n";
    }
  }
}

}  // namespace nodallab

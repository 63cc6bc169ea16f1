#pragma once

// Sampled sections on flat tori and boxes, spectral Dirac / d + delta /
// Laplace operators, and a registry of closed-form example fields.

#include <fftw3.h>

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nodallab/clifford.hpp"
#include "nodallab/error.hpp"

namespace nodallab {

using cplx = std::complex<double>;

inline bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

/// Axis-aligned sample lattice.  Node i on axis a sits at origin(a) + i * spacing(a).
/// A periodic grid has nodes() cells per axis (the last wraps to the first);
/// a bounded grid has nodes() - 1.  Storage is row-major, last axis fastest.
class Grid {
 public:
  /// Flat torus prod [offset_a, offset_a + L_a), res nodes per axis (power of two, >= 8).
  /// Offsets default to spacing * (sqrt 2 - 1) so analytic zeros avoid nodes.
  static Grid torus(const std::vector<double>& periods, int res, std::optional<std::vector<double>> offset = {}) {
    const int n = static_cast<int>(periods.size());
    if (n < 1 || n > 3) throw PreconditionError("Grid::torus: dimension must be 1, 2 or 3");
    if (!is_power_of_two(res) || res < 8) throw PreconditionError("Grid::torus: resolution must be a power of two >= 8");
    if (offset && static_cast<int>(offset->size()) != n) throw DimensionMismatch("Grid::torus: offset length");
    Grid g;
    g.periodic_ = true;
    for (int a = 0; a < n; ++a) {
      if (!(periods[a] > 0)) throw PreconditionError("Grid::torus: periods must be positive");
      const double h = periods[a] / res;
      const double off = offset ? (*offset)[a] : h * (std::numbers::sqrt2 - 1.0);
      if (off < 0 || off >= h) throw PreconditionError("Grid::torus: offset must lie in [0, spacing)");
      g.axes_.push_back({off, h, res, periods[a]});
    }
    return g;
  }

  /// Closed box [lo, hi] sampled with res cells (res + 1 nodes) per axis,
  /// every node shifted by the offset (default spacing * (sqrt 2 - 1)).
  static Grid box(const std::vector<double>& lo, const std::vector<double>& hi, int res,
                  std::optional<std::vector<double>> offset = {}) {
    const int n = static_cast<int>(lo.size());
    if (n < 1 || n > 3 || hi.size() != lo.size()) throw DimensionMismatch("Grid::box: bad corner vectors");
    if (res < 8) throw PreconditionError("Grid::box: resolution must be >= 8");
    if (offset && static_cast<int>(offset->size()) != n) throw DimensionMismatch("Grid::box: offset length");
    Grid g;
    g.periodic_ = false;
    for (int a = 0; a < n; ++a) {
      if (!(hi[a] > lo[a])) throw PreconditionError("Grid::box: empty extent");
      const double h = (hi[a] - lo[a]) / res;
      const double off = offset ? (*offset)[a] : h * (std::numbers::sqrt2 - 1.0);
      if (off < 0 || off >= h) throw PreconditionError("Grid::box: offset must lie in [0, spacing)");
      g.axes_.push_back({lo[a] + off, h, res + 1, hi[a] - lo[a]});
    }
    return g;
  }

  /// Nodes at cell centers of a res^n partition of [lo, hi]; boundary values
  /// (e.g. Dirichlet zeros) are never sampled.
  static Grid cell_centered(const std::vector<double>& lo, const std::vector<double>& hi, int res) {
    const int n = static_cast<int>(lo.size());
    if (n < 1 || n > 3 || hi.size() != lo.size()) throw DimensionMismatch("Grid::cell_centered: bad corner vectors");
    if (res < 8) throw PreconditionError("Grid::cell_centered: resolution must be >= 8");
    Grid g;
    g.periodic_ = false;
    for (int a = 0; a < n; ++a) {
      const double h = (hi[a] - lo[a]) / res;
      g.axes_.push_back({lo[a] + 0.5 * h, h, res, hi[a] - lo[a]});
    }
    return g;
  }

  int dim() const { return static_cast<int>(axes_.size()); }
  bool periodic() const { return periodic_; }
  int nodes(int a) const { return axes_[a].nodes; }
  int cells(int a) const { return periodic_ ? axes_[a].nodes : axes_[a].nodes - 1; }
  double spacing(int a) const { return axes_[a].h; }
  double origin(int a) const { return axes_[a].origin; }
  double extent(int a) const { return axes_[a].extent; }
  double coord(int a, int i) const { return axes_[a].origin + i * axes_[a].h; }
  double cell_volume() const {
    double v = 1.0;
    for (const auto& ax : axes_) v *= ax.h;
    return v;
  }
  std::vector<int> node_shape() const {
    std::vector<int> s;
    for (const auto& ax : axes_) s.push_back(ax.nodes);
    return s;
  }
  std::vector<int> cell_shape() const {
    std::vector<int> s;
    for (int a = 0; a < dim(); ++a) s.push_back(cells(a));
    return s;
  }
  std::size_t node_count() const {
    std::size_t c = 1;
    for (const auto& ax : axes_) c *= static_cast<std::size_t>(ax.nodes);
    return c;
  }
  std::size_t cell_count() const {
    std::size_t c = 1;
    for (int a = 0; a < dim(); ++a) c *= static_cast<std::size_t>(cells(a));
    return c;
  }
  std::size_t node_index(const int* idx) const {
    std::size_t k = 0;
    for (int a = 0; a < dim(); ++a) k = k * axes_[a].nodes + idx[a];
    return k;
  }
  void node_unravel(std::size_t k, int* idx) const {
    for (int a = dim() - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(k % axes_[a].nodes);
      k /= axes_[a].nodes;
    }
  }
  std::vector<double> node_point(std::size_t k) const {
    int idx[3];
    node_unravel(k, idx);
    std::vector<double> p(dim());
    for (int a = 0; a < dim(); ++a) p[a] = coord(a, idx[a]);
    return p;
  }

  /// Angular wavenumber of FFT index i on axis a; zero at the Nyquist index
  /// so that every derivative multiplier vanishes there consistently.
  double wavenumber(int a, int i) const {
    const int n = axes_[a].nodes;
    if (2 * i == n) return 0.0;
    const int m = 2 * i < n ? i : i - n;
    return 2.0 * std::numbers::pi * m / axes_[a].extent;
  }
  bool nyquist(int a, int i) const { return 2 * i == axes_[a].nodes; }

  friend bool operator==(const Grid& x, const Grid& y) {
    if (x.periodic_ != y.periodic_ || x.axes_.size() != y.axes_.size()) return false;
    for (std::size_t a = 0; a < x.axes_.size(); ++a)
      if (x.axes_[a].nodes != y.axes_[a].nodes || x.axes_[a].origin != y.axes_[a].origin ||
          x.axes_[a].h != y.axes_[a].h)
        return false;
    return true;
  }

 private:
  struct Axis {
    double origin;
    double h;
    int nodes;
    double extent;
  };
  std::vector<Axis> axes_;
  bool periodic_ = true;
};

// ---------------------------------------------------------------------------
// FFT

namespace detail {

class FftPlan {
 public:
  explicit FftPlan(const std::vector<int>& dims) : size_(1) {
    for (int d : dims) size_ *= static_cast<std::size_t>(d);
    std::vector<cplx> scratch(size_);
    auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
    alignment_ = fftw_alignment_of(reinterpret_cast<double*>(p));
    const int rank = static_cast<int>(dims.size());
    for (int u = 0; u < 2; ++u) {
      const unsigned flags = FFTW_ESTIMATE | (u ? FFTW_UNALIGNED : 0u);
      forward_[u] = fftw_plan_dft(rank, dims.data(), p, p, FFTW_FORWARD, flags);
      backward_[u] = fftw_plan_dft(rank, dims.data(), p, p, FFTW_BACKWARD, flags);
      if (!forward_[u] || !backward_[u]) throw Error("FftPlan: planning failed");
    }
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  ~FftPlan() {
    for (int u = 0; u < 2; ++u) {
      fftw_destroy_plan(forward_[u]);
      fftw_destroy_plan(backward_[u]);
    }
  }

  void forward(std::vector<cplx>& v) const { run(forward_, v); }
  /// Normalized inverse: backward(forward(v)) == v.
  void backward(std::vector<cplx>& v) const {
    run(backward_, v);
    const double s = 1.0 / static_cast<double>(size_);
    for (auto& z : v) z *= s;
  }

  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }

 private:
  // Plan 0 assumes the planning buffer's SIMD alignment; plan 1 assumes none.
  void run(const fftw_plan* plans, std::vector<cplx>& v) const {
    if (v.size() != size_) throw DimensionMismatch("FftPlan: buffer size mismatch");
    auto* p = reinterpret_cast<fftw_complex*>(v.data());
    const bool aligned = fftw_alignment_of(reinterpret_cast<double*>(p)) == alignment_;
    fftw_execute_dft(plans[aligned ? 0 : 1], p, p);
  }

  std::size_t size_;
  int alignment_ = 0;
  fftw_plan forward_[2] = {nullptr, nullptr};
  fftw_plan backward_[2] = {nullptr, nullptr};
};

// Plans are cached per shape; planning is serialized, execution is reentrant.
inline const FftPlan& plan_for(const std::vector<int>& dims) {
  static std::map<std::vector<int>, std::unique_ptr<FftPlan>> cache;
  std::lock_guard<std::mutex> lock(FftPlan::planner_mutex());
  auto& slot = cache[dims];
  if (!slot) slot = std::make_unique<FftPlan>(dims);
  return *slot;
}

inline void require_periodic(const Grid& g, const char* what) {
  if (!g.periodic()) throw PreconditionError(std::string(what) + ": spectral operators need a periodic grid");
}

// Calls fn(k, xi) for every Fourier index k with its wavevector xi.
template <class Fn>
void for_each_mode(const Grid& g, Fn&& fn) {
  const int n = g.dim();
  std::vector<std::vector<double>> waves(n);
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < g.nodes(a); ++i) waves[a].push_back(g.wavenumber(a, i));
  int idx[3] = {0, 0, 0};
  double xi[3] = {0, 0, 0};
  for (int a = 0; a < n; ++a) xi[a] = waves[a][0];
  const std::size_t total = g.node_count();
  for (std::size_t k = 0; k < total; ++k) {
    fn(k, xi);
    for (int a = n - 1; a >= 0; --a) {
      if (++idx[a] < g.nodes(a)) {
        xi[a] = waves[a][idx[a]];
        break;
      }
      idx[a] = 0;
      xi[a] = waves[a][0];
    }
  }
}

}  // namespace detail

inline std::vector<cplx> fft_forward(const Grid& g, std::vector<cplx> v) {
  detail::require_periodic(g, "fft_forward");
  detail::plan_for(g.node_shape()).forward(v);
  return v;
}

inline std::vector<cplx> fft_backward(const Grid& g, std::vector<cplx> v) {
  detail::require_periodic(g, "fft_backward");
  detail::plan_for(g.node_shape()).backward(v);
  return v;
}

// ---------------------------------------------------------------------------
// Field types

/// Spinor-valued samples: comps[m][node], m < rank.
struct SpinorField {
  Grid grid;
  int rank = 0;
  std::vector<Eigen::MatrixXcd> gammas;  // numeric generators, one per axis
  std::vector<std::vector<cplx>> comps;

  SpinorField() = default;
  SpinorField(const Grid& g, const GammaRep& rep)
      : grid(g), rank(rep.rank), gammas(rep.numeric()), comps(rep.rank, std::vector<cplx>(g.node_count())) {
    if (rep.n != g.dim()) throw DimensionMismatch("SpinorField: rep dimension differs from grid dimension");
  }
  SpinorField zeros_like() const {
    SpinorField s = *this;
    for (auto& c : s.comps) std::fill(c.begin(), c.end(), cplx(0));
    return s;
  }
};

/// Sections of the full exterior bundle: comps[mask] is the coefficient of
/// dx_I with I the set bits of mask.  An empty vector is an identically zero
/// component.
struct FormField {
  Grid grid;
  std::vector<std::vector<cplx>> comps;

  FormField() = default;
  explicit FormField(const Grid& g) : grid(g), comps(std::size_t{1} << g.dim()) {}

  int dim() const { return grid.dim(); }
  std::size_t component_count() const { return comps.size(); }
  bool is_zero_component(std::size_t mask) const { return comps[mask].empty(); }
  std::vector<cplx>& component(std::size_t mask) {
    if (comps[mask].empty()) comps[mask].assign(grid.node_count(), cplx(0));
    return comps[mask];
  }
  /// Restriction to masks with |I| = k.
  FormField degree_part(int k) const {
    FormField out(grid);
    for (std::size_t m = 0; m < comps.size(); ++m)
      if (std::popcount(m) == k) out.comps[m] = comps[m];
    return out;
  }
};

namespace detail {

// Sign of e_j wedge e_I (or contraction) relative to the sorted basis: (-1)^{#I below j}.
inline double wedge_sign(std::size_t mask, int j) {
  return std::popcount(mask & ((std::size_t{1} << j) - 1)) % 2 ? -1.0 : 1.0;
}

inline void check_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw DimensionMismatch(std::string(what) + ": grids differ");
}

inline std::vector<std::vector<cplx>> spectra(const Grid& g, const std::vector<std::vector<cplx>>& comps) {
  std::vector<std::vector<cplx>> out(comps.size());
  for (std::size_t m = 0; m < comps.size(); ++m)
    if (!comps[m].empty()) out[m] = fft_forward(g, comps[m]);
  return out;
}

inline std::vector<std::vector<cplx>> spatial(const Grid& g, std::vector<std::vector<cplx>> comps) {
  for (auto& c : comps)
    if (!c.empty()) c = fft_backward(g, std::move(c));
  return comps;
}

// Applies the form multiplier sum_j i xi_j (wedge_coef * e_j^ + contract_coef * e_j_|).
inline FormField form_multiplier(const FormField& w, double wedge_coef, double contract_coef) {
  detail::require_periodic(w.grid, "form operator");
  const int n = w.dim();
  const auto hat = spectra(w.grid, w.comps);
  std::vector<std::vector<cplx>> out(hat.size());
  struct Term {
    std::size_t src, dst;
    int axis;
    double coef;
  };
  std::vector<Term> terms;
  for (std::size_t src = 0; src < hat.size(); ++src) {
    if (hat[src].empty()) continue;
    for (int j = 0; j < n; ++j) {
      const std::size_t bit = std::size_t{1} << j;
      const double coef = (src & bit) ? contract_coef : wedge_coef;
      if (coef == 0.0) continue;
      terms.push_back({src, src ^ bit, j, coef * wedge_sign(src, j)});
      if (out[src ^ bit].empty()) out[src ^ bit].assign(w.grid.node_count(), cplx(0));
    }
  }
  for_each_mode(w.grid, [&](std::size_t k, const double* xi) {
    for (const Term& t : terms) out[t.dst][k] += cplx(0, t.coef * xi[t.axis]) * hat[t.src][k];
  });
  FormField result(w.grid);
  result.comps = spatial(w.grid, std::move(out));
  return result;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Operators

/// D s = sum_j gamma_j d_j s, as the Fourier multiplier sum_j i xi_j gamma_j.
inline SpinorField dirac_apply(const SpinorField& s) {
  detail::require_periodic(s.grid, "dirac_apply");
  const int n = s.grid.dim();
  const auto hat = detail::spectra(s.grid, s.comps);
  SpinorField out = s.zeros_like();
  auto& oc = out.comps;
  const int rank = s.rank;
  // ig[(j * rank + r) * rank + c] = i gamma_j(r, c)
  std::vector<cplx> ig(static_cast<std::size_t>(n * rank * rank));
  for (int j = 0; j < n; ++j)
    for (int r = 0; r < rank; ++r)
      for (int c = 0; c < rank; ++c) ig[(j * rank + r) * rank + c] = cplx(0, 1) * s.gammas[j](r, c);
  detail::for_each_mode(s.grid, [&](std::size_t k, const double* xi) {
    for (int r = 0; r < rank; ++r) {
      cplx acc = 0;
      for (int j = 0; j < n; ++j) {
        if (xi[j] == 0.0) continue;
        const cplx* row = &ig[(j * rank + r) * rank];
        cplx sum = 0;
        for (int c = 0; c < rank; ++c) sum += row[c] * hat[c][k];
        acc += xi[j] * sum;
      }
      oc[r][k] = acc;
    }
  });
  out.comps = detail::spatial(s.grid, std::move(oc));
  return out;
}

/// Connection Laplacian nabla^* nabla = -sum_j d_j^2 on each spinor component.
inline SpinorField connection_laplacian_apply(const SpinorField& s) {
  detail::require_periodic(s.grid, "connection_laplacian_apply");
  SpinorField out = s;
  for (auto& c : out.comps) {
    c = fft_forward(s.grid, std::move(c));
    detail::for_each_mode(s.grid, [&](std::size_t k, const double* xi) {
      double q = 0;
      for (int a = 0; a < s.grid.dim(); ++a) q += xi[a] * xi[a];
      c[k] *= q;
    });
    c = fft_backward(s.grid, std::move(c));
  }
  return out;
}

/// Spectral gradient of a scalar sample vector.
inline std::vector<std::vector<cplx>> gradient(const Grid& g, const std::vector<cplx>& f) {
  detail::require_periodic(g, "gradient");
  const auto hat = fft_forward(g, f);
  std::vector<std::vector<cplx>> out(g.dim(), std::vector<cplx>(g.node_count()));
  detail::for_each_mode(g, [&](std::size_t k, const double* xi) {
    for (int a = 0; a < g.dim(); ++a) out[a][k] = cplx(0, xi[a]) * hat[k];
  });
  for (auto& c : out) c = fft_backward(g, std::move(c));
  return out;
}

/// Pointwise Clifford multiplication by the vector field v (v[a][node]).
inline SpinorField clifford_multiply(const std::vector<std::vector<cplx>>& v, const SpinorField& s) {
  if (static_cast<int>(v.size()) != s.grid.dim()) throw DimensionMismatch("clifford_multiply: vector field dimension");
  SpinorField out = s.zeros_like();
  const std::size_t total = s.grid.node_count();
  for (std::size_t k = 0; k < total; ++k)
    for (int r = 0; r < s.rank; ++r) {
      cplx acc = 0;
      for (int a = 0; a < s.grid.dim(); ++a)
        for (int c = 0; c < s.rank; ++c) acc += v[a][k] * s.gammas[a](r, c) * s.comps[c][k];
      out.comps[r][k] = acc;
    }
  return out;
}

/// Pointwise product f s.
inline SpinorField scalar_multiply(const std::vector<cplx>& f, const SpinorField& s) {
  SpinorField out = s;
  for (auto& c : out.comps)
    for (std::size_t k = 0; k < c.size(); ++k) c[k] *= f[k];
  return out;
}

inline FormField d_apply(const FormField& w) { return detail::form_multiplier(w, 1.0, 0.0); }
inline FormField delta_apply(const FormField& w) { return detail::form_multiplier(w, 0.0, -1.0); }
inline FormField d_plus_delta_apply(const FormField& w) { return detail::form_multiplier(w, 1.0, -1.0); }

/// Hodge Laplacian d delta + delta d; on a flat torus the |xi|^2 multiplier componentwise.
inline FormField laplace_apply(const FormField& w) {
  detail::require_periodic(w.grid, "laplace_apply");
  FormField out(w.grid);
  for (std::size_t m = 0; m < w.comps.size(); ++m) {
    if (w.comps[m].empty()) continue;
    auto c = fft_forward(w.grid, w.comps[m]);
    detail::for_each_mode(w.grid, [&](std::size_t k, const double* xi) {
      double q = 0;
      for (int a = 0; a < w.dim(); ++a) q += xi[a] * xi[a];
      c[k] *= q;
    });
    out.comps[m] = fft_backward(w.grid, std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Inner products and norms (L^2 with the grid cell volume).

inline cplx inner(const Grid& g, const std::vector<cplx>& a, const std::vector<cplx>& b) {
  if (a.empty() || b.empty()) return 0;
  cplx acc = 0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * std::conj(b[k]);
  return acc * g.cell_volume();
}

inline cplx inner(const SpinorField& a, const SpinorField& b) {
  cplx acc = 0;
  for (int r = 0; r < a.rank; ++r) acc += inner(a.grid, a.comps[r], b.comps[r]);
  return acc;
}

inline cplx inner(const FormField& a, const FormField& b) {
  cplx acc = 0;
  for (std::size_t m = 0; m < a.comps.size(); ++m) acc += inner(a.grid, a.comps[m], b.comps[m]);
  return acc;
}

template <class F>
double norm(const F& f) {
  return std::sqrt(std::max(0.0, inner(f, f).real()));
}

inline SpinorField operator-(SpinorField a, const SpinorField& b) {
  for (int r = 0; r < a.rank; ++r)
    for (std::size_t k = 0; k < a.comps[r].size(); ++k) a.comps[r][k] -= b.comps[r][k];
  return a;
}

inline SpinorField operator*(SpinorField a, cplx s) {
  for (auto& c : a.comps)
    for (auto& z : c) z *= s;
  return a;
}

inline FormField operator-(const FormField& a, const FormField& b) {
  FormField out(a.grid);
  for (std::size_t m = 0; m < a.comps.size(); ++m) {
    if (a.comps[m].empty() && b.comps[m].empty()) continue;
    auto& c = out.component(m);
    if (!a.comps[m].empty())
      for (std::size_t k = 0; k < c.size(); ++k) c[k] += a.comps[m][k];
    if (!b.comps[m].empty())
      for (std::size_t k = 0; k < c.size(); ++k) c[k] -= b.comps[m][k];
  }
  return out;
}

inline FormField operator*(FormField a, cplx s) {
  for (auto& c : a.comps)
    for (auto& z : c) z *= s;
  return a;
}

// ---------------------------------------------------------------------------
// Random band-limited fields: Fourier support in |m_a| <= band on every axis.

namespace detail {

inline std::vector<cplx> random_band_limited(const Grid& g, int band, std::mt19937_64& rng, bool real_valued) {
  require_periodic(g, "random_band_limited");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<cplx> hat(g.node_count());
  // Per-axis FFT indices with |m| <= band, ascending, so draws follow storage order.
  const int n = g.dim();
  std::vector<int> keep[3];
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < g.nodes(a); ++i) {
      const int m = 2 * i < g.nodes(a) ? i : i - g.nodes(a);
      if (std::abs(m) <= band) keep[a].push_back(i);
    }
  std::size_t pos[3] = {0, 0, 0};
  while (true) {
    int idx[3];
    for (int a = 0; a < n; ++a) idx[a] = keep[a][pos[a]];
    hat[g.node_index(idx)] = cplx(normal(rng), normal(rng));
    int a = n - 1;
    for (; a >= 0; --a) {
      if (++pos[a] < keep[a].size()) break;
      pos[a] = 0;
    }
    if (a < 0) break;
  }
  auto v = fft_backward(g, std::move(hat));
  if (real_valued)
    for (auto& z : v) z = z.real();
  return v;
}

}  // namespace detail

inline SpinorField random_spinor_field(const Grid& g, const GammaRep& rep, int band, std::mt19937_64& rng) {
  SpinorField s(g, rep);
  for (auto& c : s.comps) c = detail::random_band_limited(g, band, rng, false);
  return s;
}

inline FormField random_form_field(const Grid& g, int band, std::mt19937_64& rng) {
  FormField w(g);
  for (auto& c : w.comps) c = detail::random_band_limited(g, band, rng, false);
  return w;
}

inline std::vector<cplx> random_scalar_field(const Grid& g, int band, std::mt19937_64& rng) {
  return detail::random_band_limited(g, band, rng, true);
}

// ---------------------------------------------------------------------------
// Plane-wave Dirac eigenbasis

/// Orthonormal basis of the lambda-eigenspace of D: for each dual-lattice xi
/// with |xi| = |lambda|, the eigenvectors of the Hermitian matrix i gamma(xi)
/// with eigenvalue lambda, times exp(i <xi, x>).
inline std::vector<SpinorField> dirac_plane_eigenbasis(const Grid& g, const GammaRep& rep, double lambda) {
  detail::require_periodic(g, "dirac_plane_eigenbasis");
  if (rep.n != g.dim()) throw DimensionMismatch("dirac_plane_eigenbasis: rep dimension differs from grid");
  const auto gammas = rep.numeric();
  const double target = std::abs(lambda);
  const double tol = 1e-9 * std::max(1.0, target);
  double volume = 1.0;
  for (int a = 0; a < g.dim(); ++a) volume *= g.extent(a);

  std::vector<SpinorField> basis;
  int idx[3];
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    g.node_unravel(k, idx);
    bool skip = false;
    std::vector<double> xi(g.dim());
    double q = 0;
    for (int a = 0; a < g.dim(); ++a) {
      skip = skip || g.nyquist(a, idx[a]);
      xi[a] = g.wavenumber(a, idx[a]);
      q += xi[a] * xi[a];
    }
    if (skip || std::abs(std::sqrt(q) - target) > tol) continue;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(rep.rank, rep.rank);
    for (int a = 0; a < g.dim(); ++a) h += cplx(0, xi[a]) * gammas[a];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h);
    for (int e = 0; e < rep.rank; ++e) {
      if (std::abs(eig.eigenvalues()(e) - lambda) > tol) continue;
      const Eigen::VectorXcd sigma = eig.eigenvectors().col(e);
      SpinorField s(g, rep);
      const double scale = 1.0 / std::sqrt(volume);
      for (std::size_t node = 0; node < g.node_count(); ++node) {
        const auto x = g.node_point(node);
        double phase = 0;
        for (int a = 0; a < g.dim(); ++a) phase += xi[a] * x[a];
        const cplx wave = std::polar(scale, phase);
        for (int r = 0; r < rep.rank; ++r) s.comps[r][node] = sigma(r) * wave;
      }
      basis.push_back(std::move(s));
    }
  }
  if (basis.empty()) throw PreconditionError("dirac_plane_eigenbasis: eigenvalue not realized on the dual lattice");
  return basis;
}

// ---------------------------------------------------------------------------
// Scalar functions with derivatives

/// A real function with analytic gradient and Hessian.
struct ScalarFunction {
  int dim = 0;
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hessian;
};

/// Trigonometric interpolant of real samples on a periodic grid (Nyquist
/// modes dropped, coefficients below 1e-13 of the largest dropped).
inline ScalarFunction trig_interpolant(const Grid& g, const std::vector<double>& samples) {
  detail::require_periodic(g, "trig_interpolant");
  std::vector<cplx> v(samples.begin(), samples.end());
  const auto hat = fft_forward(g, v);
  double biggest = 0;
  for (const auto& z : hat) biggest = std::max(biggest, std::abs(z));
  struct Mode {
    Eigen::VectorXd xi;
    cplx c;
  };
  auto modes = std::make_shared<std::vector<Mode>>();
  int idx[3];
  const double inv_n = 1.0 / static_cast<double>(g.node_count());
  for (std::size_t k = 0; k < hat.size(); ++k) {
    if (std::abs(hat[k]) <= 1e-13 * biggest) continue;
    g.node_unravel(k, idx);
    bool nyq = false;
    Eigen::VectorXd xi(g.dim());
    for (int a = 0; a < g.dim(); ++a) {
      nyq = nyq || g.nyquist(a, idx[a]);
      xi(a) = g.wavenumber(a, idx[a]);
    }
    if (nyq) continue;
    modes->push_back({xi, hat[k] * inv_n});
  }
  Eigen::VectorXd origin(g.dim());
  for (int a = 0; a < g.dim(); ++a) origin(a) = g.origin(a);

  ScalarFunction f;
  f.dim = g.dim();
  f.value = [modes, origin](const Eigen::VectorXd& x) {
    double s = 0;
    for (const auto& m : *modes) s += (m.c * std::polar(1.0, m.xi.dot(x - origin))).real();
    return s;
  };
  f.gradient = [modes, origin](const Eigen::VectorXd& x) {
    Eigen::VectorXd gr = Eigen::VectorXd::Zero(x.size());
    for (const auto& m : *modes) gr += (cplx(0, 1) * m.c * std::polar(1.0, m.xi.dot(x - origin))).real() * m.xi;
    return gr;
  };
  f.hessian = [modes, origin](const Eigen::VectorXd& x) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(x.size(), x.size());
    for (const auto& m : *modes) h -= (m.c * std::polar(1.0, m.xi.dot(x - origin))).real() * (m.xi * m.xi.transpose());
    return h;
  };
  return f;
}

inline std::vector<double> sample(const ScalarFunction& f, const Grid& g) {
  if (f.dim != g.dim()) throw DimensionMismatch("sample: function dimension differs from grid");
  std::vector<double> out(g.node_count());
  Eigen::VectorXd x(g.dim());
  int idx[3];
  for (std::size_t k = 0; k < out.size(); ++k) {
    g.node_unravel(k, idx);
    for (int a = 0; a < g.dim(); ++a) x(a) = g.coord(a, idx[a]);
    out[k] = f.value(x);
  }
  return out;
}

/// max |-trace Hess f - lambda f| / max |f| over the grid nodes.
inline double eigen_residual(const ScalarFunction& f, const Grid& g, double lambda) {
  double num = 0, den = 0;
  Eigen::VectorXd x(g.dim());
  int idx[3];
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    g.node_unravel(k, idx);
    for (int a = 0; a < g.dim(); ++a) x(a) = g.coord(a, idx[a]);
    const double v = f.value(x);
    num = std::max(num, std::abs(-f.hessian(x).trace() - lambda * v));
    den = std::max(den, std::abs(v));
  }
  return den > 0 ? num / den : num;
}

// ---------------------------------------------------------------------------
// Mixed eigenforms

struct MixedEigenform {
  std::vector<double> f;
  double lambda = 0;
  FormField omega;  // sqrt(lambda) f + df
  double eigen_residual = 0;  // ||Delta f - lambda f|| / ||f||
};

/// omega = sqrt(lambda) f + df with df computed spectrally.  Requires
/// ||Delta f - lambda f|| / ||f|| < 1e-8 and lambda > 0.
inline MixedEigenform mixed_eigenform(const Grid& g, const std::vector<double>& f, double lambda) {
  detail::require_periodic(g, "mixed_eigenform");
  if (!(lambda > 0)) throw PreconditionError("mixed_eigenform: lambda must be positive");
  if (f.size() != g.node_count()) throw DimensionMismatch("mixed_eigenform: sample count");
  FormField scalar(g);
  scalar.comps[0].assign(f.begin(), f.end());
  const FormField lap = laplace_apply(scalar);
  double num = 0, den = 0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    num += std::norm(lap.comps[0][k] - lambda * f[k]);
    den += f[k] * f[k];
  }
  MixedEigenform out;
  out.f = f;
  out.lambda = lambda;
  out.eigen_residual = den > 0 ? std::sqrt(num / den) : 0.0;
  if (den == 0 || out.eigen_residual >= 1e-8) throw PreconditionError("mixed_eigenform: not an eigenfunction");
  out.omega = d_apply(scalar);
  auto& c0 = out.omega.component(0);
  const double root = std::sqrt(lambda);
  for (std::size_t k = 0; k < f.size(); ++k) c0[k] = root * f[k];
  return out;
}

// ---------------------------------------------------------------------------
// Identity suite

struct IdentityResiduals {
  double leibniz = 0;           // ||D(f s) - f D s - grad f . s|| / ||s||
  double weitzenbock = 0;       // ||D^2 s - nabla^* nabla s|| / ||s||
  double green_dirac = 0;       // |<D s1, s2> - <s1, D s2>| / (||D s1|| ||s2|| + ||s1|| ||D s2||)
  double green_forms = 0;       // the same for d + delta
  double corollary1 = 0;        // |<Delta w, w> - ||(d + delta) w||^2| / ||(d + delta) w||^2
  double d_squared = 0;         // ||d d w|| / ||d w||
  double delta_squared = 0;     // ||delta delta w|| / ||delta w||
  double laplace_square = 0;    // ||Delta w - (d + delta)^2 w|| / ||Delta w||
};

struct IdentitySuiteReport {
  int instances = 0;
  IdentityResiduals max;
  bool pass = false;
};

struct IdentityThresholds {
  double leibniz = 1e-8;
  double weitzenbock = 1e-10;
  double green = 1e-10;
  double corollary1 = 1e-10;
  double algebraic = 1e-12;
};

inline IdentityResiduals identity_residuals(const Grid& g, int band, std::mt19937_64& rng) {
  const GammaRep rep = build_gamma(g.dim());
  IdentityResiduals r;
  const auto f = random_scalar_field(g, band, rng);
  const SpinorField s = random_spinor_field(g, rep, band, rng);
  const SpinorField s2 = random_spinor_field(g, rep, band, rng);

  const SpinorField ds = dirac_apply(s);
  const SpinorField lhs = dirac_apply(scalar_multiply(f, s));
  const SpinorField rhs_rest = clifford_multiply(gradient(g, f), s);
  r.leibniz = norm(lhs - scalar_multiply(f, ds) - rhs_rest) / norm(s);
  r.weitzenbock = norm(dirac_apply(ds) - connection_laplacian_apply(s)) / norm(s);
  const SpinorField ds2 = dirac_apply(s2);
  r.green_dirac = std::abs(inner(ds, s2) - inner(s, ds2)) / (norm(ds) * norm(s2) + norm(s) * norm(ds2));

  const FormField w = random_form_field(g, band, rng);
  const FormField w2 = random_form_field(g, band, rng);
  const FormField dw = d_plus_delta_apply(w);
  const FormField dw2 = d_plus_delta_apply(w2);
  r.green_forms = std::abs(inner(dw, w2) - inner(w, dw2)) / (norm(dw) * norm(w2) + norm(w) * norm(dw2));
  const FormField lap = laplace_apply(w);
  const double dnorm2 = inner(dw, dw).real();
  r.corollary1 = std::abs(inner(lap, w) - dnorm2) / dnorm2;
  const FormField dd = d_apply(w);
  r.d_squared = norm(d_apply(dd)) / norm(dd);
  const FormField de = delta_apply(w);
  r.delta_squared = norm(delta_apply(de)) / norm(de);
  r.laplace_square = norm(lap - d_plus_delta_apply(dw)) / norm(lap);
  return r;
}

/// Leibniz, Weitzenbock (flat, zero curvature term), Green and the
/// <Delta w, w> = ||(d + delta) w||^2 identity on `instances` random
/// band-limited fields on each of T^2 and T^3 at the given resolution.
/// The band is at most res / 4 so pointwise products are alias-free.
inline IdentitySuiteReport operator_identity_suite(std::uint64_t seed, int instances = 20, int res = 64,
                                                   const IdentityThresholds& thr = {}) {
  IdentitySuiteReport rep;
  std::mt19937_64 rng(seed);
  const int band = std::min(6, res / 4);
  for (int dim : {2, 3}) {
    const Grid g = Grid::torus(std::vector<double>(dim, 2 * std::numbers::pi), res);
    for (int i = 0; i < instances; ++i) {
      const auto r = identity_residuals(g, band, rng);
      auto& m = rep.max;
      m.leibniz = std::max(m.leibniz, r.leibniz);
      m.weitzenbock = std::max(m.weitzenbock, r.weitzenbock);
      m.green_dirac = std::max(m.green_dirac, r.green_dirac);
      m.green_forms = std::max(m.green_forms, r.green_forms);
      m.corollary1 = std::max(m.corollary1, r.corollary1);
      m.d_squared = std::max(m.d_squared, r.d_squared);
      m.delta_squared = std::max(m.delta_squared, r.delta_squared);
      m.laplace_square = std::max(m.laplace_square, r.laplace_square);
      ++rep.instances;
    }
  }
  const auto& m = rep.max;
  rep.pass = m.leibniz < thr.leibniz && m.weitzenbock < thr.weitzenbock && m.green_dirac < thr.green &&
             m.green_forms < thr.green && m.corollary1 < thr.corollary1 && m.d_squared < thr.algebraic &&
             m.delta_squared < thr.algebraic && m.laplace_square < thr.algebraic;
  return rep;
}

// ---------------------------------------------------------------------------
// Closed-form example fields

struct LibraryParams {
  int dim = 2;
  int resolution = 64;
  int m = 1;  // first mode index
  int n = 1;  // second mode index (dirichlet_rect)
  int k = 1;  // form degree or polynomial degree
};

struct AnalyticField {
  std::string name;
  FormField form;                          // scalar fields occupy component 0
  bool scalar = false;
  std::optional<double> eigenvalue;        // Delta-eigenvalue when known
  std::optional<int> expected_domains;     // nodal domains when known
  std::string zero_set;                    // description of the known zero set
  std::optional<ScalarFunction> function;  // scalar fields only
};

namespace detail {

inline FormField form_from(const Grid& g, std::size_t mask, const std::function<double(const Eigen::VectorXd&)>& fn) {
  FormField w(g);
  auto& c = w.component(mask);
  Eigen::VectorXd x(g.dim());
  int idx[3];
  for (std::size_t k = 0; k < c.size(); ++k) {
    g.node_unravel(k, idx);
    for (int a = 0; a < g.dim(); ++a) x(a) = g.coord(a, idx[a]);
    c[k] = fn(x);
  }
  return w;
}

inline AnalyticField scalar_field(std::string name, const Grid& g, ScalarFunction f) {
  AnalyticField out;
  out.name = std::move(name);
  out.scalar = true;
  out.form = form_from(g, 0, f.value);
  out.function = std::move(f);
  return out;
}

}  // namespace detail

inline const std::vector<std::string>& analytic_library_names() {
  static const std::vector<std::string> names{"cr_quadratic",      "dirichlet_rect", "harmonic_codim1",
                                              "harmonic_poly",     "torus_cos_product", "torus_eigenform",
                                              "torus_sin"};
  return names;
}

/// Registry of closed-form fields:
///   harmonic_codim1    x1 dx1 ^ ... ^ dxk on [-1, 1]^dim (harmonic, zero set {x1 = 0})
///   torus_eigenform    sin(2 pi m x1) dx1 ^ ... ^ dxk on the unit-period torus
///   dirichlet_rect     sin(m x) sin(n y) on [0, pi]^2, cell-centered samples
///   torus_cos_product  cos x1 cos x2 on the 2 pi torus of dimension dim
///   torus_sin          sin x1 on the 2 pi torus of dimension dim
///   cr_quadratic       (x^2 - y^2 - 1) - 2 x y dx1 ^ dx2 on [-2, 2]^2, from z^2 - 1
///   harmonic_poly      Re (x + i y)^k on [-1, 1]^2
inline AnalyticField analytic_library(const std::string& name, const LibraryParams& p = {}) {
  using Vec = Eigen::VectorXd;
  using Mat = Eigen::MatrixXd;
  const double pi = std::numbers::pi;
  if (name == "harmonic_codim1") {
    if (p.k < 1 || p.k > p.dim) throw ConfigError("harmonic_codim1: need 1 <= k <= dim");
    const Grid g = Grid::box(std::vector<double>(p.dim, -1.0), std::vector<double>(p.dim, 1.0), p.resolution);
    AnalyticField out;
    out.name = name;
    out.form = detail::form_from(g, (std::size_t{1} << p.k) - 1, [](const Vec& x) { return x(0); });
    out.eigenvalue = 0.0;
    out.zero_set = "hyperplane {x1 = 0}";
    return out;
  }
  if (name == "torus_eigenform") {
    if (p.k < 1 || p.k > p.dim) throw ConfigError("torus_eigenform: need 1 <= k <= dim");
    const Grid g = Grid::torus(std::vector<double>(p.dim, 1.0), p.resolution);
    const double w = 2 * pi * p.m;
    AnalyticField out;
    out.name = name;
    out.form = detail::form_from(g, (std::size_t{1} << p.k) - 1, [w](const Vec& x) { return std::sin(w * x(0)); });
    out.eigenvalue = w * w;
    out.zero_set = std::to_string(2 * p.m) + " parallel codimension-1 tori {x1 = j / " + std::to_string(2 * p.m) + "}";
    return out;
  }
  if (name == "dirichlet_rect") {
    if (p.m < 1 || p.n < 1) throw ConfigError("dirichlet_rect: mode indices must be >= 1");
    const Grid g = Grid::cell_centered({0.0, 0.0}, {pi, pi}, p.resolution);
    const double a = p.m, b = p.n;
    ScalarFunction f;
    f.dim = 2;
    f.value = [a, b](const Vec& x) { return std::sin(a * x(0)) * std::sin(b * x(1)); };
    f.gradient = [a, b](const Vec& x) {
      Vec gr(2);
      gr << a * std::cos(a * x(0)) * std::sin(b * x(1)), b * std::sin(a * x(0)) * std::cos(b * x(1));
      return gr;
    };
    f.hessian = [a, b](const Vec& x) {
      Mat h(2, 2);
      const double s0 = std::sin(a * x(0)), c0 = std::cos(a * x(0)), s1 = std::sin(b * x(1)), c1 = std::cos(b * x(1));
      h << -a * a * s0 * s1, a * b * c0 * c1, a * b * c0 * c1, -b * b * s0 * s1;
      return h;
    };
    AnalyticField out = detail::scalar_field(name, g, std::move(f));
    out.eigenvalue = a * a + b * b;
    out.expected_domains = p.m * p.n;
    out.zero_set = "lines x = j pi / m, y = j pi / n";
    return out;
  }
  if (name == "torus_cos_product") {
    if (p.dim < 2) throw ConfigError("torus_cos_product: need dim >= 2");
    const Grid g = Grid::torus(std::vector<double>(p.dim, 2 * pi), p.resolution);
    const int n = p.dim;
    ScalarFunction f;
    f.dim = n;
    f.value = [](const Vec& x) { return std::cos(x(0)) * std::cos(x(1)); };
    f.gradient = [n](const Vec& x) {
      Vec gr = Vec::Zero(n);
      gr(0) = -std::sin(x(0)) * std::cos(x(1));
      gr(1) = -std::cos(x(0)) * std::sin(x(1));
      return gr;
    };
    f.hessian = [n](const Vec& x) {
      Mat h = Mat::Zero(n, n);
      h(0, 0) = h(1, 1) = -std::cos(x(0)) * std::cos(x(1));
      h(0, 1) = h(1, 0) = std::sin(x(0)) * std::sin(x(1));
      return h;
    };
    AnalyticField out = detail::scalar_field(name, g, std::move(f));
    out.eigenvalue = 2.0;
    out.zero_set = "{cos x1 = 0} union {cos x2 = 0}";
    return out;
  }
  if (name == "torus_sin") {
    const Grid g = Grid::torus(std::vector<double>(p.dim, 2 * pi), p.resolution);
    const int n = p.dim;
    ScalarFunction f;
    f.dim = n;
    f.value = [](const Vec& x) { return std::sin(x(0)); };
    f.gradient = [n](const Vec& x) {
      Vec gr = Vec::Zero(n);
      gr(0) = std::cos(x(0));
      return gr;
    };
    f.hessian = [n](const Vec& x) {
      Mat h = Mat::Zero(n, n);
      h(0, 0) = -std::sin(x(0));
      return h;
    };
    AnalyticField out = detail::scalar_field(name, g, std::move(f));
    out.eigenvalue = 1.0;
    out.zero_set = "{x1 = 0} union {x1 = pi}";
    return out;
  }
  if (name == "cr_quadratic") {
    const Grid g = Grid::box({-2.0, -2.0}, {2.0, 2.0}, p.resolution);
    AnalyticField out;
    out.name = name;
    out.form = FormField(g);
    const FormField re = detail::form_from(g, 0, [](const Vec& x) { return x(0) * x(0) - x(1) * x(1) - 1.0; });
    const FormField im = detail::form_from(g, 0, [](const Vec& x) { return -2.0 * x(0) * x(1); });
    // omega = Re f - Im f dx1 ^ dx2 with f = z^2 - 1: (d + delta) omega = 0 is
    // the Cauchy-Riemann system for f.
    out.form.comps[0] = re.comps[0];
    out.form.comps[3] = im.comps[0];
    out.zero_set = "points z = 1 and z = -1";
    return out;
  }
  if (name == "harmonic_poly") {
    if (p.k < 1) throw ConfigError("harmonic_poly: degree must be >= 1");
    const Grid g = Grid::box({-1.0, -1.0}, {1.0, 1.0}, p.resolution);
    const int k = p.k;
    auto power = [k](const Vec& x) { return std::pow(cplx(x(0), x(1)), k); };
    ScalarFunction f;
    f.dim = 2;
    f.value = [power](const Vec& x) { return power(x).real(); };
    f.gradient = [k](const Vec& x) {
      // d/dx Re z^k = Re k z^{k-1}, d/dy Re z^k = -Im k z^{k-1}.
      const cplx d = static_cast<double>(k) * std::pow(cplx(x(0), x(1)), k - 1);
      Vec gr(2);
      gr << d.real(), -d.imag();
      return gr;
    };
    f.hessian = [k](const Vec& x) {
      const cplx d2 = k >= 2 ? static_cast<double>(k * (k - 1)) * std::pow(cplx(x(0), x(1)), k - 2) : cplx(0);
      Mat h(2, 2);
      h << d2.real(), -d2.imag(), -d2.imag(), -d2.real();
      return h;
    };
    AnalyticField out = detail::scalar_field(name, g, std::move(f));
    out.eigenvalue = 0.0;
    out.zero_set = std::to_string(k) + " lines through the origin at equal angles";
    return out;
  }
  throw ConfigError("analytic_library: unknown field '" + name + "'");
}

// ---------------------------------------------------------------------------
// CSV export

namespace detail {

inline void write_coords_header(std::ostream& os, int dim) {
  for (int a = 0; a < dim; ++a) os << (a ? "," : "") << "x" << a + 1;
}

}  // namespace detail

/// Node coordinates followed by re/im of every nonzero component (named by bitmask).
inline void write_csv(const std::string& path, const FormField& w) {
  std::ofstream os(path);
  if (!os) throw ConfigError("write_csv: cannot open " + path);
  os.precision(17);
  detail::write_coords_header(os, w.dim());
  for (std::size_t m = 0; m < w.comps.size(); ++m)
    if (!w.comps[m].empty()) os << ",re_" << m << ",im_" << m;
  os << '\n';
  for (std::size_t k = 0; k < w.grid.node_count(); ++k) {
    const auto x = w.grid.node_point(k);
    for (int a = 0; a < w.dim(); ++a) os << (a ? "," : "") << x[a];
    for (const auto& c : w.comps)
      if (!c.empty()) os << ',' << c[k].real() << ',' << c[k].imag();
    os << '\n';
  }
}

inline void write_csv(const std::string& path, const SpinorField& s) {
  std::ofstream os(path);
  if (!os) throw ConfigError("write_csv: cannot open " + path);
  os.precision(17);
  detail::write_coords_header(os, s.grid.dim());
  for (int r = 0; r < s.rank; ++r) os << ",re_" << r << ",im_" << r;
  os << '\n';
  for (std::size_t k = 0; k < s.grid.node_count(); ++k) {
    const auto x = s.grid.node_point(k);
    for (int a = 0; a < s.grid.dim(); ++a) os << (a ? "," : "") << x[a];
    for (const auto& c : s.comps) os << ',' << c[k].real() << ',' << c[k].imag();
    os << '\n';
  }
}

}  // namespace nodallab

#pragma once

// Experiment registry, INI configuration, and report emission
// (summary.json, CSVs, plot.svg).

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nodallab/clifford.hpp"
#include "nodallab/error.hpp"
#include "nodallab/fields.hpp"
#include "nodallab/nodal.hpp"
#include "nodallab/obstruction.hpp"
#include "nodallab/resultants.hpp"
#include "nodallab/weierstrass.hpp"

namespace nodallab {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Registry

/// Parameters are a flat object of numbers, strings and numeric arrays; every
/// numeric entry is positive.
struct ExperimentSpec {
  std::string id;
  std::string claim;     // what the run demonstrates
  std::string anchor;    // the mathematical statement it is checked against
  std::string expected;  // machine-checked outcome
  json defaults;
};

inline const std::vector<ExperimentSpec>& experiment_registry() {
  static const std::vector<ExperimentSpec> specs{
      {"E1", "Cauchy-Riemann form of z^2 - 1 on [-2, 2]^2 has two isolated zeros",
       "zeros of a (d + delta)-harmonic form in the plane are discrete",
       "discreteness_check true; 2 components within 2 cells of z = +1, -1",
       {{"resolutions", {128, 256, 512}}, {"threshold_constant", 4.0}, {"expected_components", 2},
        {"location_tolerance_cells", 2.0}}},
      {"E2", "Mixed eigenform sqrt(2) f + df, f = cos x1 cos x2, on the flat 2-torus",
       "nodal sets of Dirac-type eigensections on surfaces are discrete",
       "4 components at every level; discreteness_check true; box dimension < 0.3",
       {{"resolutions", {64, 128, 256}}, {"threshold_constant", 4.0}, {"expected_components", 4},
        {"max_dimension", 0.3}, {"max_operator_residual", 1e-10}}},
      {"E3", "The same mixed eigenform on the flat 3-torus vanishes on 4 circles",
       "the codimension-2 dimension bound for nodal sets is attained",
       "4 components on the finest level; box dimension in [0.8, 1.2]",
       {{"resolutions", {32, 64, 128}}, {"threshold_constant", 4.0}, {"expected_components", 4},
        {"dimension_min", 0.8}, {"dimension_max", 1.2}}},
      {"E4", "Harmonic form x1 dx1 on [-1, 1]^3 vanishes on a plane",
       "without compactness a harmonic form may vanish in codimension 1",
       "box dimension in [1.8, 2.2]",
       {{"resolutions", {32, 64, 128}}, {"dimension_min", 1.8}, {"dimension_max", 2.2}}},
      {"E5", "Laplace eigenform sin(2 pi x1) dx1 on the unit 3-torus vanishes on 2 planes",
       "a Laplace eigenform, unlike a (d + delta)-eigenform, may vanish in codimension 1",
       "Laplace eigen-residual < 1e-10; box dimension in [1.8, 2.2]",
       {{"resolutions", {32, 64, 128}}, {"mode", 1}, {"dimension_min", 1.8}, {"dimension_max", 2.2},
        {"max_eigen_residual", 1e-10}}},
      {"E6", "Spectral operator identities, Clifford relations and the harmonic spinor kernel",
       "Leibniz rule, flat Weitzenbock formula, Green formula, <Delta w, w> = |(d + delta) w|^2",
       "all residuals below thresholds; kernel of D on T^2 is the constant spinors with empty zero set",
       {{"resolution", 64}, {"instances", 20}, {"max_leibniz", 1e-8}, {"max_weitzenbock", 1e-10},
        {"max_green", 1e-10}, {"max_corollary", 1e-10}, {"max_algebraic", 1e-12}, {"clifford_max_dim", 4},
        {"kernel_resolution", 64}}},
      {"E7", "Singular points and crossing angles of cos x1 cos x2 on the 2-torus",
       "nodal lines cross at isolated singular points in equiangular configurations",
       "4 singular points within 1e-3; every gap 90 +- 2 degrees; regular nodal cells have |df| >= h",
       {{"resolution", 128}, {"location_tolerance", 1e-3}, {"angle_tolerance_deg", 2.0},
        {"exclusion_cells", 3.0}, {"min_gradient_cells", 1.0}}},
      {"E8", "Nodal domains of Dirichlet eigenfunctions sin(mx) sin(ny) on [0, pi]^2",
       "Courant: the i-th eigenfunction has at most i nodal domains",
       "count = m n and count <= i for the first 10 eigenfunctions",
       {{"resolution", 128}, {"eigenfunctions", 10}}},
      {"E9", "Symbolic suite: preparation, resultants, leading-term obstruction",
       "a nonvanishing resultant of leading terms forces nonvanishing of the full resultant",
       "all exact checks pass on every seeded instance",
       {{"weierstrass_jets", 24}, {"weierstrass_order", 8}, {"homogeneity_max_k", 4}, {"homogeneity_trials", 5},
        {"gcd_pairs", 50}, {"leading_solutions", 25}, {"lowest_order_instances", 10}, {"trials", 100}}},
  };
  return specs;
}

inline const ExperimentSpec& find_experiment(const std::string& id) {
  for (const auto& s : experiment_registry())
    if (s.id == id) return s;
  throw ConfigError("unknown experiment id '" + id + "'");
}

// ---------------------------------------------------------------------------
// Configuration

/// INI file: an optional [general] section with `seed`, and one section per
/// experiment id whose keys override that experiment's defaults.  Arrays are
/// comma-separated.
class Config {
 public:
  Config() = default;

  static Config from_string(const std::string& text) {
    Config c;
    std::istringstream is(text);
    try {
      boost::property_tree::read_ini(is, c.tree_);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    c.validate_sections();
    return c;
  }

  static Config load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path);
    std::stringstream buf;
    buf << is.rdbuf();
    return from_string(buf.str());
  }

  std::optional<std::uint64_t> seed() const {
    const auto v = tree_.get_optional<std::string>("general.seed");
    if (!v) return std::nullopt;
    return static_cast<std::uint64_t>(parse_integer(*v, "general.seed"));
  }

  /// Defaults of the experiment with every configured key replaced.
  json resolve(const ExperimentSpec& spec) const {
    json params = spec.defaults;
    const auto section = tree_.get_child_optional(spec.id);
    if (!section) return params;
    for (const auto& [key, node] : *section) {
      if (!params.contains(key)) throw ConfigError("config: unknown key " + spec.id + "." + key);
      params[key] = parse_like(params[key], node.data(), spec.id + "." + key);
    }
    return params;
  }

 private:
  void validate_sections() const {
    for (const auto& [name, node] : tree_) {
      if (name == "general") {
        for (const auto& [key, v] : node)
          if (key != "seed") throw ConfigError("config: unknown key general." + key);
        continue;
      }
      find_experiment(name);
    }
  }

  static long long parse_integer(const std::string& s, const std::string& where) {
    std::size_t used = 0;
    long long v = 0;
    const std::string t = trim(s);
    try {
      v = std::stoll(t, &used);
    } catch (const std::exception&) {
      throw ConfigError("config: " + where + " expects an integer, got '" + s + "'");
    }
    if (used != t.size()) throw ConfigError("config: " + where + " expects an integer, got '" + s + "'");
    return v;
  }

  static double parse_float(const std::string& s, const std::string& where) {
    std::size_t used = 0;
    double v = 0;
    const std::string t = trim(s);
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      throw ConfigError("config: " + where + " expects a number, got '" + s + "'");
    }
    if (used != t.size()) throw ConfigError("config: " + where + " expects a number, got '" + s + "'");
    return v;
  }

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
  }

  static json parse_like(const json& like, const std::string& text, const std::string& where) {
    if (like.is_array()) {
      json out = json::array();
      std::stringstream ss(text);
      std::string item;
      const bool ints = !like.empty() && like.front().is_number_integer();
      while (std::getline(ss, item, ','))
        out.push_back(ints ? json(parse_integer(item, where)) : json(parse_float(item, where)));
      if (out.empty()) throw ConfigError("config: " + where + " is an empty array");
      return out;
    }
    if (like.is_number_integer()) return parse_integer(text, where);
    if (like.is_number()) return parse_float(text, where);
    return trim(text);
  }

  boost::property_tree::ptree tree_;
};

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<int> resolution;  // finest resolution; multi-level runs use R/4, R/2, R
};

inline constexpr std::uint64_t kDefaultSeed = 20240601;

namespace detail {

inline void check_positive(const json& v, const std::string& where) {
  if (v.is_array()) {
    for (const auto& e : v) check_positive(e, where);
  } else if (v.is_number() && !(v.get<double>() > 0)) {
    throw ConfigError("config: " + where + " must be positive");
  }
}

inline void check_resolution(long long r, const std::string& where) {
  if (r < 8 || r > (1 << 14) || !is_power_of_two(static_cast<int>(r)))
    throw ConfigError("config: " + where + " must be a power of two in [8, 16384]");
}

}  // namespace detail

/// Resolved parameters after config and command-line overrides, validated.
inline json resolve_parameters(const ExperimentSpec& spec, const Config& config, const RunOptions& opts) {
  json params = config.resolve(spec);
  if (opts.resolution) {
    const int r = *opts.resolution;
    if (params.contains("resolutions")) {
      detail::check_resolution(r, "--resolution");
      if (r < 32) throw ConfigError("config: --resolution must be >= 32 for three refinement levels");
      params["resolutions"] = {r / 4, r / 2, r};
    } else if (params.contains("resolution")) {
      params["resolution"] = r;
    }
  }
  for (const auto& [key, v] : params.items()) detail::check_positive(v, spec.id + "." + key);
  if (params.contains("resolutions")) {
    const auto& rs = params["resolutions"];
    for (std::size_t i = 0; i < rs.size(); ++i) {
      if (!rs[i].is_number_integer()) throw ConfigError("config: resolutions must be integers");
      detail::check_resolution(rs[i].get<long long>(), spec.id + ".resolutions");
      if (i > 0 && rs[i].get<long long>() != 2 * rs[i - 1].get<long long>())
        throw ConfigError("config: " + spec.id + ".resolutions must double at every level");
    }
  }
  if (params.contains("resolution")) {
    if (!params["resolution"].is_number_integer()) throw ConfigError("config: resolution must be an integer");
    detail::check_resolution(params["resolution"].get<long long>(), spec.id + ".resolution");
  }
  return params;
}

// ---------------------------------------------------------------------------
// Results

struct Criterion {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct PartResult {
  std::vector<Criterion> criteria;
  json metrics = json::object();

  void check(std::string name, bool pass, std::string detail) {
    criteria.push_back({std::move(name), pass, std::move(detail)});
  }
  bool pass() const {
    return std::all_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.pass; });
  }
};

struct ExperimentResult {
  std::string id;
  std::string claim;
  std::string anchor;
  std::uint64_t seed = 0;
  json params;
  PartResult part;
  // Artifacts for the CSV and SVG outputs.
  std::optional<CellSet> cells;
  std::optional<SampledField> field;
  std::vector<BoxCount> box_counts;
  std::optional<DimensionFit> fit;
  std::vector<SingularPoint> singular_points;
  int dim = 2;

  bool pass() const { return part.pass(); }
};

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

inline json levels_json(const NodalSetReport& r) {
  json out = json::array();
  for (const auto& lv : r.levels) {
    double dmax = 0;
    for (const auto& c : lv.components) dmax = std::max(dmax, c.diameter);
    json comps = json::array();
    for (const auto& c : lv.components) comps.push_back({{"size", c.size}, {"diameter", c.diameter}, {"centroid", c.centroid}});
    out.push_back({{"resolution", lv.resolution},
                   {"spacing", lv.spacing},
                   {"flagged_cells", lv.cells.size()},
                   {"components", lv.components.size()},
                   {"max_diameter", dmax},
                   {"component_list", lv.components.size() <= 16 ? comps : json("omitted")}});
  }
  return out;
}

inline json fit_json(const std::optional<DimensionFit>& fit) {
  if (!fit) return nullptr;
  return {{"dimension", fit->dimension}, {"intercept", fit->intercept}, {"residual", fit->residual},
          {"scales", fit->scales}, {"note", "upper box-counting dimension estimate; not a rectifiability certificate"}};
}

inline void attach_nodal(ExperimentResult& r, const NodalSetReport& report, const SampledField& finest,
                         const ZeroCellOptions& opts) {
  r.cells = zero_cells(finest, opts);
  r.field = finest;
  r.box_counts = report.box_counts;
  r.fit = report.dimension;
  r.dim = finest.grid.dim();
  r.part.metrics["levels"] = levels_json(report);
  json bc = json::array();
  for (const auto& b : report.box_counts) bc.push_back({{"level", b.level}, {"epsilon", b.epsilon}, {"count", b.count}});
  r.part.metrics["box_counts"] = bc;
  r.part.metrics["box_dimension"] = fit_json(report.dimension);
  if (report.discreteness) {
    const auto& d = *report.discreteness;
    r.part.metrics["discreteness"] = {{"discrete", d.discrete}, {"component_counts", d.component_counts},
                                      {"max_diameters", d.max_diameters}, {"shrink_ratios", d.shrink_ratios}};
  }
}

inline std::vector<int> resolutions(const json& params) { return params["resolutions"].get<std::vector<int>>(); }

inline SampledField real_scalar(const AnalyticField& a) {
  std::vector<double> v(a.form.comps[0].size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = a.form.comps[0][k].real();
  return sampled_scalar(a.form.grid, std::move(v));
}

inline double periodic_distance(const std::vector<double>& a, const std::vector<double>& b, double period) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = std::fmod(std::abs(a[i] - b[i]), period);
    d = std::min(d, period - d);
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Checks shared by experiments and the acceptance gate

/// Exact Clifford relations and skew-adjointness for n = 1..max_dim.
inline PartResult check_clifford_relations(int max_dim) {
  PartResult out;
  bool ok = true;
  json ranks = json::array();
  for (int n = 1; n <= max_dim; ++n) {
    const GammaRep rep = build_gamma(n);
    const auto rel = relations_check(rep);
    ok = ok && rel.ok && rel.rank_ok;
    ranks.push_back({{"n", n}, {"rank", rep.rank}, {"exact", rel.ok}});
  }
  out.metrics["clifford"] = ranks;
  out.check("clifford_relations", ok, "exact anticommutation and skew-adjointness for n = 1.." + std::to_string(max_dim));
  return out;
}

inline PartResult check_operator_identities(const json& p, std::uint64_t seed) {
  PartResult out;
  IdentityThresholds thr;
  thr.leibniz = p["max_leibniz"].get<double>();
  thr.weitzenbock = p["max_weitzenbock"].get<double>();
  thr.green = p["max_green"].get<double>();
  thr.corollary1 = p["max_corollary"].get<double>();
  thr.algebraic = p["max_algebraic"].get<double>();
  const auto rep = operator_identity_suite(seed, p["instances"].get<int>(), p["resolution"].get<int>(), thr);
  const auto& m = rep.max;
  out.metrics["identity_instances"] = rep.instances;
  out.metrics["identity_max"] = {{"leibniz", m.leibniz},           {"weitzenbock", m.weitzenbock},
                                 {"green_dirac", m.green_dirac},   {"green_forms", m.green_forms},
                                 {"corollary", m.corollary1},      {"d_squared", m.d_squared},
                                 {"delta_squared", m.delta_squared}, {"laplace_square", m.laplace_square}};
  out.check("leibniz", m.leibniz < thr.leibniz, detail::fmt(m.leibniz) + " < " + detail::fmt(thr.leibniz));
  out.check("weitzenbock", m.weitzenbock < thr.weitzenbock,
            detail::fmt(m.weitzenbock) + " < " + detail::fmt(thr.weitzenbock));
  const double green = std::max(m.green_dirac, m.green_forms);
  out.check("green", green < thr.green, detail::fmt(green) + " < " + detail::fmt(thr.green));
  out.check("laplace_energy", m.corollary1 < thr.corollary1,
            detail::fmt(m.corollary1) + " < " + detail::fmt(thr.corollary1));
  const double alg = std::max({m.d_squared, m.delta_squared, m.laplace_square});
  out.check("algebraic", alg < thr.algebraic, detail::fmt(alg) + " < " + detail::fmt(thr.algebraic));
  return out;
}

/// The lambda = 0 eigenspace of D on the 2pi 2-torus: its dimension, that it
/// consists of constants, and the zero set of a random member.
inline PartResult check_harmonic_spinor_kernel(int res, std::uint64_t seed, SpinorField* sample_out = nullptr) {
  PartResult out;
  const GammaRep rep = build_gamma(2);
  const Grid g = Grid::torus({2 * std::numbers::pi, 2 * std::numbers::pi}, res);
  const auto basis = dirac_plane_eigenbasis(g, rep, 0.0);
  double deviation = 0, dnorm = 0;
  for (const auto& s : basis) {
    dnorm = std::max(dnorm, norm(dirac_apply(s)) / norm(s));
    for (const auto& c : s.comps)
      for (const auto& z : c) deviation = std::max(deviation, std::abs(z - c.front()));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  SpinorField combo = basis.front() * cplx(0);
  for (const auto& b : basis) {
    const cplx w(normal(rng), normal(rng));
    for (int r = 0; r < combo.rank; ++r)
      for (std::size_t k = 0; k < combo.comps[r].size(); ++k) combo.comps[r][k] += w * b.comps[r][k];
  }
  const auto zeros = zero_cells(sampled_from(combo));
  out.metrics["kernel"] = {{"dimension", basis.size()},      {"rank", rep.rank},
                           {"max_constant_deviation", deviation}, {"max_dirac_residual", dnorm},
                           {"zero_cells", zeros.cells.size()}};
  const bool ok = static_cast<int>(basis.size()) == rep.rank && deviation < 1e-12 && dnorm < 1e-12 && zeros.cells.empty();
  out.check("harmonic_spinor_kernel", ok,
            "dimension " + std::to_string(basis.size()) + " (rank " + std::to_string(rep.rank) + "), constant, " +
                std::to_string(zeros.cells.size()) + " zero cells");
  if (sample_out) *sample_out = combo;
  return out;
}

// ---------------------------------------------------------------------------
// Experiments

namespace detail {

inline void run_e1(ExperimentResult& r) {
  const json& p = r.params;
  ZeroCellOptions opts{p["threshold_constant"].get<double>()};
  std::vector<SampledField> levels;
  for (int res : resolutions(p)) {
    LibraryParams lp;
    lp.resolution = res;
    levels.push_back(sampled_from(analytic_library("cr_quadratic", lp).form));
  }
  const auto report = analyze_nodal_set(levels, opts);
  attach_nodal(r, report, levels.back(), opts);
  const auto& comps = report.levels.back().components;
  const int expected = p["expected_components"].get<int>();
  r.part.check("discreteness", report.discreteness->discrete, report.discreteness->discrete ? "true" : "false");
  r.part.check("component_count", static_cast<int>(comps.size()) == expected,
               std::to_string(comps.size()) + " == " + std::to_string(expected));
  const double tol = p["location_tolerance_cells"].get<double>() * levels.back().grid.spacing(0);
  bool plus = false, minus = false;
  double worst = 0;
  for (const auto& c : comps) {
    const double dp = std::hypot(c.centroid[0] - 1.0, c.centroid[1]);
    const double dm = std::hypot(c.centroid[0] + 1.0, c.centroid[1]);
    worst = std::max(worst, std::min(dp, dm));
    plus = plus || dp <= tol;
    minus = minus || dm <= tol;
  }
  r.part.metrics["max_root_distance"] = worst;
  r.part.check("root_locations", plus && minus && worst <= tol, "max distance " + fmt(worst) + " <= " + fmt(tol));
}

inline MixedEigenform cos_product_mixed(int dim, int res) {
  LibraryParams lp;
  lp.dim = dim;
  lp.resolution = res;
  const AnalyticField a = analytic_library("torus_cos_product", lp);
  std::vector<double> f(a.form.comps[0].size());
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = a.form.comps[0][k].real();
  return mixed_eigenform(a.form.grid, f, *a.eigenvalue);
}

inline void run_mixed(ExperimentResult& r, int dim) {
  const json& p = r.params;
  ZeroCellOptions opts{p["threshold_constant"].get<double>()};
  std::vector<SampledField> levels;
  double op_residual = 0;
  for (int res : resolutions(p)) {
    const MixedEigenform me = cos_product_mixed(dim, res);
    const FormField lhs = d_plus_delta_apply(me.omega);
    op_residual = std::max(op_residual, norm(lhs - me.omega * cplx(std::sqrt(me.lambda))) / norm(me.omega));
    levels.push_back(sampled_from(me.omega));
  }
  r.part.metrics["operator_residual"] = op_residual;
  const auto report = analyze_nodal_set(levels, opts);
  attach_nodal(r, report, levels.back(), opts);
  const int expected = p["expected_components"].get<int>();
  const double d = report.dimension ? report.dimension->dimension : std::nan("");
  if (dim == 2) {
    const double tol = p["max_operator_residual"].get<double>();
    r.part.check("mixed_eigenform", op_residual < tol, fmt(op_residual) + " < " + fmt(tol));
    bool all = true;
    std::string counts;
    for (const auto& lv : report.levels) {
      all = all && static_cast<int>(lv.components.size()) == expected;
      counts += (counts.empty() ? "" : ",") + std::to_string(lv.components.size());
    }
    r.part.check("component_count", all, counts + " == " + std::to_string(expected));
    r.part.check("discreteness", report.discreteness->discrete, report.discreteness->discrete ? "true" : "false");
    const double bound = p["max_dimension"].get<double>();
    r.part.check("box_dimension", report.dimension && d < bound, fmt(d) + " < " + fmt(bound));
  } else {
    const auto n = report.levels.back().components.size();
    r.part.check("component_count", static_cast<int>(n) == expected, std::to_string(n) + " == " + std::to_string(expected));
    const double lo = p["dimension_min"].get<double>(), hi = p["dimension_max"].get<double>();
    r.part.check("box_dimension", report.dimension && d >= lo && d <= hi,
                 fmt(d) + " in [" + fmt(lo) + ", " + fmt(hi) + "]");
  }
}

inline void run_codim1(ExperimentResult& r, bool torus) {
  const json& p = r.params;
  std::vector<SampledField> levels;
  double eig = 0;
  for (int res : resolutions(p)) {
    LibraryParams lp;
    lp.dim = 3;
    lp.k = 1;
    lp.resolution = res;
    if (torus) lp.m = p["mode"].get<int>();
    const AnalyticField a = analytic_library(torus ? "torus_eigenform" : "harmonic_codim1", lp);
    if (torus) eig = std::max(eig, norm(laplace_apply(a.form) - a.form * cplx(*a.eigenvalue)) / norm(a.form));
    levels.push_back(sampled_from(a.form));
  }
  const auto report = analyze_nodal_set(levels);
  attach_nodal(r, report, levels.back(), {});
  if (torus) {
    const double tol = p["max_eigen_residual"].get<double>();
    r.part.metrics["eigen_residual"] = eig;
    r.part.check("laplace_eigenform", eig < tol, fmt(eig) + " < " + fmt(tol));
  }
  const double d = report.dimension ? report.dimension->dimension : std::nan("");
  const double lo = p["dimension_min"].get<double>(), hi = p["dimension_max"].get<double>();
  r.part.check("box_dimension", report.dimension && d >= lo && d <= hi, fmt(d) + " in [" + fmt(lo) + ", " + fmt(hi) + "]");
}

inline void merge(ExperimentResult& r, const PartResult& part) {
  for (const auto& c : part.criteria) r.part.criteria.push_back(c);
  for (const auto& [k, v] : part.metrics.items()) r.part.metrics[k] = v;
}

inline void run_e6(ExperimentResult& r) {
  const json& p = r.params;
  merge(r, check_clifford_relations(p["clifford_max_dim"].get<int>()));
  merge(r, check_operator_identities(p, r.seed));
  SpinorField sample;
  merge(r, check_harmonic_spinor_kernel(p["kernel_resolution"].get<int>(), r.seed, &sample));
  r.field = sampled_from(sample);
  r.cells = zero_cells(*r.field);
}

inline void run_e7(ExperimentResult& r) {
  const json& p = r.params;
  LibraryParams lp;
  lp.resolution = p["resolution"].get<int>();
  const AnalyticField a = analytic_library("torus_cos_product", lp);
  const Grid& g = a.form.grid;
  const ScalarFunction& f = *a.function;
  const auto pts = singular_set(f, g, *a.eigenvalue);
  const double pi = std::numbers::pi;
  const std::vector<std::vector<double>> truth{{pi / 2, pi / 2}, {pi / 2, 3 * pi / 2}, {3 * pi / 2, pi / 2},
                                               {3 * pi / 2, 3 * pi / 2}};
  std::vector<int> matched(truth.size(), 0);
  double worst = 0;
  for (const auto& q : pts) {
    std::size_t best = 0;
    double bd = 1e300;
    for (std::size_t t = 0; t < truth.size(); ++t) {
      const double d = periodic_distance(q, truth[t], 2 * pi);
      if (d < bd) {
        bd = d;
        best = t;
      }
    }
    ++matched[best];
    worst = std::max(worst, bd);
  }
  const double tol = p["location_tolerance"].get<double>();
  const bool located = pts.size() == truth.size() && std::all_of(matched.begin(), matched.end(), [](int m) { return m == 1; });
  r.part.metrics["singular_points"] = pts.size();
  r.part.metrics["max_location_error"] = worst;
  r.part.check("singular_points", located && worst < tol,
               std::to_string(pts.size()) + " points, max error " + fmt(worst) + " < " + fmt(tol));

  const double atol = p["angle_tolerance_deg"].get<double>();
  double gap_err = 0;
  bool four = true;
  json angles = json::array();
  for (const auto& q : pts) {
    const auto ca = crossing_angles(f, q);
    four = four && ca.gaps_deg.size() == 4;
    for (double gap : ca.gaps_deg) gap_err = std::max(gap_err, std::abs(gap - 90.0));
    angles.push_back({{"order", ca.order}, {"gaps_deg", ca.gaps_deg}});
    r.singular_points.push_back({q, ca});
  }
  r.part.metrics["crossing_angles"] = angles;
  r.part.check("crossing_angles", four && !pts.empty() && gap_err <= atol,
               "max |gap - 90| = " + fmt(gap_err) + " <= " + fmt(atol));

  const auto dec = decompose_nodal_cells(f, g, pts, p["exclusion_cells"].get<double>());
  const double floor = p["min_gradient_cells"].get<double>() * g.spacing(0);
  r.part.metrics["decomposition"] = {{"nodal_cells", dec.total},
                                     {"regular", dec.regular},
                                     {"near_singular", dec.near_singular},
                                     {"exclusion_radius", dec.exclusion},
                                     {"min_regular_gradient", dec.min_regular_gradient}};
  r.part.check("regular_gradient", dec.regular + dec.near_singular == dec.total && dec.min_regular_gradient >= floor,
               "min |df| " + fmt(dec.min_regular_gradient) + " >= " + fmt(floor));

  const SampledField scalar = real_scalar(a);
  r.cells = zero_cells(scalar);
  r.field = scalar;
  r.box_counts = box_counts(*r.cells);
  if (r.box_counts.size() >= 4) r.fit = box_dimension(r.box_counts);
  r.part.metrics["box_dimension"] = fit_json(r.fit);
}

inline void run_e8(ExperimentResult& r) {
  const json& p = r.params;
  const int count = p["eigenfunctions"].get<int>();
  struct Mode {
    int m, n;
  };
  std::vector<Mode> modes;
  const int span = count + 1;
  for (int m = 1; m <= span; ++m)
    for (int n = 1; n <= span; ++n) modes.push_back({m, n});
  std::sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) {
    const int la = a.m * a.m + a.n * a.n, lb = b.m * b.m + b.n * b.n;
    return la != lb ? la < lb : a.m < b.m;
  });
  modes.resize(count);
  json table = json::array();
  bool exact = true, courant = true;
  for (int i = 0; i < count; ++i) {
    const int lambda = modes[i].m * modes[i].m + modes[i].n * modes[i].n;
    int first = i;
    while (first > 0 && modes[first - 1].m * modes[first - 1].m + modes[first - 1].n * modes[first - 1].n == lambda) --first;
    LibraryParams lp;
    lp.m = modes[i].m;
    lp.n = modes[i].n;
    lp.resolution = p["resolution"].get<int>();
    const AnalyticField a = analytic_library("dirichlet_rect", lp);
    const SampledField s = real_scalar(a);
    const int domains = nodal_domains(s);
    exact = exact && domains == *a.expected_domains;
    courant = courant && domains <= first + 1;
    table.push_back({{"index", i + 1}, {"m", lp.m}, {"n", lp.n}, {"eigenvalue", lambda}, {"domains", domains},
                     {"first_index_of_eigenvalue", first + 1}});
    if (i + 1 == count) {
      r.field = s;
      r.cells = zero_cells(s);
    }
  }
  r.part.metrics["eigenfunctions"] = table;
  r.part.check("domain_counts", exact, "nodal_domains == m n for all " + std::to_string(count));
  r.part.check("courant", courant, "nodal_domains <= index for all " + std::to_string(count));
}

// Random x1-regular jet of exact order k.
inline RationalJet random_regular_jet(int n, int k, int order, std::mt19937_64& rng) {
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
    for (int q = 0; q < d; ++q) ++e[pick(rng)];
    if (e == ek) continue;
    f += RationalJet::monomial(n, order, e, make_rational(coef(rng), 1 + t % 4));
  }
  return f;
}

inline RatPoly random_monic_poly(int k, std::mt19937_64& rng) {
  std::uniform_int_distribution<long> d(-9, 9);
  RatPoly p;
  for (int j = 0; j < k; ++j) p.push_back(make_rational(d(rng), 1 + j));
  p.emplace_back(1);
  return p;
}

// Homogeneous degree-k spinor polynomial in n - 1 variables.
inline SpinorPoly random_seed_spinor(int n, int k, int rank, std::mt19937_64& rng) {
  std::uniform_int_distribution<long> d(-3, 3);
  std::uniform_int_distribution<int> pick(0, n - 2);
  SpinorPoly y0;
  for (int m = 0; m < rank; ++m) {
    GaussianJet c(n - 1, k);
    for (int t = 0; t < 3; ++t) {
      Exponent e(n - 1, 0);
      for (int q = 0; q < k; ++q) ++e[pick(rng)];
      c += GaussianJet::monomial(n - 1, k, e, GaussianRational(Rational(d(rng)), Rational(d(rng))));
    }
    y0.push_back(std::move(c));
  }
  return y0;
}

// Leading solutions with y_k != 0 for k <= 3, n in 2..4.
inline std::vector<LeadingSolution> leading_solution_family(int count, std::mt19937_64& rng, int max_k = 3) {
  std::vector<LeadingSolution> out;
  for (int t = 0; static_cast<int>(out.size()) < count && t < 100 * count; ++t) {
    const int n = 2 + t % 3, k = 1 + (t / 3) % max_k;
    const GammaRep rep = build_gamma(n);
    LeadingSolution ls = build_leading_solution(random_seed_spinor(n, k, rep.rank, rng), rep);
    if (ls.y.empty() || detail::all_zero(ls.y.back())) continue;
    out.push_back(std::move(ls));
  }
  return out;
}

inline void run_e9(ExperimentResult& r) {
  const json& p = r.params;
  std::mt19937_64 rng(r.seed);

  // Preparation round trips.
  const int jets = p["weierstrass_jets"].get<int>(), order = p["weierstrass_order"].get<int>();
  int round_trips = 0;
  for (int t = 0; t < jets; ++t) {
    const int n = 1 + t % 3, k = 1 + t % 4;
    const RationalJet f = random_regular_jet(n, k, order, rng);
    const auto form = prepare(f);
    bool ok = form.k == k && !is_zero(form.v.constant_term()) && form.reexpand() == f;
    for (int j = 0; j < form.k && ok; ++j)
      if (!form.u[j].is_zero()) ok = vanishing_order(form.u[j]).value_or(0) >= form.k - j;
    round_trips += ok;
  }
  r.part.metrics["weierstrass_round_trips"] = {{"passed", round_trips}, {"total", jets}};
  r.part.check("weierstrass_round_trip", round_trips == jets && jets >= 20,
               std::to_string(round_trips) + " / " + std::to_string(jets) + " exact");

  // Weighted homogeneity of the resultant.
  const int max_k = p["homogeneity_max_k"].get<int>(), trials_k = p["homogeneity_trials"].get<int>();
  int homog = 0, homog_total = 0;
  std::uniform_int_distribution<long> small(-5, 5);
  for (int k = 1; k <= max_k; ++k)
    for (int t = 0; t < trials_k; ++t, ++homog_total) {
      const RatPoly f = random_monic_poly(k, rng), g = random_monic_poly(k, rng);
      long num = 0;
      while (num == 0) num = small(rng);
      const Rational lambda = make_rational(num, 1 + t);
      RatPoly fs = f, gs = g;
      for (int j = 0; j < k; ++j) {
        Rational w = 1;
        for (int q = 0; q < k - j; ++q) w *= lambda;
        fs[j] *= w;
        gs[j] *= w;
      }
      Rational lk2 = 1;
      for (int q = 0; q < k * k; ++q) lk2 *= lambda;
      homog += sylvester_resultant(fs, gs) == lk2 * sylvester_resultant(f, g);
    }
  r.part.metrics["homogeneity"] = {{"passed", homog}, {"total", homog_total}};
  r.part.check("resultant_homogeneity", homog == homog_total,
               std::to_string(homog) + " / " + std::to_string(homog_total) + " exact");

  // Resultant vanishes iff the gcd is nonconstant.
  const int pairs = p["gcd_pairs"].get<int>();
  int agree = 0, vanishing = 0;
  std::uniform_int_distribution<int> coin(0, 1);
  for (int t = 0; t < pairs; ++t) {
    RatPoly f = random_monic_poly(1 + t % 3, rng), g = random_monic_poly(1 + (t + 1) % 3, rng);
    if (coin(rng)) {
      const RatPoly shared = random_monic_poly(1, rng);
      f = poly_mul(f, shared);
      g = poly_mul(g, shared);
    }
    const bool zero = is_zero(sylvester_resultant(f, g));
    vanishing += zero;
    agree += zero == (degree(poly_gcd(f, g)) >= 1);
  }
  r.part.metrics["resultant_gcd"] = {{"agree", agree}, {"total", pairs}, {"vanishing", vanishing}};
  r.part.check("resultant_gcd", agree == pairs, std::to_string(agree) + " / " + std::to_string(pairs) + " agree");

  // Nonvanishing leading-term resultants.
  const int count = p["leading_solutions"].get<int>(), trials = p["trials"].get<int>();
  const auto family = leading_solution_family(count, rng);
  int found = 0;
  json witnesses = json::array();
  for (std::size_t i = 0; i < family.size(); ++i) {
    const auto& ls = family[i];
    const auto w = find_nonvanishing_resultant(ls, trials, r.seed + i);
    const bool ok = w && !w->resultant.is_zero() && vanishing_order(w->resultant) == ls.k * ls.k &&
                    w->resultant.degree() == ls.k * ls.k;
    found += ok;
    witnesses.push_back({{"n", ls.n}, {"k", ls.k}, {"found", ok}, {"trial", w ? w->trial : -1}});
  }
  r.part.metrics["leading_resultants"] = {{"found", found}, {"total", count}, {"instances", witnesses}};
  r.part.check("nonvanishing_resultant", found == count && static_cast<int>(family.size()) == count,
               std::to_string(found) + " / " + std::to_string(count) + " certified");

  // Lowest-order part of the prepared-system resultant.
  const int lowest = p["lowest_order_instances"].get<int>();
  const auto small_family = leading_solution_family(lowest, rng);
  int matches = 0;
  json cmp = json::array();
  for (std::size_t i = 0; i < small_family.size(); ++i) {
    const auto& ls = small_family[i];
    const int N = ls.k * ls.k + ls.k;
    const auto c = compare_lowest_order_resultant(ls, N, r.seed + 1000 + i, trials);
    const bool ok = c.agree && c.lowest_part == c.leading_resultant;
    matches += ok;
    cmp.push_back({{"n", ls.n}, {"k", ls.k}, {"order", N}, {"agree", ok}});
  }
  r.part.metrics["lowest_order"] = {{"agree", matches}, {"total", lowest}, {"instances", cmp}};
  r.part.check("lowest_order_resultant", matches == lowest && static_cast<int>(small_family.size()) == lowest,
               std::to_string(matches) + " / " + std::to_string(lowest) + " exact");
}

}  // namespace detail

inline ExperimentResult run_experiment(const std::string& id, const Config& config = {}, const RunOptions& opts = {}) {
  const ExperimentSpec& spec = find_experiment(id);
  ExperimentResult r;
  r.id = spec.id;
  r.claim = spec.claim;
  r.anchor = spec.anchor;
  r.seed = opts.seed.value_or(config.seed().value_or(kDefaultSeed));
  r.params = resolve_parameters(spec, config, opts);
  if (id == "E1") detail::run_e1(r);
  else if (id == "E2") detail::run_mixed(r, 2);
  else if (id == "E3") detail::run_mixed(r, 3);
  else if (id == "E4") detail::run_codim1(r, false);
  else if (id == "E5") detail::run_codim1(r, true);
  else if (id == "E6") detail::run_e6(r);
  else if (id == "E7") detail::run_e7(r);
  else if (id == "E8") detail::run_e8(r);
  else detail::run_e9(r);
  return r;
}

// ---------------------------------------------------------------------------
// Output

inline json summary_json(const ExperimentResult& r) {
  json criteria = json::array();
  for (const auto& c : r.part.criteria) criteria.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  return {{"id", r.id},     {"claim", r.claim},           {"anchor", r.anchor},   {"seed", r.seed},
          {"params", r.params}, {"metrics", r.part.metrics}, {"criteria", criteria}, {"pass", r.pass()}};
}

namespace detail {

inline std::string svg_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

}  // namespace detail

/// Two panels: nodal cell centers (first two coordinates) with singular points,
/// and log N against log(1/epsilon) with the fitted line.
inline void write_svg(const std::string& path, const ExperimentResult& r) {
  std::ofstream os(path);
  if (!os) throw ConfigError("write_svg: cannot open " + path);
  os.precision(6);
  const double W = 360, pad = 30;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"440\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<text x=\"20\" y=\"20\">" << detail::svg_escape(r.id + ": " + r.claim) << " [" << (r.pass() ? "pass" : "fail")
     << "]</text>\n";

  os << "<rect x=\"" << pad << "\" y=\"" << 2 * pad << "\" width=\"" << W << "\" height=\"" << W
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  if (r.cells && r.cells->grid.dim() >= 2) {
    const Grid& g = r.cells->grid;
    const double x0 = g.origin(0), y0 = g.origin(1);
    const double sx = W / (g.cells(0) * g.spacing(0)), sy = W / (g.cells(1) * g.spacing(1));
    auto px = [&](double x) { return pad + (x - x0) * sx; };
    auto py = [&](double y) { return 2 * pad + W - (y - y0) * sy; };
    const std::size_t stride = std::max<std::size_t>(1, r.cells->cells.size() / 20000);
    os << "<g fill=\"steelblue\">\n";
    for (std::size_t i = 0; i < r.cells->cells.size(); i += stride) {
      const auto c = cell_center(g, r.cells->cells[i]);
      os << "<circle cx=\"" << px(c[0]) << "\" cy=\"" << py(c[1]) << "\" r=\"1\"/>\n";
    }
    os << "</g>\n<g fill=\"none\" stroke=\"crimson\">\n";
    for (const auto& s : r.singular_points)
      os << "<circle cx=\"" << px(s.position[0]) << "\" cy=\"" << py(s.position[1]) << "\" r=\"5\"/>\n";
    os << "</g>\n";
  }
  os << "<text x=\"" << pad << "\" y=\"" << 2 * pad + W + 18 << "\">nodal cells (x1, x2)</text>\n";

  const double ox = 2 * pad + W + 20;
  os << "<rect x=\"" << ox << "\" y=\"" << 2 * pad << "\" width=\"" << W << "\" height=\"" << W
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  std::vector<std::pair<double, double>> pts;
  for (const auto& b : r.box_counts)
    if (b.count > 0) pts.push_back({-std::log(b.epsilon), std::log(static_cast<double>(b.count))});
  if (!pts.empty()) {
    double xmin = pts.front().first, xmax = xmin, ymin = pts.front().second, ymax = ymin;
    for (const auto& [x, y] : pts) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
    if (xmax - xmin < 1e-9) xmax = xmin + 1;
    if (ymax - ymin < 1e-9) {
      ymin -= 1;
      ymax += 1;
    }
    auto px = [&](double x) { return ox + 20 + (x - xmin) / (xmax - xmin) * (W - 40); };
    auto py = [&](double y) { return 2 * pad + W - 20 - (y - ymin) / (ymax - ymin) * (W - 40); };
    os << "<g fill=\"black\">\n";
    for (const auto& [x, y] : pts) os << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\"/>\n";
    os << "</g>\n";
    if (r.fit) {
      os << "<polyline fill=\"none\" stroke=\"crimson\" points=\"" << px(xmin) << ',' << py(r.fit->intercept + r.fit->dimension * xmin)
         << ' ' << px(xmax) << ',' << py(r.fit->intercept + r.fit->dimension * xmax) << "\"/>\n";
      os << "<text x=\"" << ox + 10 << "\" y=\"" << 2 * pad + 16 << "\">slope " << r.fit->dimension << "</text>\n";
    }
  }
  os << "<text x=\"" << ox << "\" y=\"" << 2 * pad + W + 18 << "\">log N against log(1/epsilon)</text>\n";
  os << "</svg>\n";
}

/// summary.json, boxcounts.csv, nodal_cells.csv, singular_points.csv, plot.svg.
inline void write_outputs(const ExperimentResult& r, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir);
  {
    std::ofstream os(dir + "/summary.json");
    if (!os) throw ConfigError("cannot write " + dir + "/summary.json");
    os << summary_json(r).dump(2) << '\n';
  }
  write_boxcounts_csv(dir + "/boxcounts.csv", r.box_counts);
  if (r.cells && r.field) {
    write_nodal_cells_csv(dir + "/nodal_cells.csv", *r.cells, *r.field);
  } else {
    std::ofstream os(dir + "/nodal_cells.csv");
    detail::write_coords_header(os, r.dim);
    os << ",norm\n";
  }
  write_singular_points_csv(dir + "/singular_points.csv", r.singular_points, r.dim);
  write_svg(dir + "/plot.svg", r);
}

}  // namespace nodallab

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include "nodallab/fields.hpp"

using namespace nodallab;

namespace {

const double kPi = std::numbers::pi;

Grid torus(int dim, int res) { return Grid::torus(std::vector<double>(dim, 2 * kPi), res); }

double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double m = 0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

double max_abs(const std::vector<cplx>& a) {
  double m = 0;
  for (const auto& z : a) m = std::max(m, std::abs(z));
  return m;
}

FormField scalar_form(const Grid& g, const std::function<double(const std::vector<double>&)>& fn) {
  FormField w(g);
  auto& c = w.component(0);
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = fn(g.node_point(k));
  return w;
}

}  // namespace

TEST(Grid, TorusDefaultsAndValidation) {
  const Grid g = torus(2, 16);
  EXPECT_TRUE(g.periodic());
  EXPECT_EQ(g.node_count(), 256u);
  EXPECT_EQ(g.cell_count(), 256u);
  EXPECT_NEAR(g.origin(0), g.spacing(0) * (std::sqrt(2.0) - 1.0), 1e-15);
  EXPECT_THROW(torus(2, 12), PreconditionError);
  EXPECT_THROW(torus(2, 4), PreconditionError);
  EXPECT_THROW(Grid::torus({1.0, 1.0}, 16, std::vector<double>{0.0, 1.0}), PreconditionError);
  EXPECT_THROW(Grid::torus({1.0, 1.0}, 16, std::vector<double>{0.0}), DimensionMismatch);
}

TEST(Grid, BoxAndCellCentered) {
  const Grid b = Grid::box({-1.0, -1.0}, {1.0, 1.0}, 16);
  EXPECT_FALSE(b.periodic());
  EXPECT_EQ(b.nodes(0), 17);
  EXPECT_EQ(b.cells(0), 16);
  const Grid c = Grid::cell_centered({0.0, 0.0}, {kPi, kPi}, 16);
  EXPECT_EQ(c.nodes(0), 16);
  EXPECT_EQ(c.cells(0), 15);
  EXPECT_NEAR(c.coord(0, 0), kPi / 32, 1e-15);
}

TEST(Fft, RoundTripAllFieldTypes) {
  std::mt19937_64 rng(41);
  for (int dim : {1, 2, 3}) {
    const Grid g = torus(dim, dim == 3 ? 16 : 32);
    const auto f = random_scalar_field(g, 4, rng);
    EXPECT_LT(max_abs_diff(fft_backward(g, fft_forward(g, f)), f), 1e-12 * max_abs(f));
    const FormField w = random_form_field(g, 4, rng);
    for (const auto& c : w.comps) EXPECT_LT(max_abs_diff(fft_backward(g, fft_forward(g, c)), c), 1e-12 * max_abs(c));
    const SpinorField s = random_spinor_field(g, build_gamma(dim), 4, rng);
    for (const auto& c : s.comps) EXPECT_LT(max_abs_diff(fft_backward(g, fft_forward(g, c)), c), 1e-12 * max_abs(c));
  }
}

TEST(Fft, BoxGridRejected) {
  const Grid b = Grid::box({0.0}, {1.0}, 16);
  EXPECT_THROW(fft_forward(b, std::vector<cplx>(17)), PreconditionError);
}

TEST(DiracApply, ConstantSpinorIsParallel) {
  const Grid g = torus(2, 16);
  SpinorField s(g, build_gamma(2));
  for (auto& c : s.comps) std::fill(c.begin(), c.end(), cplx(0.3, -1.2));
  EXPECT_LT(norm(dirac_apply(s)), 1e-13);
}

TEST(DiracApply, PlaneWaveEigenvector) {
  const GammaRep rep = build_gamma(2);
  const auto gam = rep.numeric();
  const Grid g = torus(2, 32);
  const std::vector<double> xi{2.0, -1.0};
  const double mag = std::sqrt(5.0);
  // Oracle: (i gamma(xi) + |xi|) v is a +|xi| eigenvector because (i gamma(xi))^2 = |xi|^2.
  Eigen::MatrixXcd a = cplx(0, xi[0]) * gam[0] + cplx(0, xi[1]) * gam[1];
  Eigen::VectorXcd v(2);
  v << 1.0, 0.0;
  const Eigen::VectorXcd sigma = (a + mag * Eigen::MatrixXcd::Identity(2, 2)) * v;
  SpinorField s(g, rep);
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    const auto x = g.node_point(k);
    const cplx wave = std::polar(1.0, xi[0] * x[0] + xi[1] * x[1]);
    for (int r = 0; r < 2; ++r) s.comps[r][k] = sigma(r) * wave;
  }
  EXPECT_LT(norm(dirac_apply(s) - s * cplx(mag)) / norm(s), 1e-12);
}

TEST(DiracApply, SquareIsLaplacianMultiplier) {
  std::mt19937_64 rng(42);
  for (int dim : {2, 3}) {
    const Grid g = torus(dim, 16);
    const SpinorField s = random_spinor_field(g, build_gamma(dim), 3, rng);
    EXPECT_LT(norm(dirac_apply(dirac_apply(s)) - connection_laplacian_apply(s)) / norm(s), 1e-12);
  }
}

TEST(DiracPlaneEigenbasis, UnitEigenvalueOnT2) {
  const GammaRep rep = build_gamma(2);
  const Grid g = torus(2, 16);
  const auto basis = dirac_plane_eigenbasis(g, rep, 1.0);
  ASSERT_EQ(basis.size(), 4u);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    EXPECT_LT(norm(dirac_apply(basis[i]) - basis[i]) / norm(basis[i]), 1e-10);
    for (std::size_t j = 0; j < basis.size(); ++j)
      EXPECT_LT(std::abs(inner(basis[i], basis[j]) - cplx(i == j ? 1.0 : 0.0)), 1e-10);
  }
}

TEST(DiracPlaneEigenbasis, KernelIsConstantSpinors) {
  const GammaRep rep = build_gamma(2);
  const Grid g = torus(2, 16);
  const auto basis = dirac_plane_eigenbasis(g, rep, 0.0);
  ASSERT_EQ(basis.size(), static_cast<std::size_t>(rep.rank));
  for (const auto& s : basis) {
    EXPECT_LT(norm(dirac_apply(s)), 1e-12);
    for (const auto& c : s.comps)
      for (const auto& z : c) EXPECT_NEAR(std::abs(z - c.front()), 0.0, 1e-14);
  }
}

TEST(DiracPlaneEigenbasis, DimensionCountsAndRandomCombination) {
  std::mt19937_64 rng(43);
  std::normal_distribution<double> normal;
  struct Case {
    int dim;
    double lambda;
    std::size_t expected;
  };
  // Lattice points with |xi| = |lambda| times rank / 2 eigenvectors per point.
  for (const Case& c : {Case{2, std::sqrt(2.0), 4}, Case{3, 1.0, 6}, Case{3, -std::sqrt(3.0), 8}, Case{2, -2.0, 4}}) {
    const GammaRep rep = build_gamma(c.dim);
    const Grid g = torus(c.dim, 16);
    const auto basis = dirac_plane_eigenbasis(g, rep, c.lambda);
    EXPECT_EQ(basis.size(), c.expected);
    SpinorField combo = basis.front() * cplx(0);
    for (const auto& b : basis) {
      const cplx w(normal(rng), normal(rng));
      for (int r = 0; r < combo.rank; ++r)
        for (std::size_t k = 0; k < combo.comps[r].size(); ++k) combo.comps[r][k] += w * b.comps[r][k];
    }
    EXPECT_LT(norm(dirac_apply(combo) - combo * cplx(c.lambda)) / norm(combo), 1e-10);
  }
}

TEST(DiracPlaneEigenbasis, UnrealizedEigenvalueThrows) {
  EXPECT_THROW(dirac_plane_eigenbasis(torus(2, 16), build_gamma(2), 0.5), PreconditionError);
}

TEST(FormOperators, ConstantAndParallelFormsAreHarmonic) {
  const Grid g2 = torus(2, 16);
  FormField c(g2);
  std::fill(c.component(0).begin(), c.component(0).end(), cplx(2.5));
  EXPECT_LT(norm(d_plus_delta_apply(c)), 1e-13);
  EXPECT_LT(norm(laplace_apply(c)), 1e-13);

  const Grid g3 = torus(3, 16);
  FormField p(g3);
  std::fill(p.component(1).begin(), p.component(1).end(), cplx(1.0));
  std::fill(p.component(4).begin(), p.component(4).end(), cplx(-3.0));
  EXPECT_LT(norm(d_plus_delta_apply(p)), 1e-12);
}

TEST(FormOperators, CosProductEigenvalues) {
  const Grid g = torus(2, 32);
  const FormField f = scalar_form(g, [](const std::vector<double>& x) { return std::cos(x[0]) * std::cos(x[1]); });
  EXPECT_LT(norm(laplace_apply(f) - f * cplx(2.0)) / norm(f), 1e-12);
  FormField omega = d_apply(f);
  omega.comps[0] = f.comps[0];
  for (auto& z : omega.comps[0]) z *= std::sqrt(2.0);
  EXPECT_LT(norm(d_plus_delta_apply(omega) - omega * cplx(std::sqrt(2.0))) / norm(omega), 1e-10);
  // Hand-computed df: -sin x1 cos x2 dx1 - cos x1 sin x2 dx2.
  const FormField df = d_apply(f);
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    const auto x = g.node_point(k);
    EXPECT_NEAR(df.comps[1][k].real(), -std::sin(x[0]) * std::cos(x[1]), 1e-12);
    EXPECT_NEAR(df.comps[2][k].real(), -std::cos(x[0]) * std::sin(x[1]), 1e-12);
  }
}

TEST(FormOperators, AlgebraicIdentitiesOnRandomForms) {
  std::mt19937_64 rng(44);
  for (int dim : {1, 2, 3}) {
    const Grid g = torus(dim, 16);
    const FormField w = random_form_field(g, 4, rng);
    const FormField dw = d_apply(w), de = delta_apply(w);
    EXPECT_LT(norm(d_apply(dw)) / norm(dw), 1e-12);
    EXPECT_LT(norm(delta_apply(de)) / norm(de), 1e-12);
    const FormField lap = laplace_apply(w);
    EXPECT_LT(norm(lap - d_plus_delta_apply(d_plus_delta_apply(w))) / norm(lap), 1e-12);
    EXPECT_LT(norm(lap - d_apply(de) - delta_apply(dw)) / norm(lap), 1e-12);
  }
}

TEST(FormOperators, DegreeProjection) {
  std::mt19937_64 rng(45);
  const Grid g = torus(3, 8);
  const FormField w = random_form_field(g, 2, rng);
  const FormField one = w.degree_part(1);
  for (std::size_t m = 0; m < 8; ++m) EXPECT_EQ(one.is_zero_component(m), std::popcount(m) != 1);
}

TEST(MixedEigenform, CosProductOnT2) {
  const Grid g = torus(2, 32);
  const auto field = analytic_library("torus_cos_product", {2, 32});
  const auto f = sample(*field.function, g);
  const auto me = mixed_eigenform(g, f, 2.0);
  EXPECT_LT(norm(d_plus_delta_apply(me.omega) - me.omega * cplx(std::sqrt(2.0))) / norm(me.omega), 1e-10);
  EXPECT_LT(me.eigen_residual, 1e-8);
}

TEST(MixedEigenform, SinHasNoCommonZero) {
  const Grid g = torus(2, 32);
  std::vector<double> f(g.node_count());
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = std::sin(g.node_point(k)[0]);
  const auto me = mixed_eigenform(g, f, 1.0);
  double min_norm = 1e9;
  for (std::size_t k = 0; k < f.size(); ++k) {
    double s = 0;
    for (const auto& c : me.omega.comps)
      if (!c.empty()) s += std::norm(c[k]);
    min_norm = std::min(min_norm, std::sqrt(s));
  }
  // |omega|^2 = sin^2 + cos^2 = 1 everywhere.
  EXPECT_NEAR(min_norm, 1.0, 1e-10);
}

TEST(MixedEigenform, T3ZeroSetIsFourCircles) {
  const Grid g = torus(3, 16);
  const auto field = analytic_library("torus_cos_product", {3, 16});
  const auto me = mixed_eigenform(g, sample(*field.function, g), 2.0);
  EXPECT_TRUE(me.omega.is_zero_component(4) || max_abs(me.omega.comps[4]) < 1e-12);
  // Analytic zeros: omega vanishes on (pi/2 | 3pi/2, pi/2 | 3pi/2, t).
  const auto& fn = *field.function;
  for (double a : {kPi / 2, 3 * kPi / 2})
    for (double b : {kPi / 2, 3 * kPi / 2})
      for (double t : {0.0, 1.0, 4.0}) {
        Eigen::VectorXd x(3);
        x << a, b, t;
        EXPECT_NEAR(fn.value(x), 0.0, 1e-15);
        EXPECT_NEAR(fn.gradient(x).norm(), 0.0, 1e-15);
      }
}

TEST(MixedEigenform, Errors) {
  const Grid g = torus(2, 16);
  std::vector<double> f(g.node_count());
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = std::sin(g.node_point(k)[0]);
  EXPECT_THROW(mixed_eigenform(g, f, 0.0), PreconditionError);
  EXPECT_THROW(mixed_eigenform(g, f, 2.0), PreconditionError);
}

TEST(OperatorIdentitySuite, SmallRunPasses) {
  const auto report = operator_identity_suite(7, 2, 32);
  EXPECT_EQ(report.instances, 4);
  EXPECT_TRUE(report.pass);
  EXPECT_LT(report.max.leibniz, 1e-8);
  EXPECT_LT(report.max.weitzenbock, 1e-10);
  EXPECT_LT(report.max.green_dirac, 1e-10);
  EXPECT_LT(report.max.corollary1, 1e-10);
}

TEST(OperatorIdentitySuite, ConstantFactorLeibniz) {
  const Grid g = torus(2, 32);
  std::mt19937_64 rng(46);
  const SpinorField s = random_spinor_field(g, build_gamma(2), 5, rng);
  const std::vector<cplx> f(g.node_count(), cplx(3.0));
  const SpinorField lhs = dirac_apply(scalar_multiply(f, s));
  const SpinorField grad = clifford_multiply(gradient(g, f), s);
  EXPECT_LT(norm(lhs - scalar_multiply(f, dirac_apply(s)) - grad) / norm(s), 1e-12);
}

TEST(AnalyticLibrary, HarmonicCodim1) {
  const auto field = analytic_library("harmonic_codim1", {3, 16, 1, 1, 1});
  EXPECT_EQ(field.eigenvalue, 0.0);
  const auto& c = field.form.comps[1];
  ASSERT_FALSE(c.empty());
  for (std::size_t m = 0; m < 8; ++m) {
    if (m != 1) {
      EXPECT_TRUE(field.form.is_zero_component(m));
    }
  }
  for (std::size_t k = 0; k < c.size(); k += 37) EXPECT_DOUBLE_EQ(c[k].real(), field.form.grid.node_point(k)[0]);
}

TEST(AnalyticLibrary, TorusEigenformIsEigenform) {
  const auto field = analytic_library("torus_eigenform", {3, 16, 1, 1, 1});
  ASSERT_TRUE(field.eigenvalue.has_value());
  EXPECT_NEAR(*field.eigenvalue, 4 * kPi * kPi, 1e-12);
  const FormField lap = laplace_apply(field.form);
  EXPECT_LT(norm(lap - field.form * cplx(*field.eigenvalue)) / norm(lap), 1e-12);
}

TEST(AnalyticLibrary, DirichletRectMetadata) {
  const auto field = analytic_library("dirichlet_rect", {2, 64, 2, 1, 1});
  EXPECT_EQ(field.eigenvalue, 5.0);
  EXPECT_EQ(field.expected_domains, 2);
  EXPECT_LT(eigen_residual(*field.function, field.form.grid, 5.0), 1e-12);
}

TEST(AnalyticLibrary, CauchyRiemannFieldIsHarmonic) {
  const auto field = analytic_library("cr_quadratic", {2, 16});
  const Grid& g = field.form.grid;
  // (d + delta)(u - v dx1 ^ dx2) = (u_x - v_y) dx1 + (u_y + v_x) dx2 with u, v polynomial.
  for (std::size_t k = 0; k < g.node_count(); k += 11) {
    const auto x = g.node_point(k);
    EXPECT_NEAR(field.form.comps[0][k].real(), x[0] * x[0] - x[1] * x[1] - 1, 1e-14);
    EXPECT_NEAR(field.form.comps[3][k].real(), -2 * x[0] * x[1], 1e-14);
    const double ux = 2 * x[0], uy = -2 * x[1], vx = 2 * x[1], vy = 2 * x[0];
    EXPECT_DOUBLE_EQ(ux - vy, 0.0);
    EXPECT_DOUBLE_EQ(uy + vx, 0.0);
  }
}

TEST(AnalyticLibrary, HarmonicPolyDerivatives) {
  const auto field = analytic_library("harmonic_poly", {2, 16, 1, 1, 3});
  const auto& f = *field.function;
  Eigen::VectorXd x(2);
  x << 0.3, -0.7;
  const double h = 1e-5;
  for (int a = 0; a < 2; ++a) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(2);
    e(a) = h;
    EXPECT_NEAR(f.gradient(x)(a), (f.value(x + e) - f.value(x - e)) / (2 * h), 1e-8);
    EXPECT_NEAR(f.hessian(x).col(a).norm(), ((f.gradient(x + e) - f.gradient(x - e)) / (2 * h)).norm(), 1e-7);
  }
  EXPECT_NEAR(f.hessian(x).trace(), 0.0, 1e-12);
}

TEST(AnalyticLibrary, UnknownNameAndBadParams) {
  EXPECT_THROW(analytic_library("no_such_field"), ConfigError);
  EXPECT_THROW(analytic_library("harmonic_codim1", {2, 16, 1, 1, 3}), ConfigError);
  EXPECT_EQ(analytic_library_names().size(), 7u);
}

TEST(TrigInterpolant, ReproducesBandLimitedFunction) {
  const Grid g = torus(2, 16);
  const auto field = analytic_library("torus_cos_product", {2, 16});
  const auto& exact = *field.function;
  const ScalarFunction interp = trig_interpolant(g, sample(exact, g));
  Eigen::VectorXd x(2);
  x << 0.123, 4.56;
  EXPECT_NEAR(interp.value(x), exact.value(x), 1e-13);
  EXPECT_LT((interp.gradient(x) - exact.gradient(x)).norm(), 1e-12);
  EXPECT_LT((interp.hessian(x) - exact.hessian(x)).norm(), 1e-12);
}

TEST(CsvExport, FormAndSpinor) {
  const Grid g = torus(2, 8);
  std::mt19937_64 rng(47);
  FormField w(g);
  w.comps[0] = random_scalar_field(g, 2, rng);
  const std::string path = ::testing::TempDir() + "nodallab_form.csv";
  write_csv(path, w);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "x1,x2,re_0,im_0");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 64);
  const std::string spath = ::testing::TempDir() + "nodallab_spinor.csv";
  write_csv(spath, random_spinor_field(g, build_gamma(2), 2, rng));
  std::ifstream sin(spath);
  std::getline(sin, header);
  EXPECT_EQ(header, "x1,x2,re_0,im_0,re_1,im_1");
  std::remove(path.c_str());
  std::remove(spath.c_str());
}

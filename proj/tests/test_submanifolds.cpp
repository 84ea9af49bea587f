#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include "test_support.hpp"

using namespace stresslab;
using testing_support::random_points;
using testing_support::v;

namespace {

constexpr double pi = 3.14159265358979323846;

QuadratureConfig quick() {
  QuadratureConfig q;
  q.resolution = 32;
  q.threads = 1;
  return q;
}

// |A|^2 = 4 |F''|^2 / (1 + |F'|^2)^3 for the graph of a holomorphic F in C^2.
double graph_energy(std::complex<double> f1, std::complex<double> f2) {
  return 4.0 * std::norm(f2) / std::pow(1.0 + std::norm(f1), 3);
}

}  // namespace

TEST(Immersion, CatalogSurfacesAreMinimalExceptTheParaboloid) {
  for (const char* id : {"plane", "plane3", "catenoid", "helicoid", "enneper", "cplx-z2", "cplx-z3", "cplx-line", "cplx-z1z2"}) {
    const Immersion imm = make_immersion(id);
    for (const Vec& x : random_points(imm.box(), 10, 3)) EXPECT_LT(induced_geometry_at(imm, x).H.norm(), 1e-9) << id;
  }
  const Immersion par = make_immersion("paraboloid");
  EXPECT_GT(induced_geometry_at(par, v({0.0, 0.0})).H.norm(), 1.0);
}

TEST(Immersion, SecondFundamentalFormClosedForms) {
  const Immersion cat = make_immersion("catenoid");
  for (const Vec& x : random_points(cat.box(), 20, 4))
    EXPECT_NEAR(gauss_map_energy_density(cat, x), 2.0 / std::pow(std::cosh(x[0]), 4), 1e-12);
  const Immersion enn = make_immersion("enneper");
  for (const Vec& x : random_points(enn.box(), 20, 5)) {
    const double q = 1.0 + x.squaredNorm();
    EXPECT_NEAR(gauss_map_energy_density(enn, x), 8.0 / std::pow(q, 4), 1e-12);
  }
  const Immersion hel = make_immersion("helicoid");
  for (const Vec& x : random_points(hel.box(), 20, 6))
    EXPECT_NEAR(gauss_map_energy_density(hel, x), 2.0 / std::pow(1.0 + x[0] * x[0], 2), 1e-12);
  using C = std::complex<double>;
  const Immersion z2 = make_immersion("cplx-z2");
  const Immersion z3 = make_immersion("cplx-z3");
  for (const Vec& x : random_points(z3.box(), 20, 7)) {
    const C z(x[0], x[1]);
    EXPECT_NEAR(gauss_map_energy_density(z2, x), graph_energy(2.0 * z, 2.0), 1e-12);
    EXPECT_NEAR(gauss_map_energy_density(z3, x), graph_energy(3.0 * z * z, 6.0 * z), 1e-12);
  }
  EXPECT_LT(gauss_map_energy_density(make_immersion("cplx-line"), v({1.0, 2.0})), 1e-28);
}

TEST(Immersion, FiniteDifferenceJetsAgree) {
  const Immersion imm = make_immersion("enneper");
  const Immersion fd = imm.finite_difference();
  EXPECT_EQ(fd.jet_mode(), JetMode::finite_difference);
  for (const Vec& x : random_points(imm.box(), 10, 8, 0.3))
    EXPECT_NEAR(gauss_map_energy_density(fd, x), gauss_map_energy_density(imm, x), 1e-5);
}

TEST(Immersion, RhoHessianIdentity) {
  std::mt19937_64 rng(12);
  for (const auto& id : immersion_ids()) {
    const Immersion imm = make_immersion(id);
    int checked = 0;
    for (const Vec& x : random_points(imm.box(), 100, 19, 0.05)) {
      if ((imm.position(x) - imm.base_point()).norm() < 1e-6) continue;
      const Vec X = testing_support::random_unit(imm.dim(), rng);
      const auto chk = extrinsic_rho_hessian_check(imm, x, X);
      EXPECT_LE(chk.residual, 1e-6) << id;
      ++checked;
    }
    EXPECT_GE(checked, 95) << id;
  }
}

TEST(Immersion, ComplexGaussMapEnergy) {
  for (const char* id : {"cplx-z2", "cplx-z3", "cplx-line", "cplx-z1z2"}) {
    const Immersion imm = make_immersion(id);
    for (const Vec& x : random_points(imm.box(), 25, 9, 0.2)) {
      const auto chk = complex_gauss_energy_check(imm, x);
      EXPECT_LE(chk.gap, 1e-6 * std::max(1.0, chk.A_norm_sq)) << id;
      EXPECT_LE(chk.antiholomorphic_defect, 1e-6) << id;
    }
  }
  EXPECT_NEAR(complex_gauss_energy_check(make_immersion("cplx-z2"), v({0.0, 0.0})).dgamma_norm_sq, 16.0, 1e-12);
}

TEST(Immersion, AOdotAIsJInvariantOnComplexCurves) {
  for (const char* id : {"cplx-z2", "cplx-z3", "cplx-z1z2"}) {
    const Chart c = make_chart(std::string("induced:") + id);
    const auto A = make_form("A-form", c);
    for (const Vec& x : random_points(c.box(), 10, 10, 0.2)) {
      EXPECT_LE(j_invariance_defect(A, c, x), 1e-9) << id;
      EXPECT_NEAR(norm_sq(A, c, x), gauss_map_energy_density(make_immersion(id), x),
                  1e-10 * std::max(1.0, norm_sq(A, c, x)));
    }
  }
}

TEST(VolumeRatio, PlaneIsExactlyPi) {
  const auto rep = volume_ratio_scan(make_immersion("plane"), 2.0, geometric_grid(0.5, 6.0, 12), quick());
  ASSERT_EQ(rep.rows.size(), 12u);
  for (const auto& row : rep.rows) EXPECT_NEAR(row.scaled, pi, 1e-3);
  EXPECT_TRUE(rep.constant_within_error);
}

TEST(VolumeRatio, CatenoidIncreasesTowardTwoSheets) {
  const auto rep = volume_ratio_scan(make_immersion("catenoid"), 2.0, geometric_grid(0.5, 6.0, 12), quick());
  EXPECT_TRUE(rep.nondecreasing);
  EXPECT_TRUE(rep.strictly_increasing);
  EXPECT_GT(rep.rows.front().scaled, pi);
  EXPECT_GT(rep.rows.back().scaled, pi);
  EXPECT_LT(rep.rows.back().scaled, 2.0 * pi);
}

TEST(VolumeRatio, ParaboloidIsNotMonotone) {
  const auto rep = volume_ratio_scan(make_immersion("paraboloid"), 2.0, geometric_grid(1.2, 8.0, 8), quick());
  EXPECT_FALSE(rep.nondecreasing);
}

TEST(VolumeRatio, WindowTooSmall) {
  EXPECT_THROW_CODE(volume_ratio_scan(make_immersion("enneper"), 2.0, {50.0}, quick()), ErrorCode::WindowTooSmall);
}

TEST(Bernstein, FlatThreePlaneSatisfiesEverything) {
  BernsteinWindow win;
  win.lo = Vec::Constant(3, -3.0);
  win.hi = Vec::Constant(3, 3.0);
  win.samples_per_axis = 5;
  win.rho_points = 4;
  const auto rep = bernstein_report(make_immersion("plane3"), win, 1.0, quick());
  EXPECT_EQ(rep.delta, 0.0);
  EXPECT_EQ(rep.total_scalar_curvature.value, 0.0);
  EXPECT_TRUE(rep.minimal);
  EXPECT_TRUE(rep.energy_vanishes);
  EXPECT_DOUBLE_EQ(rep.mu1, 1.0);
  EXPECT_DOUBLE_EQ(rep.mu2, 1.0);
  EXPECT_EQ(rep.verdict_i, Verdict::holds_on_window);
  EXPECT_EQ(rep.verdict_ii, Verdict::holds_on_window);
  ASSERT_TRUE(rep.boundary_slack);
  EXPECT_EQ(*rep.boundary_slack, 0.0);
}

TEST(Bernstein, SurfacesAreOutsideTheDimensionRange) {
  BernsteinWindow win;
  win.lo = v({-2.0, -3.14});
  win.hi = v({2.0, 3.14});
  win.samples_per_axis = 9;
  win.rho_points = 4;
  const auto cat = bernstein_report(make_immersion("catenoid"), win, std::nullopt, quick());
  EXPECT_LT(cat.mu2, 0.0);
  EXPECT_GT(cat.delta, 0.0);
  EXPECT_GT(cat.total_scalar_curvature.value, 0.0);
  EXPECT_EQ(cat.verdict_i, Verdict::not_applicable);
  EXPECT_EQ(cat.verdict_ii, Verdict::not_applicable);
  // delta = sup rho |A|; on the catenoid neck rho = |u - (1,0,0)|
  double expect_delta = 0.0;
  const Immersion imm = make_immersion("catenoid");
  for (const Vec& x : window_grid(win.lo, win.hi, win.samples_per_axis))
    expect_delta = std::max(expect_delta, (imm.position(x) - imm.base_point()).norm() * std::sqrt(2.0) /
                                              std::pow(std::cosh(x[0]), 2));
  EXPECT_NEAR(cat.delta, expect_delta, 1e-12);

  BernsteinWindow pw;
  pw.lo = v({-3.0, -3.0});
  pw.hi = v({3.0, 3.0});
  pw.samples_per_axis = 5;
  pw.rho_points = 3;
  const auto plane = bernstein_report(make_immersion("plane"), pw, std::nullopt, quick());
  EXPECT_EQ(plane.delta, 0.0);
  EXPECT_EQ(plane.verdict_ii, Verdict::not_applicable);
  EXPECT_EQ(to_string(plane.verdict_ii), "not-applicable");
}

TEST(Immersion, Failures) {
  const Immersion cat = make_immersion("catenoid");
  EXPECT_THROW_CODE(extrinsic_rho_hessian_check(cat, v({0.0, 0.0}), v({1.0, 0.0})), ErrorCode::BasePointCoincides);
  EXPECT_THROW_CODE(complex_gauss_energy_check(cat, v({0.1, 0.1})), ErrorCode::NotKahlerCatalog);
  EXPECT_THROW_CODE(induced_geometry_at(cat, v({9.0, 0.0})), ErrorCode::OutOfDomain);
  const Immersion folded("folded", 2, 3, CoordinateBox::cube(2, 1.0),
                         [](const Vec& x) { return v({x[0], x[0], 0.0}); });
  EXPECT_THROW_CODE(induced_geometry_at(folded, v({0.1, 0.2})), ErrorCode::DegenerateImmersion);
  EXPECT_THROW_CODE(make_immersion("torus"), ErrorCode::UnknownCatalogId);
  EXPECT_THROW_CODE(cat.with_complex_structure(Mat::Identity(2, 2)), ErrorCode::NoComplexStructure);
}

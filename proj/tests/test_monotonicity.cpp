#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

using namespace stresslab;
using testing_support::v;

namespace {

constexpr double pi = 3.14159265358979323846;

double ball_volume(int m) { return std::pow(pi, 0.5 * m) / std::tgamma(0.5 * m + 1.0); }
double sphere_area(int m) { return m * ball_volume(m); }  // area of the unit sphere in R^m

QuadratureConfig quick(int resolution = 32) {
  QuadratureConfig q;
  q.resolution = resolution;
  q.threads = 1;
  return q;
}

MonotonicityReport rows_report(std::vector<std::pair<double, double>> scaled_err) {
  MonotonicityReport rep;
  double rho = 1.0;
  for (auto [s, e] : scaled_err) rep.rows.push_back({rho++, s, e, s, e});
  classify(rep);
  return rep;
}

}  // namespace

TEST(Quadrature, GaussLegendreIsExactForPolynomials) {
  const GaussRule r = gauss_legendre(8);
  for (int k = 0; k <= 15; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], k);
    EXPECT_NEAR(s, k % 2 ? 0.0 : 2.0 / (k + 1), 1e-14) << k;
  }
}

TEST(Quadrature, BallVolumesAndSphereAreas) {
  for (int m = 2; m <= 5; ++m) {
    const Chart c = flat_chart(m);
    const auto exh = euclidean_exhaustion(m);
    const Estimate vol = region_integral([](const Vec&) { return 1.0; }, exh, c, 1.5, quick(64));
    EXPECT_NEAR(vol.value, ball_volume(m) * std::pow(1.5, m), std::max(vol.error, 1e-12)) << m;
    EXPECT_LT(vol.error, 1e-5);
    // the coarse rule must see the angular error too
    const Estimate rough = region_integral([](const Vec&) { return 1.0; }, exh, c, 1.5, quick(32));
    EXPECT_NEAR(rough.value, ball_volume(m) * std::pow(1.5, m), std::max(rough.error, 1e-12)) << m;
    if (m <= 4) {
      const Estimate area = boundary_scalar_integral([](const Vec&) { return 1.0; }, exh, c, 1.5, quick());
      EXPECT_NEAR(area.value, sphere_area(m) * std::pow(1.5, m - 1), 1e-6 * sphere_area(m)) << m;
    }
  }
}

TEST(Quadrature, EllipsoidVolume) {
  const Vec a = v({1.0, 2.0, 5.0});
  // {Psi < t^2} has semi-axes t sqrt(a_i)
  for (int res : {32, 64, 128}) {
    const Estimate e =
        region_integral([](const Vec&) { return 1.0; }, ellipsoid_exhaustion(a), flat_chart(3), 2.0, quick(res));
    EXPECT_NEAR(e.value, ball_volume(3) * 8.0 * std::sqrt(10.0), e.error) << res;
  }
  const Estimate fine =
      region_integral([](const Vec&) { return 1.0; }, ellipsoid_exhaustion(a), flat_chart(3), 2.0, quick(128));
  EXPECT_LT(fine.error, 1e-5);
}

TEST(Quadrature, ThreadCountDoesNotChangeBits) {
  const Chart c = make_chart("bumpy-R3");
  const auto w = make_form("sum-2form", c);
  QuadratureConfig one = quick(), four = quick();
  four.threads = 4;
  auto dens = [&](const Vec& x) { return norm_sq(w, c, x); };
  const Estimate a = region_integral(dens, euclidean_exhaustion(3), c, 2.0, one);
  const Estimate b = region_integral(dens, euclidean_exhaustion(3), c, 2.0, four);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.error, b.error);
}

TEST(Quadrature, Failures) {
  const Chart r3 = flat_chart(3);
  auto one = [](const Vec&) { return 1.0; };
  EXPECT_THROW_CODE(region_integral(one, euclidean_exhaustion(3), r3, 20.0, quick()), ErrorCode::LevelSetTouchesBoundary);
  EXPECT_THROW_CODE(region_integral(one, euclidean_exhaustion(3), r3, -1.0, quick()), ErrorCode::InvalidArgument);
  QuadratureConfig bad = quick();
  bad.resolution = 4;
  EXPECT_THROW_CODE(region_integral(one, euclidean_exhaustion(3), r3, 1.0, bad), ErrorCode::InvalidArgument);
  // |x|^2 (|x| - 2)^2 rises, falls back to zero at |x| = 2, then rises again
  const ExhaustionFunction wavy(ScalarField::sampled("wavy",
                                                     [](const Vec& x) {
                                                       const double s = x.norm();
                                                       return s * s * (s - 2.0) * (s - 2.0);
                                                     }),
                                Vec::Zero(2));
  EXPECT_THROW_CODE(region_integral(one, wavy, flat_chart(2), std::sqrt(0.5), quick()), ErrorCode::NotStarShaped);
}

TEST(Classify, Verdicts) {
  auto up = rows_report({{1.0, 0.0}, {2.0, 0.0}, {3.0, 0.0}});
  EXPECT_TRUE(up.nondecreasing);
  EXPECT_TRUE(up.strictly_increasing);
  EXPECT_FALSE(up.constant_within_error);
  EXPECT_NEAR(up.slack, 0.5, 1e-15);

  // a dip smaller than 3 (err_i + err_{i+1}) is tolerated
  auto noisy = rows_report({{1.0, 0.01}, {0.95, 0.01}, {1.0, 0.01}});
  EXPECT_TRUE(noisy.nondecreasing);
  EXPECT_FALSE(noisy.strictly_increasing);
  EXPECT_TRUE(noisy.constant_within_error);

  auto down = rows_report({{1.0, 0.001}, {0.9, 0.001}, {1.0, 0.001}});
  EXPECT_FALSE(down.nondecreasing);
  ASSERT_EQ(down.violations.size(), 1u);
  EXPECT_EQ(down.violations[0], 0);

  const auto grid = geometric_grid(1.0, 8.0, 4);
  ASSERT_EQ(grid.size(), 4u);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(grid[static_cast<std::size_t>(i)], std::pow(2.0, i), 1e-14);
  EXPECT_EQ(grid.back(), 8.0);
  EXPECT_THROW_CODE(geometric_grid(0.0, 1.0, 3), ErrorCode::InvalidArgument);
}

TEST(IntegralFormula, FlatMatrixMatchesSphereOracle) {
  // boundary term on the unit sphere: integral of 1/2 - p x1^2 = (1/2 - p/m) |S^{m-1}|
  for (int m : {2, 3}) {
    const Chart c = flat_chart(m);
    for (const char* fid : {"section", "dx1", "dx1^dx2"}) {
      const auto w = make_form(fid, c);
      const auto rep = verify_integral_formula(w, euclidean_exhaustion(m), c, 1.0);
      const double oracle = (0.5 - static_cast<double>(w.degree()) / m) * sphere_area(m);
      EXPECT_TRUE(rep.pass) << fid << " m=" << m << " gap=" << rep.gap << " tol=" << rep.tolerance;
      EXPECT_NEAR(rep.lhs.value, oracle, 1e-6) << fid << " m=" << m;
      EXPECT_NEAR(rep.rhs.value, oracle, 1e-6) << fid << " m=" << m;
    }
  }
}

TEST(IntegralFormula, HoldsOnCurvedChartsAndNonConservedForms) {
  const Chart c = make_chart("bumpy-R3");
  const auto rep = verify_integral_formula(make_form("x2dx1", c), ellipsoid_exhaustion(v({1.0, 2.0, 1.5})), c, 1.2, quick(48));
  EXPECT_TRUE(rep.pass) << rep.gap << " vs " << rep.tolerance;
  EXPECT_LT(rep.relative_gap, 1e-6);
  const Chart pol = make_chart("polar-R2");
  // x1dx1 on polar coordinates is r dr, centered away from the coordinate singularity
  const ExhaustionFunction shifted(
      ScalarField::analytic(
          "shifted", [](const Vec& x) { return (x[0] - 3.0) * (x[0] - 3.0) + x[1] * x[1]; },
          [](const Vec& x) { return v({2.0 * (x[0] - 3.0), 2.0 * x[1]}); },
          [](const Vec&) { return Mat(2.0 * Mat::Identity(2, 2)); }),
      v({3.0, 0.0}));
  const auto rp = verify_integral_formula(make_form("x1dx1", pol), shifted, pol, 1.0, quick(48));
  EXPECT_TRUE(rp.pass) << rp.gap << " vs " << rp.tolerance;
}

TEST(RatioScan, DxOneInR3IsStrictlyIncreasing) {
  const Chart c = flat_chart(3);
  const auto grid = geometric_grid(0.5, 4.0, 8);
  const auto rep = ratio_scan(make_form("dx1", c), euclidean_exhaustion(3), c, 1.0, grid, quick());
  EXPECT_TRUE(rep.strictly_increasing);
  EXPECT_TRUE(rep.nondecreasing);
  EXPECT_GT(rep.slack, 0.0);
  for (const auto& row : rep.rows) EXPECT_NEAR(row.scaled, ball_volume(3) * row.rho * row.rho, 1e-8 * row.rho * row.rho);
}

TEST(RatioScan, VolumeEqualityCase) {
  for (int m : {2, 3, 4}) {
    const Chart c = flat_chart(m);
    const auto rep =
        ratio_scan(make_form("section", c), euclidean_exhaustion(m), c, m, geometric_grid(0.5, 4.0, 6), quick());
    EXPECT_TRUE(rep.constant_within_error) << m;
    EXPECT_TRUE(rep.nondecreasing) << m;
    EXPECT_NEAR(rep.rows.front().scaled, ball_volume(m), 1e-9);
  }
}

TEST(RatioScan, KahlerFormOnC2WithComplexOrder) {
  // kahler form is conserved; the complex growth order of |z|^2 with p = 1 on C^2 is 2
  const Chart c = make_chart("flat-C2");
  const auto rep =
      ratio_scan(make_form("kahler", c), euclidean_exhaustion(4), c, 2.0, geometric_grid(0.5, 4.0, 6), quick());
  EXPECT_TRUE(rep.nondecreasing);
  // |omega|^2 = 2 everywhere: scaled = 2 vol(B^4) rho^2
  for (const auto& row : rep.rows) EXPECT_NEAR(row.scaled, 2.0 * ball_volume(4) * row.rho * row.rho, 1e-7 * row.scaled);
}

TEST(AnnulusScan, BoundaryConditionAndRawValues) {
  const Chart c = flat_chart(3);
  const auto grid = geometric_grid(1.5, 4.0, 6);
  const auto vol = annulus_ratio_scan(make_form("section", c), euclidean_exhaustion(3), c, 1.0, 3.0, grid, quick());
  ASSERT_TRUE(vol.boundary_condition);
  EXPECT_TRUE(vol.boundary_condition->holds);
  EXPECT_NEAR(vol.boundary_condition->min_slack, 0.5, 1e-12);
  for (const auto& row : vol.rows) EXPECT_NEAR(row.raw, ball_volume(3) * (std::pow(row.rho, 3) - 1.0), 1e-8);
  EXPECT_TRUE(vol.nondecreasing);

  const auto two = annulus_ratio_scan(make_form("dx1^dx2", c), euclidean_exhaustion(3), c, 1.0, 1.0, grid, quick());
  EXPECT_FALSE(two.boundary_condition->holds);
  EXPECT_NEAR(two.boundary_condition->min_slack, -0.5, 1e-6);

  EXPECT_THROW_CODE(annulus_ratio_scan(make_form("section", c), euclidean_exhaustion(3), c, 2.0, 3.0, grid, quick()),
                    ErrorCode::InvalidArgument);
  EXPECT_THROW_CODE(ratio_scan(make_form("section", c), euclidean_exhaustion(3), c, 3.0, {2.0, 1.0}, quick()),
                    ErrorCode::InvalidArgument);
}

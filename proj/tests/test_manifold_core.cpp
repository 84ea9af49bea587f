#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

#include "test_support.hpp"

using namespace stresslab;
using testing_support::random_points;
using testing_support::v;

namespace {

Mat random_spd(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = d(rng);
  return a * a.transpose() + 0.5 * Mat::Identity(n, n);
}

ScalarField cubic_field() {
  // f = x y + 0.3 z^3 - 0.5 x^2
  return ScalarField::analytic(
      "cubic", [](const Vec& x) { return x[0] * x[1] + 0.3 * std::pow(x[2], 3) - 0.5 * x[0] * x[0]; },
      [](const Vec& x) { return v({x[1] - x[0], x[0], 0.9 * x[2] * x[2]}); },
      [](const Vec& x) {
        Mat h = Mat::Zero(3, 3);
        h(0, 0) = -1.0;
        h(0, 1) = h(1, 0) = 1.0;
        h(2, 2) = 1.8 * x[2];
        return h;
      });
}

}  // namespace

TEST(Linalg, JacobiMatchesEigenSolver) {
  std::mt19937_64 rng(7);
  for (int n : {1, 2, 3, 5, 8}) {
    const Mat a = random_spd(n, rng) - 2.0 * Mat::Identity(n, n);
    const auto ours = jacobi_eigen(a);
    Eigen::SelfAdjointEigenSolver<Mat> ref(a);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(ours.values[i], ref.eigenvalues()[i], 1e-10);
    const Mat recon = ours.vectors * Vec::Map(ours.values.data(), n).asDiagonal() * ours.vectors.transpose();
    EXPECT_LT((recon - a).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Linalg, GeneralizedEigenvaluesMatchEigen) {
  std::mt19937_64 rng(11);
  for (int n : {2, 3, 4, 6}) {
    const Mat g = random_spd(n, rng);
    Mat h = random_spd(n, rng) - 1.5 * Mat::Identity(n, n);
    const auto ours = generalized_eigenvalues(h, g);
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ref(h, g);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(ours[i], ref.eigenvalues()[i], 1e-9);
  }
}

TEST(Linalg, OrthonormalFrameAndInverse) {
  std::mt19937_64 rng(3);
  const Mat g = random_spd(4, rng);
  const Mat e = orthonormal_frame(g);
  EXPECT_LT((e.transpose() * g * e - Mat::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((spd_inverse(g) * g - Mat::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Linalg, Failures) {
  EXPECT_THROW_CODE(cholesky_lower(Mat(Vec::Map(std::vector<double>{1.0, -1.0}.data(), 2).asDiagonal())),
                    ErrorCode::SingularMetric);
  Mat a(2, 2);
  a << 1.0, 2.0, 2.0, -1.0;
  JacobiOptions opt;
  opt.max_sweeps = 0;
  EXPECT_THROW_CODE(jacobi_eigen(a, opt), ErrorCode::EigenFailure);
}

TEST(Chart, PolarChristoffelSymbols) {
  const Chart c = make_chart("polar-R2");
  for (double r : {0.2, 1.0, 3.5, 9.0}) {
    const Christoffel gam = christoffel_at(c, v({r, 0.4}));
    EXPECT_NEAR(gam(0, 1, 1), -r, 1e-14);
    EXPECT_NEAR(gam(1, 0, 1), 1.0 / r, 1e-14);
    EXPECT_NEAR(gam(1, 1, 0), 1.0 / r, 1e-14);
    EXPECT_NEAR(gam(0, 0, 0), 0.0, 1e-14);
    EXPECT_NEAR(gam(1, 1, 1), 0.0, 1e-14);
  }
}

TEST(Chart, WarpedHyperbolicChristoffelSymbols) {
  const Chart c = make_chart("warped-hyperbolic");
  for (const Vec& x : random_points(c.box(), 20, 5)) {
    const double f = std::sinh(x[0]), fp = std::cosh(x[0]);
    const double s = std::sin(x[1]), co = std::cos(x[1]);
    const Christoffel gam = christoffel_at(c, x);
    const double tol = 1e-9 * std::max(1.0, f * fp);
    EXPECT_NEAR(gam(0, 1, 1), -f * fp, tol);
    EXPECT_NEAR(gam(0, 2, 2), -f * fp * s * s, tol);
    EXPECT_NEAR(gam(1, 0, 1), fp / f, 1e-9);
    EXPECT_NEAR(gam(2, 0, 2), fp / f, 1e-9);
    EXPECT_NEAR(gam(1, 2, 2), -s * co, 1e-12);
    EXPECT_NEAR(gam(2, 1, 2), co / s, 1e-9);
  }
}

TEST(Chart, FlatHessianOfSquaredRadius) {
  const Chart c = flat_chart(4);
  const ScalarField r2 = euclidean_exhaustion(4).psi();
  const auto ev = hessian_spectrum(c, r2, v({0.3, -1.0, 2.0, 0.1}));
  for (double e : ev) EXPECT_NEAR(e, 2.0, 1e-14);
  EXPECT_NEAR(laplace_beltrami_at(c, r2, v({1, 2, 3, 4})), 8.0, 1e-14);
}

TEST(Chart, PolarLaplacianMatchesCartesian) {
  // f = r^2 cos(2 theta) = x^2 - y^2 is harmonic
  const Chart c = make_chart("polar-R2");
  auto f = ScalarField::analytic(
      "harm", [](const Vec& x) { return x[0] * x[0] * std::cos(2 * x[1]); },
      [](const Vec& x) { return v({2 * x[0] * std::cos(2 * x[1]), -2 * x[0] * x[0] * std::sin(2 * x[1])}); },
      [](const Vec& x) {
        Mat h(2, 2);
        h << 2 * std::cos(2 * x[1]), -4 * x[0] * std::sin(2 * x[1]), -4 * x[0] * std::sin(2 * x[1]),
            -4 * x[0] * x[0] * std::cos(2 * x[1]);
        return h;
      });
  for (const Vec& x : random_points(c.box(), 10, 2)) EXPECT_NEAR(laplace_beltrami_at(c, f, x), 0.0, 1e-10);
}

TEST(Chart, HyperbolicHessianOfDistanceIsCoth) {
  const Chart c = make_chart("warped-hyperbolic");
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ang(0.3, 2.8), az(-3.0, 3.0);
  const ScalarField r = radial_field();
  for (int k = 0; k < 50; ++k) {
    const double rad = 0.1 + 9.8 * k / 49.0;
    const Vec x = v({rad, ang(rng), az(rng)});
    const auto ev = hessian_spectrum(c, r, x);
    ASSERT_EQ(ev.size(), 3u);
    const double coth = 1.0 / std::tanh(rad);
    EXPECT_NEAR(ev[0], 0.0, 1e-5) << "r=" << rad;
    EXPECT_NEAR(ev[1], coth, 1e-5) << "r=" << rad;
    EXPECT_NEAR(ev[2], coth, 1e-5) << "r=" << rad;
  }
}

TEST(Chart, FiniteDifferenceJetsTrackAnalyticJets) {
  const Chart c = make_chart("bumpy-R3");
  const Chart cfd = c.finite_difference();
  const ScalarField f = cubic_field();
  const ScalarField ffd = f.finite_difference();
  EXPECT_EQ(cfd.jet_mode(), JetMode::finite_difference);
  EXPECT_EQ(ffd.jet_mode(), JetMode::finite_difference);
  for (const Vec& x : random_points(c.box(), 25, 9, 0.3)) {
    const Mat ha = hessian_at(c, f, x);
    const Mat hf = hessian_at(cfd, ffd, x);
    EXPECT_LT((ha - hf).cwiseAbs().maxCoeff(), 1e-5 * std::max(1.0, ha.cwiseAbs().maxCoeff()));
    const MetricD2 da = c.metric_d2(x), df = cfd.metric_d2(x);
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l) EXPECT_LT((da[k][l] - df[k][l]).cwiseAbs().maxCoeff(), 1e-4);
  }
}

TEST(Chart, MetricCompatibilityOnCatalogCharts) {
  std::vector<std::string> ids;
  for (const auto& id : chart_ids())
    if (id.find('<') == std::string::npos) ids.push_back(id);
  for (const auto& imm : {"catenoid", "enneper", "cplx-z2", "cplx-z1z2"}) ids.push_back(std::string("induced:") + imm);
  for (const auto& id : ids) {
    const Chart c = make_chart(id);
    for (const Vec& x : random_points(c.box(), 10, 21, 0.2))
      EXPECT_LT(metric_compatibility_residual(c, x), 1e-6) << id;
  }
}

TEST(Chart, ComplexSpectrumOfEllipsoid) {
  // |z1|^2/a1 + |z2|^2/a2 + |z3|^2/a3: complex Hessian eigenvalues 2/a_i
  const Chart c = make_chart("flat-C3");
  const Vec a = v({1.0, 2.0, 5.0});
  const ScalarField psi = ellipsoid_exhaustion(v({1.0, 1.0, 2.0, 2.0, 5.0, 5.0})).psi();
  const auto ev = complex_hessian_spectrum(c, psi, v({0.1, 0.2, -0.3, 0.4, 1.0, -1.0}));
  ASSERT_EQ(ev.size(), 3u);
  EXPECT_DOUBLE_EQ(ev[0], 2.0 / a[2]);
  EXPECT_DOUBLE_EQ(ev[1], 2.0 / a[1]);
  EXPECT_DOUBLE_EQ(ev[2], 2.0 / a[0]);
}

TEST(Chart, ConformalChartIsHermitian) {
  const Chart c = make_chart("conformal-C1");
  for (const Vec& x : random_points(c.box(), 10, 4)) EXPECT_LT(complex_structure_defect(c, x), 1e-12);
  // the complex Hessian of u on a conformal metric is (1/4) e^{-2u} Delta_0 u; for r^2 it is 2 e^{-2u}
  const ScalarField r2 = euclidean_exhaustion(2).psi();
  for (const Vec& x : random_points(c.box(), 10, 5)) {
    const double u = 0.1 * x[0] * x[0] - 0.05 * x[1] + 0.02 * x[0] * x[1];
    const auto ev = complex_hessian_spectrum(c, r2, x);
    ASSERT_EQ(ev.size(), 1u);
    EXPECT_NEAR(ev[0], 2.0 * std::exp(-2.0 * u), 1e-10);
  }
}

TEST(Chart, Failures) {
  const Chart c = flat_chart(3);
  EXPECT_THROW_CODE(c.metric(v({0.0, 0.0, 11.0})), ErrorCode::OutOfDomain);
  EXPECT_THROW_CODE(c.metric(v({0.0, 0.0})), ErrorCode::OutOfDomain);
  EXPECT_THROW_CODE(c.with_complex_structure(Mat::Identity(3, 3)), ErrorCode::NoComplexStructure);
  EXPECT_THROW_CODE(flat_chart(2).with_complex_structure(Mat::Identity(2, 2)), ErrorCode::NoComplexStructure);
  EXPECT_THROW_CODE(complex_hessian_spectrum(flat_chart(2), euclidean_exhaustion(2).psi(), v({1, 1})),
                    ErrorCode::NoComplexStructure);
  EXPECT_THROW_CODE(make_chart("flat-R99"), ErrorCode::UnknownCatalogId);
  EXPECT_THROW_CODE(make_chart("klein-bottle"), ErrorCode::UnknownCatalogId);
  // J is not orthogonal for a metric stretched in one direction
  Chart skew("skew", 2, CoordinateBox::cube(2, 1.0), [](const Vec&) {
    Mat g = Mat::Identity(2, 2);
    g(0, 0) = 4.0;
    return g;
  });
  skew = skew.with_complex_structure(standard_complex_structure(2));
  EXPECT_THROW_CODE(complex_hessian_spectrum(skew, euclidean_exhaustion(2).psi(), v({0.1, 0.1})),
                    ErrorCode::NoComplexStructure);
  Chart degenerate("deg", 2, CoordinateBox::cube(2, 1.0), [](const Vec&) { return Mat(Mat::Zero(2, 2)); });
  EXPECT_THROW_CODE(christoffel_at(degenerate, v({0.0, 0.0})), ErrorCode::SingularMetric);
}

TEST(Warp, ProfilesMatchClosedForms) {
  const WarpProfile hyp(Hyperbolic{1.0, 1.0}, 10.0);
  const WarpProfile flat(CustomCurvature{"0", [](double) { return 0.0; }}, 5.0);
  const WarpProfile sphere(CustomCurvature{"1", [](double) { return 1.0; }}, 3.0);
  for (double r : {0.0, 0.0005, 0.25, 1.0, 1.2345, 2.9}) {
    EXPECT_NEAR(hyp.f(r), std::sinh(r), 1e-10 * std::max(1.0, std::sinh(r)));
    EXPECT_NEAR(hyp.fp(r), std::cosh(r), 1e-10 * std::cosh(r));
    EXPECT_NEAR(flat.f(r), r, 1e-12);
    EXPECT_NEAR(sphere.f(r), std::sin(r), 1e-11);
  }
  EXPECT_NEAR(hyp.f(9.99), std::sinh(9.99), 1e-9 * std::sinh(9.99));
  EXPECT_LT(hyp.richardson_gap(), 1e-10);
  for (double r : {0.5, 2.0, 7.0}) EXPECT_NEAR(hyp.realized_curvature(r), -1.0, 1e-6);
  EXPECT_DOUBLE_EQ(hyp.f(-0.5), -hyp.f(0.5));
}

TEST(Warp, RegimeCurvatureStaysInBand) {
  for (double r = 0.0; r < 10.0; r += 0.37) {
    const double kh = regime_curvature(Hyperbolic{2.0, 1.0}, r);
    EXPECT_LE(kh, -1.0 + 1e-15);
    EXPECT_GE(kh, -4.0 - 1e-15);
    const double q = 1.0 + r * r;
    const double kp = regime_curvature(PowerDecay{1.0, 0.5, 1.0}, r);
    EXPECT_LE(kp, 0.5 / std::pow(q, 2.0) + 1e-15);
    EXPECT_GE(kp, -1.0 / std::pow(q, 2.0) - 1e-15);
    const double kq = regime_curvature(QuadraticDecay{1.0, 0.4}, r);
    EXPECT_LE(kq, 0.16 / q + 1e-15);
    EXPECT_GE(kq, -1.0 / q - 1e-15);
  }
}

TEST(Warp, Failures) {
  EXPECT_THROW_CODE(WarpProfile(Hyperbolic{0.5, 1.0}, 5.0), ErrorCode::BadRegimeParams);
  EXPECT_THROW_CODE(WarpProfile(PowerDecay{1.0, 3.0, 1.0}, 5.0), ErrorCode::BadRegimeParams);
  EXPECT_THROW_CODE(WarpProfile(QuadraticDecay{1.0, 0.6}, 5.0), ErrorCode::BadRegimeParams);
  // sin r vanishes at pi
  EXPECT_THROW_CODE(WarpProfile(CustomCurvature{"1", [](double) { return 1.0; }}, 4.0), ErrorCode::BadRegimeParams);
  EXPECT_THROW_CODE(make_warped_chart(Hyperbolic{1.0, 1.0}, 1), ErrorCode::BadRegimeParams);
  const WarpProfile hyp(Hyperbolic{1.0, 1.0}, 2.0);
  EXPECT_THROW_CODE(hyp.f(3.0), ErrorCode::OutOfDomain);
}

TEST(Warp, ProfileCsvHasHeaderAndRows) {
  const WarpProfile hyp(Hyperbolic{1.0, 1.0}, 1.0);
  const std::string csv = hyp.csv(0.25);
  EXPECT_EQ(csv.rfind("r,f,fp,K_r\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
}

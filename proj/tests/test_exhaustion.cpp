#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"

using namespace stresslab;
using testing_support::random_points;
using testing_support::v;

namespace {

Vec repeat_pairs(const Vec& a) {
  Vec out(2 * a.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out[2 * i] = out[2 * i + 1] = a[i];
  return out;
}

double inv_sum(const Vec& a) { return a.cwiseInverse().sum(); }

// Oracle growth orders, coded from the closed forms as printed.
double oracle_real_quadratic(double a, double b, int m, int p) {
  return (2.0 + (m - 1) * (1.0 + std::sqrt(1.0 - 4.0 * b * b)) - 2.0 * p * (1.0 + std::sqrt(1.0 + 4.0 * a * a))) / 2.0;
}
double oracle_complex_hyperbolic(double alpha, double beta, int m, int p) { return 2.0 * (m - p * alpha / beta); }
double oracle_complex_power(double A, double B, double eps, int m, int p) {
  return 1.0 + (2.0 * m - 1.0) * (1.0 - B / (2.0 * eps)) - 2.0 * p * std::exp(A / (2.0 * eps));
}
double oracle_complex_quadratic(double a, double b, int m, int p) {
  return 1.0 + (2.0 * m - 1.0) * (1.0 + std::sqrt(1.0 - 4.0 * b * b)) / 2.0 - p * (1.0 + std::sqrt(1.0 + 4.0 * a * a));
}

}  // namespace

TEST(Growth, RealEllipsoidExample) {
  struct Case {
    int p;
    Vec a;
  };
  const std::vector<Case> cases = {{1, v({1, 1, 1})},         {1, v({1, 2, 3})},   {1, v({1.5, 2, 2, 4})},
                                   {2, v({1, 1, 1, 1, 1})},   {0, v({2, 7})}};
  for (const auto& c : cases) {
    const int m = static_cast<int>(c.a.size());
    ExhaustionSpec spec{ellipsoid_exhaustion(c.a), flat_chart(m), c.p,
                        window_grid(Vec::Constant(m, -2.0), Vec::Constant(m, 2.0), m > 4 ? 3 : 5)};
    const auto rep = growth_constants_real(spec);
    const double k1 = 2.0 * inv_sum(c.a) - 4.0 * c.p / c.a[0];
    EXPECT_NEAR(rep.k1, k1, 1e-12 * std::max(1.0, std::abs(k1)));
    EXPECT_LE(rep.k2, 1.0 + 1e-15);
    EXPECT_NEAR(rep.k2, 1.0 / c.a[0], 1e-14);
    EXPECT_EQ(rep.excluded, 1u);
    EXPECT_NEAR(rep.lambda, rep.k1 / (2.0 * rep.k2), 1e-15);
    EXPECT_EQ(rep.samples.size(), rep.sample_size + rep.excluded);
  }
}

TEST(Growth, ComplexEllipsoidExample) {
  struct Case {
    int p;
    Vec a;
  };
  const std::vector<Case> cases = {{1, v({1, 3})}, {1, v({1, 1, 2})}, {2, v({1, 1, 1})}, {0, v({2})}, {1, v({1, 2, 3, 4})}};
  for (const auto& c : cases) {
    const int n = static_cast<int>(c.a.size());
    const Chart chart = make_chart("flat-C" + std::to_string(n));
    auto sample = random_points(chart.box(), 40, 5, 0.3);
    Vec axis = Vec::Zero(2 * n);
    axis[0] = 1.0;
    sample.push_back(axis);
    ExhaustionSpec spec{ellipsoid_exhaustion(repeat_pairs(c.a)), chart, c.p, sample};
    const auto rep = growth_constants_complex(spec);
    const double k1 = 2.0 * inv_sum(c.a) - 2.0 * c.p / c.a[0];
    EXPECT_NEAR(rep.k1, k1, 1e-12 * std::max(1.0, std::abs(k1)));
    EXPECT_NEAR(rep.k2, 1.0 / c.a[0], 1e-14);
    EXPECT_NEAR(rep.lambda, rep.k1 / rep.k2, 1e-15);
    EXPECT_EQ(rep.kind, ExhaustionKind::complex);
  }
}

TEST(Growth, WarpedHyperbolicVolumeOrderAtFixedRadius) {
  // Hess(r^2) = 2 dr^2 + 2 r coth r (g - dr^2); k2 = 1, so k1/2 = 1 + (m-1) r coth r
  const WarpedChart w = make_warped_catalog_chart("warped-hyperbolic");
  const ExhaustionFunction exh(radial_squared_field(), v({1.0, 1.5, 0.0}));
  for (double r : {0.3, 1.0, 2.5, 6.0}) {
    ExhaustionSpec spec{exh, w.chart, 0, {v({r, 1.1, 0.4}), v({r, 2.0, -2.0})}};
    const auto rep = growth_constants_real(spec);
    const double expected = lambda_closed_form(VolumeGrowth{1, 3, 1.0, 0.0, 1.0, 0.0, r}).value;
    EXPECT_NEAR(rep.k2, 1.0, 1e-12);
    EXPECT_NEAR(rep.lambda, expected, 1e-6 * expected) << "r=" << r;
  }
}

TEST(Growth, Failures) {
  const Chart r3 = flat_chart(3);
  ExhaustionSpec only_origin{euclidean_exhaustion(3), r3, 1, {Vec::Zero(3)}};
  EXPECT_THROW_CODE(growth_constants_real(only_origin), ErrorCode::EmptySample);
  ExhaustionSpec high{euclidean_exhaustion(3), r3, 4, {v({1, 0, 0})}};
  EXPECT_THROW_CODE(growth_constants_real(high), ErrorCode::DegreeExceedsDimension);
  ExhaustionSpec real{euclidean_exhaustion(3), r3, 1, {v({1, 0, 0})}};
  EXPECT_THROW_CODE(growth_constants_complex(real), ErrorCode::NoComplexStructure);
  ExhaustionSpec cplx{euclidean_exhaustion(2), make_chart("flat-C1"), 2, {v({1, 0})}};
  EXPECT_THROW_CODE(growth_constants_complex(cplx), ErrorCode::DegreeExceedsDimension);
  ExhaustionSpec outside{euclidean_exhaustion(3), r3, 1, {v({100, 0, 0})}};
  EXPECT_THROW_CODE(growth_constants_real(outside), ErrorCode::OutOfDomain);
  EXPECT_THROW_CODE(ellipsoid_exhaustion(v({1.0, -1.0})), ErrorCode::InvalidArgument);
}

TEST(ClosedForm, RealQuadraticMatchesOracle) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> ua(0.0, 1.0), ub(0.0, 0.5);
  std::uniform_int_distribution<int> um(2, 9), up(0, 2);
  int checked = 0;
  while (checked < 10) {
    const double a = ua(rng), b = ub(rng);
    const int m = um(rng), p = up(rng);
    const double want = oracle_real_quadratic(a, b, m, p);
    if (!(want > 0.0)) {
      EXPECT_THROW_CODE(lambda_closed_form(RealQuadratic{a, b, m, p}), ErrorCode::HypothesisViolated);
      continue;
    }
    EXPECT_NEAR(lambda_closed_form(RealQuadratic{a, b, m, p}).value, want, 1e-12);
    ++checked;
  }
}

TEST(ClosedForm, ComplexRegimesMatchOracle) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<int> um(1, 6), up(0, 2);
  int hyp = 0, pow = 0, quad = 0;
  while (hyp < 10 || pow < 10 || quad < 10) {
    const int m = um(rng), p = up(rng);
    if (hyp < 10) {
      const double beta = 0.2 + u01(rng), alpha = beta * (1.0 + u01(rng));
      if ((2.0 * m - 1.0) * beta - 2.0 * p * alpha > 0.0) {
        EXPECT_NEAR(lambda_closed_form(ComplexHyperbolic{alpha, beta, m, p}).value,
                    oracle_complex_hyperbolic(alpha, beta, m, p), 1e-12);
        ++hyp;
      } else {
        EXPECT_THROW_CODE(lambda_closed_form(ComplexHyperbolic{alpha, beta, m, p}), ErrorCode::HypothesisViolated);
      }
    }
    if (pow < 10) {
      const double eps = 0.1 + u01(rng), A = 2.0 * u01(rng), B = 2.0 * eps * u01(rng);
      const double want = oracle_complex_power(A, B, eps, m, p);
      if (want > 0.0) {
        EXPECT_NEAR(lambda_closed_form(ComplexPower{A, B, eps, m, p}).value, want, 1e-12);
        ++pow;
      } else {
        EXPECT_THROW_CODE(lambda_closed_form(ComplexPower{A, B, eps, m, p}), ErrorCode::HypothesisViolated);
      }
    }
    if (quad < 10) {
      const double a = u01(rng), b = 0.5 * u01(rng);
      const double h = 2.0 + (2.0 * m - 1.0) * (1.0 + std::sqrt(1.0 - 4.0 * b * b)) -
                       2.0 * p * (1.0 + std::sqrt(1.0 + 4.0 * a * a));
      if (h > 0.0) {
        EXPECT_NEAR(lambda_closed_form(ComplexQuadratic{a, b, m, p}).value, oracle_complex_quadratic(a, b, m, p), 1e-12);
        ++quad;
      } else {
        EXPECT_THROW_CODE(lambda_closed_form(ComplexQuadratic{a, b, m, p}), ErrorCode::HypothesisViolated);
      }
    }
  }
}

TEST(ClosedForm, VolumeGrowthMatchesOracle) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<int> um(1, 8);
  for (int k = 0; k < 10; ++k) {
    const int m = um(rng);
    const double beta = 0.1 + 2.0 * u01(rng), r = 0.01 + 5.0 * u01(rng);
    EXPECT_NEAR(lambda_closed_form(VolumeGrowth{1, m, beta, 0, 1, 0, r}).value,
                1.0 + (m - 1) * beta * r * std::cosh(beta * r) / std::sinh(beta * r), 1e-12 * m * (1 + beta * r));
    const double eps = 0.1 + u01(rng), B = 2.0 * eps * u01(rng);
    EXPECT_NEAR(lambda_closed_form(VolumeGrowth{2, m, 0, B, eps, 0, {}}).value, m * (1.0 - B / (2.0 * eps)), 1e-12);
    const double b = 0.5 * u01(rng);
    EXPECT_NEAR(lambda_closed_form(VolumeGrowth{3, m, 0, 0, 1, b, {}}).value,
                m * (1.0 + std::sqrt(1.0 - 4.0 * b * b)) / 2.0, 1e-12);
  }
  // beta r coth(beta r) -> 1 as r -> 0
  EXPECT_DOUBLE_EQ(lambda_closed_form(VolumeGrowth{1, 4, 1.0, 0, 1, 0, {}}).value, 4.0);
}

TEST(ClosedForm, HypothesisFailures) {
  EXPECT_THROW_CODE(lambda_closed_form(RealQuadratic{1.0, 0.6, 3, 0}), ErrorCode::HypothesisViolated);
  EXPECT_THROW_CODE(lambda_closed_form(RealQuadratic{-1.0, 0.0, 3, 0}), ErrorCode::HypothesisViolated);
  EXPECT_THROW_CODE(lambda_closed_form(ComplexHyperbolic{0.5, 1.0, 3, 1}), ErrorCode::HypothesisViolated);
  EXPECT_THROW_CODE(lambda_closed_form(ComplexPower{1.0, 3.0, 1.0, 3, 0}), ErrorCode::HypothesisViolated);
  EXPECT_THROW_CODE(lambda_closed_form(VolumeGrowth{2, 3, 0, 2.0, 1.0, 0, {}}), ErrorCode::HypothesisViolated);
  EXPECT_THROW_CODE(lambda_closed_form(VolumeGrowth{7, 3}), ErrorCode::InvalidArgument);
}

TEST(HessianComparison, WarpedChartsRespectDistanceBounds) {
  struct Band {
    const char* id;
    std::function<double(double)> lo, hi;
  };
  const std::vector<Band> bands = {
      {"warped-hyperbolic", [](double r) { return 1.0 / std::tanh(r); }, [](double r) { return 1.0 / std::tanh(r); }},
      {"warped-hyperbolic-band", [](double r) { return 1.0 / std::tanh(r); },
       [](double r) { return 2.0 / std::tanh(2.0 * r); }},
      {"warped-power", [](double r) { return 0.75 / r; }, [](double r) { return std::exp(0.5) / r; }},
      {"warped-quadratic", [](double r) { return 0.8 / r; },
       [](double r) { return (1.0 + std::sqrt(5.0)) / (2.0 * r); }}};
  const ScalarField r = radial_field();
  for (const auto& b : bands) {
    const Chart c = make_chart(b.id);
    for (int k = 0; k < 50; ++k) {
      const double rad = 0.05 + 9.5 * k / 49.0;
      const auto ev = hessian_spectrum(c, r, v({rad, 1.3, 0.2}));
      EXPECT_NEAR(ev[0], 0.0, 1e-6) << b.id;
      const double tol = 1e-6 * std::max(1.0, b.hi(rad));
      EXPECT_GE(ev[1], b.lo(rad) - tol) << b.id << " r=" << rad;
      EXPECT_LE(ev[2], b.hi(rad) + tol) << b.id << " r=" << rad;
    }
  }
}

TEST(HessianComparison, BranchBoundsHoldOnWarpedCharts) {
  const WarpedChart w = make_warped_catalog_chart("warped-hyperbolic-band");
  const ScalarField r2 = radial_squared_field();
  for (int p : {0, 1}) {
    for (int k = 0; k < 50; ++k) {
      const double rad = 0.05 + 9.5 * k / 49.0;
      const auto ev = hessian_spectrum(w.chart, r2, v({rad, 1.0, -0.5}));
      double sum = 0.0;
      for (double e : ev) sum += e;
      const double actual = sum - 2.0 * p * ev.back();
      const auto bound =
          hessian_r2_eigen_bounds(1.0 / std::tanh(rad), 2.0 / std::tanh(2.0 * rad), rad, 3, p, ExhaustionKind::real);
      EXPECT_EQ(bound.branch, "r*h2>=1");
      EXPECT_GE(actual, bound.value - 1e-6 * std::max(1.0, std::abs(actual))) << "r=" << rad << " p=" << p;
    }
  }
}

TEST(HessianComparison, FlatSpaceAttainsTheBounds) {
  // Hess r = (g - dr dr)/r: h1 = h2 = 1/r, r h2 = 1
  const Chart r4 = flat_chart(4);
  const Chart c2 = make_chart("flat-C2");
  const ScalarField r2 = euclidean_exhaustion(4).psi();
  const Vec x = v({0.3, -0.2, 0.7, 0.5});
  const double rad = x.norm();
  for (int p : {0, 1, 2}) {
    const auto ev = hessian_spectrum(r4, r2, x);
    double sum = 0.0;
    for (double e : ev) sum += e;
    EXPECT_NEAR(sum - 2.0 * p * ev.back(),
                hessian_r2_eigen_bounds(1.0 / rad, 1.0 / rad, rad, 4, p, ExhaustionKind::real).value, 1e-12);
    const auto cev = complex_hessian_spectrum(c2, r2, x);
    double csum = 0.0;
    for (double e : cev) csum += e;
    EXPECT_NEAR(csum - p * cev.back(),
                hessian_r2_eigen_bounds(1.0 / rad, 1.0 / rad, rad, 2, p, ExhaustionKind::complex).value, 1e-12);
  }
}

TEST(HessianComparison, BranchSelection) {
  const double r = 2.0;
  auto real_hi = hessian_r2_eigen_bounds(0.5, 0.75, r, 3, 1, ExhaustionKind::real);
  EXPECT_EQ(real_hi.branch, "r*h2>=1");
  EXPECT_DOUBLE_EQ(real_hi.value, 2.0 + 2.0 * 2 * r * 0.5 - 4.0 * r * 0.75);
  auto real_lo = hessian_r2_eigen_bounds(0.2, 0.3, r, 3, 1, ExhaustionKind::real);
  EXPECT_EQ(real_lo.branch, "r*h2<1");
  EXPECT_DOUBLE_EQ(real_lo.value, 2.0 + 2.0 * 2 * r * 0.2 - 4.0);
  auto cx_hi = hessian_r2_eigen_bounds(0.5, 0.75, r, 3, 1, ExhaustionKind::complex);
  EXPECT_DOUBLE_EQ(cx_hi.value, 1.0 + 5.0 * r * 0.5 - 2.0 * r * 0.75);
  auto cx_lo = hessian_r2_eigen_bounds(0.2, 0.3, r, 3, 1, ExhaustionKind::complex);
  EXPECT_EQ(cx_lo.branch, "r*h2<1");
  EXPECT_DOUBLE_EQ(cx_lo.value, 1.0 + 5.0 * r * 0.2 - (1.0 + r * 0.3));
  EXPECT_THROW_CODE(hessian_r2_eigen_bounds(0.8, 0.5, r, 3, 1, ExhaustionKind::real), ErrorCode::BadBounds);
  EXPECT_THROW_CODE(hessian_r2_eigen_bounds(0.0, 0.5, r, 3, 1, ExhaustionKind::real), ErrorCode::BadBounds);
  EXPECT_THROW_CODE(hessian_r2_eigen_bounds(0.1, 0.5, 0.0, 3, 1, ExhaustionKind::real), ErrorCode::BadBounds);
}

TEST(HessianComparison, GrowthOnQuadraticDecayDominatesClosedForm) {
  const WarpedChart w = make_warped_catalog_chart("warped-quadratic");
  std::vector<Vec> sample;
  for (int k = 0; k < 40; ++k) sample.push_back(v({0.1 + 9.5 * k / 39.0, 1.2, 0.5}));
  ExhaustionSpec spec{ExhaustionFunction(radial_squared_field(), v({1.0, 1.5, 0.0})), w.chart, 0, sample};
  const auto rep = growth_constants_real(spec);
  const double cf = lambda_closed_form(VolumeGrowth{3, 3, 0, 0, 1, 0.4, {}}).value;
  EXPECT_GE(rep.lambda, cf - 1e-6);
}

#pragma once

#include <array>
#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "stresslab/chart.hpp"

namespace stresslab {

// Radial curvature profiles. Each concrete K(r) lies inside the band of
// its regime: hyperbolic in [-alpha^2, -beta^2], power-decay in
// [-A, B]/(1+r^2)^(1+eps), quadratic-decay in [-a^2, b^2]/(1+r^2).
struct Hyperbolic {
  double alpha = 1.0;
  double beta = 1.0;
};
struct PowerDecay {
  double A = 0.0;
  double B = 0.0;
  double eps = 1.0;
};
struct QuadraticDecay {
  double a = 0.0;
  double b = 0.0;
};
struct CustomCurvature {
  std::string label;
  std::function<double(double)> K;
};

using CurvatureRegime = std::variant<Hyperbolic, PowerDecay, QuadraticDecay, CustomCurvature>;

inline void validate_regime(const CurvatureRegime& regime) {
  std::visit(
      [](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Hyperbolic>) {
          if (!(r.beta > 0.0) || !(r.alpha >= r.beta))
            fail(ErrorCode::BadRegimeParams, "hyperbolic regime needs 0 < beta <= alpha");
        } else if constexpr (std::is_same_v<T, PowerDecay>) {
          if (!(r.eps > 0.0)) fail(ErrorCode::BadRegimeParams, "power-decay regime needs eps > 0");
          if (!(r.A >= 0.0)) fail(ErrorCode::BadRegimeParams, "power-decay regime needs A >= 0");
          if (!(r.B >= 0.0 && r.B < 2.0 * r.eps))
            fail(ErrorCode::BadRegimeParams, "power-decay regime needs 0 <= B < 2 eps");
        } else if constexpr (std::is_same_v<T, QuadraticDecay>) {
          if (!(r.a >= 0.0)) fail(ErrorCode::BadRegimeParams, "quadratic-decay regime needs a >= 0");
          if (!(r.b * r.b <= 0.25)) fail(ErrorCode::BadRegimeParams, "quadratic-decay regime needs b^2 <= 1/4");
        } else {
          if (!r.K) fail(ErrorCode::BadRegimeParams, "custom regime needs K(r)");
        }
      },
      regime);
}

inline double regime_curvature(const CurvatureRegime& regime, double r) {
  const double q = 1.0 + r * r;
  const double s = r * r / q;
  return std::visit(
      [&](const auto& reg) -> double {
        using T = std::decay_t<decltype(reg)>;
        if constexpr (std::is_same_v<T, Hyperbolic>) {
          return -(reg.beta * reg.beta + (reg.alpha * reg.alpha - reg.beta * reg.beta) * s);
        } else if constexpr (std::is_same_v<T, PowerDecay>) {
          return (reg.B * (1.0 - s) - reg.A * s) / std::pow(q, 1.0 + reg.eps);
        } else if constexpr (std::is_same_v<T, QuadraticDecay>) {
          return (reg.b * reg.b * (1.0 - s) - reg.a * reg.a * s) / q;
        } else {
          return reg.K(r);
        }
      },
      regime);
}

inline std::string regime_label(const CurvatureRegime& regime) {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Hyperbolic>)
          os << "hyperbolic(alpha=" << r.alpha << ",beta=" << r.beta << ")";
        else if constexpr (std::is_same_v<T, PowerDecay>)
          os << "power-decay(A=" << r.A << ",B=" << r.B << ",eps=" << r.eps << ")";
        else if constexpr (std::is_same_v<T, QuadraticDecay>)
          os << "quadratic-decay(a=" << r.a << ",b=" << r.b << ")";
        else
          os << "custom(" << r.label << ")";
      },
      regime);
  return os.str();
}

/// Solution of f'' + K(r) f = 0, f(0) = 0, f'(0) = 1, tabulated by fixed-step
/// RK4. Off-node values come from a partial RK4 step out of the node below.
class WarpProfile {
 public:
  static constexpr double kStep = 1e-3;
  static constexpr double kCheckStep = 5e-4;

  WarpProfile(CurvatureRegime regime, double r_max) : regime_(std::move(regime)), r_max_(r_max) {
    validate_regime(regime_);
    if (!(r_max_ > 0.0)) fail(ErrorCode::BadRegimeParams, "warp table needs r_max > 0");
    const double extent = r_max_ + 0.05;
    const auto n = static_cast<std::size_t>(std::ceil(extent / kStep)) + 1;
    table_ = integrate(kStep, n);
    for (std::size_t i = 1; i < table_.size(); ++i)
      if (!(table_[i][0] > 0.0))
        fail(ErrorCode::BadRegimeParams, "warp function vanishes at r = " + std::to_string(i * kStep));
    const auto fine = integrate(kCheckStep, 2 * (n - 1) + 1);
    for (std::size_t i = 0; i < table_.size(); ++i) {
      const double scale = std::max(1.0, std::abs(table_[i][0]));
      richardson_gap_ = std::max(richardson_gap_, std::abs(table_[i][0] - fine[2 * i][0]) / scale);
    }
  }

  const CurvatureRegime& regime() const { return regime_; }
  double r_max() const { return r_max_; }
  /// Max relative change of f when the step is halved.
  double richardson_gap() const { return richardson_gap_; }

  double K(double r) const { return regime_curvature(regime_, r); }
  double f(double r) const { return state(r)[0]; }
  double fp(double r) const { return state(r)[1]; }
  double fpp(double r) const { return -K(r) * f(r); }

  /// -f''/f with f'' from a five-point stencil on the tabulated f'.
  double realized_curvature(double r) const {
    const double h = kStep;
    const double d = (-fp(r + 2 * h) + 8 * fp(r + h) - 8 * fp(r - h) + fp(r - 2 * h)) / (12 * h);
    return -d / f(r);
  }

  std::array<double, 2> state(double r) const {
    if (r < 0.0) {
      // odd extension: f(-r) = -f(r), f'(-r) = f'(r)
      const auto s = state(-r);
      return {-s[0], s[1]};
    }
    const double pos = r / kStep;
    auto i = static_cast<std::size_t>(pos);
    if (i >= table_.size() - 1) {
      if (r > static_cast<double>(table_.size() - 1) * kStep * (1.0 + 1e-12))
        fail(ErrorCode::OutOfDomain, "radius beyond the warp table");
      i = table_.size() - 1;
    }
    const double r0 = static_cast<double>(i) * kStep;
    const double dt = r - r0;
    if (dt == 0.0) return table_[i];
    return rk4_step(r0, table_[i], dt);
  }

  /// Rows (r, f, f', K_r) on a uniform grid.
  std::string csv(double dr = 0.01) const {
    std::ostringstream os;
    os.precision(17);
    os << "r,f,fp,K_r\n";
    const auto n = static_cast<std::size_t>(std::floor(r_max_ / dr + 1e-9));
    for (std::size_t i = 0; i <= n; ++i) {
      const double r = static_cast<double>(i) * dr;
      os << r << ',' << f(r) << ',' << fp(r) << ',' << K(r) << '\n';
    }
    return os.str();
  }

 private:
  std::array<double, 2> rk4_step(double r, const std::array<double, 2>& y, double h) const {
    auto rhs = [&](double t, const std::array<double, 2>& s) {
      return std::array<double, 2>{s[1], -K(t) * s[0]};
    };
    const auto k1 = rhs(r, y);
    const auto k2 = rhs(r + h / 2, {y[0] + h / 2 * k1[0], y[1] + h / 2 * k1[1]});
    const auto k3 = rhs(r + h / 2, {y[0] + h / 2 * k2[0], y[1] + h / 2 * k2[1]});
    const auto k4 = rhs(r + h, {y[0] + h * k3[0], y[1] + h * k3[1]});
    return {y[0] + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
            y[1] + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])};
  }

  std::vector<std::array<double, 2>> integrate(double h, std::size_t n) const {
    std::vector<std::array<double, 2>> out(n);
    out[0] = {0.0, 1.0};
    for (std::size_t i = 1; i < n; ++i) out[i] = rk4_step(static_cast<double>(i - 1) * h, out[i - 1], h);
    return out;
  }

  CurvatureRegime regime_;
  double r_max_;
  std::vector<std::array<double, 2>> table_;
  double richardson_gap_ = 0.0;
};

struct WarpedChart {
  Chart chart;
  std::shared_ptr<const WarpProfile> profile;
  int sphere_dim;
};

namespace detail {

// Angular weights w_j = prod_{i<j} sin^2(theta_i) for j = 1..m-1 (coordinate
// index j, theta_i is coordinate i), with first and second angular partials.
struct SphereWeights {
  std::vector<double> w;
  std::vector<std::vector<double>> dw;                // [j][i]
  std::vector<std::vector<std::vector<double>>> ddw;  // [j][i][l]
};

inline SphereWeights sphere_weights(const Vec& x) {
  const int m = static_cast<int>(x.size());
  SphereWeights s;
  s.w.assign(m, 0.0);
  s.dw.assign(m, std::vector<double>(m, 0.0));
  s.ddw.assign(m, std::vector<std::vector<double>>(m, std::vector<double>(m, 0.0)));
  auto factor = [&](int i, int order) {
    const double t = x[i];
    if (order == 0) return std::sin(t) * std::sin(t);
    if (order == 1) return std::sin(2 * t);
    return 2 * std::cos(2 * t);
  };
  for (int j = 1; j < m; ++j) {
    auto prod = [&](int d1, int d2) {
      double p = 1.0;
      for (int i = 1; i < j; ++i) {
        const int order = (i == d1) + (i == d2);
        p *= factor(i, order);
      }
      return p;
    };
    s.w[j] = prod(-1, -1);
    for (int i = 1; i < j; ++i) {
      s.dw[j][i] = prod(i, -1);
      for (int l = 1; l < j; ++l) s.ddw[j][i][l] = prod(i, l);
    }
  }
  return s;
}

}  // namespace detail

/// Metric dr^2 + f(r)^2 g_sphere in coordinates (r, theta_1, ..., theta_{m-1});
/// the last angle is the periodic azimuth.
inline WarpedChart make_warped_chart(const CurvatureRegime& regime, int m, double r_max = 10.0,
                                     std::string id = "") {
  if (m < 2) fail(ErrorCode::BadRegimeParams, "warped chart needs m >= 2");
  auto profile = std::make_shared<const WarpProfile>(regime, r_max);
  constexpr double kPi = 3.14159265358979323846;
  Vec lo(m), hi(m);
  std::vector<bool> periodic(static_cast<std::size_t>(m), false);
  lo[0] = 1e-6;
  hi[0] = r_max;
  for (int i = 1; i < m - 1; ++i) {
    lo[i] = 1e-6;
    hi[i] = kPi - 1e-6;
  }
  lo[m - 1] = -kPi;
  hi[m - 1] = kPi;
  periodic[static_cast<std::size_t>(m - 1)] = true;

  auto metric = [profile, m](const Vec& x) {
    const double f = profile->f(x[0]);
    const auto s = detail::sphere_weights(x);
    Mat g = Mat::Zero(m, m);
    g(0, 0) = 1.0;
    for (int j = 1; j < m; ++j) g(j, j) = f * f * s.w[j];
    return g;
  };
  auto d1 = [profile, m](const Vec& x) {
    const double f = profile->f(x[0]);
    const double fp = profile->fp(x[0]);
    const auto s = detail::sphere_weights(x);
    MetricD1 out(static_cast<std::size_t>(m), Mat::Zero(m, m));
    for (int j = 1; j < m; ++j) {
      out[0](j, j) = 2 * f * fp * s.w[j];
      for (int i = 1; i < j; ++i) out[i](j, j) = f * f * s.dw[j][i];
    }
    return out;
  };
  auto d2 = [profile, m](const Vec& x) {
    const double f = profile->f(x[0]);
    const double fp = profile->fp(x[0]);
    const double fpp = profile->fpp(x[0]);
    const auto s = detail::sphere_weights(x);
    MetricD2 out(static_cast<std::size_t>(m), MetricD1(static_cast<std::size_t>(m), Mat::Zero(m, m)));
    for (int j = 1; j < m; ++j) {
      out[0][0](j, j) = 2 * (fp * fp + f * fpp) * s.w[j];
      for (int i = 1; i < j; ++i) {
        out[0][i](j, j) = 2 * f * fp * s.dw[j][i];
        out[i][0](j, j) = out[0][i](j, j);
        for (int l = 1; l < j; ++l) out[i][l](j, j) = f * f * s.ddw[j][i][l];
      }
    }
    return out;
  };
  if (id.empty()) id = "warped:" + regime_label(regime);
  Chart chart(std::move(id), m, CoordinateBox(lo, hi, periodic), metric, d1, d2);
  return WarpedChart{std::move(chart), profile, m - 1};
}

/// The radial coordinate r as a field on a warped chart.
inline ScalarField radial_field() {
  return ScalarField::analytic(
      "r", [](const Vec& x) { return x[0]; },
      [](const Vec& x) {
        Vec g = Vec::Zero(x.size());
        g[0] = 1.0;
        return g;
      },
      [](const Vec& x) { return Mat::Zero(x.size(), x.size()); });
}

/// r^2 on a warped chart.
inline ScalarField radial_squared_field() {
  return ScalarField::analytic(
      "r^2", [](const Vec& x) { return x[0] * x[0]; },
      [](const Vec& x) {
        Vec g = Vec::Zero(x.size());
        g[0] = 2.0 * x[0];
        return g;
      },
      [](const Vec& x) {
        Mat h = Mat::Zero(x.size(), x.size());
        h(0, 0) = 2.0;
        return h;
      });
}

}  // namespace stresslab

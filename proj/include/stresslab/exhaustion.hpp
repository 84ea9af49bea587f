#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <type_traits>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "stresslab/chart.hpp"

namespace stresslab {

/// Phi >= 0 together with Psi = Phi^2. Psi carries the jets; Phi is sqrt(Psi).
class ExhaustionFunction {
 public:
  ExhaustionFunction(ScalarField psi, Vec center) : psi_(std::move(psi)), center_(std::move(center)) {}

  const ScalarField& psi() const { return psi_; }
  const std::string& label() const { return psi_.label(); }
  /// Point about which sublevel sets are assumed star-shaped.
  const Vec& center() const { return center_; }

  double phi(const Vec& x) const { return std::sqrt(std::max(0.0, psi_.value(x))); }

  /// |grad Phi|^2 = |grad Psi|^2 / (4 Psi); +inf where Psi = 0.
  double grad_phi_sq(const Chart& chart, const Vec& x) const {
    const double v = psi_.value(x);
    const double gp = gradient_norm_sq(chart, psi_, x);
    if (!(v > 0.0)) return gp > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return gp / (4.0 * v);
  }

  ExhaustionFunction finite_difference() const { return {psi_.finite_difference(), center_}; }

 private:
  ScalarField psi_;
  Vec center_;
};

/// Psi = sum_i x_i^2 / a_i on flat coordinates.
inline ExhaustionFunction ellipsoid_exhaustion(const Vec& a) {
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (!(a[i] > 0.0)) fail(ErrorCode::InvalidArgument, "ellipsoid weights must be positive");
  const Vec inv = a.cwiseInverse();
  auto psi = ScalarField::analytic(
      "ellipsoid", [inv](const Vec& x) { return x.cwiseProduct(x).dot(inv); },
      [inv](const Vec& x) -> Vec { return 2.0 * x.cwiseProduct(inv); },
      [inv](const Vec&) -> Mat { return Mat(2.0 * inv.asDiagonal()); });
  return {psi, Vec::Zero(a.size())};
}

inline ExhaustionFunction euclidean_exhaustion(int m) { return ellipsoid_exhaustion(Vec::Ones(m)); }

// ---------------------------------------------------------------------------

enum class ExhaustionKind { real, complex };

inline std::string to_string(ExhaustionKind k) { return k == ExhaustionKind::real ? "real" : "complex"; }

struct ExhaustionSpec {
  ExhaustionFunction exhaustion;
  Chart chart;
  int p = 0;
  std::vector<Vec> sample;
  double critical_cutoff = 1e-8;
  std::string window = "sample";
};

struct GrowthSample {
  double phi = 0.0;
  double term = 0.0;  // spectral combination minimized into k1
  double grad_phi_sq = 0.0;
  bool excluded = false;
};

struct GrowthOrderReport {
  ExhaustionKind kind = ExhaustionKind::real;
  int p = 0;
  double k1 = 0.0;
  double k2 = 0.0;
  double lambda = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> closed_form;
  std::size_t sample_size = 0;
  std::size_t excluded = 0;
  std::string window;
  Vec k1_argmin;
  std::vector<GrowthSample> samples;

  bool k1_positive() const { return k1 > 0.0; }
  bool lambda_finite() const { return std::isfinite(lambda); }
  std::optional<double> closed_form_gap() const {
    if (!closed_form || !lambda_finite()) return std::nullopt;
    return std::abs(lambda - *closed_form);
  }
};

namespace detail {

template <class Term>
GrowthOrderReport growth_constants(const ExhaustionSpec& spec, ExhaustionKind kind, Term term) {
  GrowthOrderReport rep;
  rep.kind = kind;
  rep.p = spec.p;
  rep.window = spec.window;
  rep.k1 = std::numeric_limits<double>::infinity();
  rep.k2 = 0.0;
  const double cut_sq = spec.critical_cutoff * spec.critical_cutoff;
  for (const Vec& x : spec.sample) {
    spec.chart.require_in_domain(x);
    const double gp = spec.exhaustion.grad_phi_sq(spec.chart, x);
    if (!(gp >= cut_sq) || !std::isfinite(gp)) {
      ++rep.excluded;
      rep.samples.push_back({spec.exhaustion.phi(x), std::numeric_limits<double>::quiet_NaN(), gp, true});
      continue;
    }
    ++rep.sample_size;
    const double t = term(x);
    rep.samples.push_back({spec.exhaustion.phi(x), t, gp, false});
    if (t < rep.k1) {
      rep.k1 = t;
      rep.k1_argmin = x;
    }
    rep.k2 = std::max(rep.k2, gp);
  }
  if (rep.sample_size == 0) fail(ErrorCode::EmptySample, "no sample point survives the critical-point cutoff");
  if (rep.k2 > 0.0) rep.lambda = kind == ExhaustionKind::real ? rep.k1 / (2.0 * rep.k2) : rep.k1 / rep.k2;
  return rep;
}

}  // namespace detail

/// k1 = min (sum lambda_i - 2 p lambda_max), k2 = max |grad Phi|^2, lambda = k1 / (2 k2).
inline GrowthOrderReport growth_constants_real(const ExhaustionSpec& spec) {
  if (spec.p < 0 || spec.p > spec.chart.dim()) fail(ErrorCode::DegreeExceedsDimension, "degree exceeds dimension");
  return detail::growth_constants(spec, ExhaustionKind::real, [&](const Vec& x) {
    const auto ev = hessian_spectrum(spec.chart, spec.exhaustion.psi(), x);
    double sum = 0.0;
    for (double v : ev) sum += v;
    return sum - 2.0 * spec.p * ev.back();
  });
}

/// k1 = min (sum eps_i - p eps_max), k2 = max |grad Phi|^2, lambda = k1 / k2.
inline GrowthOrderReport growth_constants_complex(const ExhaustionSpec& spec) {
  if (!spec.chart.complex_structure())
    fail(ErrorCode::NoComplexStructure, "chart '" + spec.chart.id() + "' has no J");
  if (spec.p < 0 || 2 * spec.p > spec.chart.dim())
    fail(ErrorCode::DegreeExceedsDimension, "degree exceeds complex dimension");
  return detail::growth_constants(spec, ExhaustionKind::complex, [&](const Vec& x) {
    const auto ev = complex_hessian_spectrum(spec.chart, spec.exhaustion.psi(), x);
    double sum = 0.0;
    for (double v : ev) sum += v;
    return sum - spec.p * ev.back();
  });
}

// ---------------------------------------------------------------------------
// Closed-form growth orders.

struct RealQuadratic {
  double a, b;
  int m, p;
};
struct ComplexHyperbolic {
  double alpha, beta;
  int m, p;
};
struct ComplexPower {
  double A, B, eps;
  int m, p;
};
struct ComplexQuadratic {
  double a, b;
  int m, p;
};
/// Volume growth for an ambient warped model; `variant` selects the curvature
/// bound (1: K <= -beta^2, 2: power decay B/eps, 3: quadratic decay b).
struct VolumeGrowth {
  int variant;
  int m;
  double beta = 0.0;
  double B = 0.0;
  double eps = 1.0;
  double b = 0.0;
  std::optional<double> r;
};

using GrowthRegime = std::variant<RealQuadratic, ComplexHyperbolic, ComplexPower, ComplexQuadratic, VolumeGrowth>;

struct ClosedFormLambda {
  double value;
  std::string hypothesis;
  double hypothesis_value;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::HypothesisViolated, what);
}

inline void check_quadratic(double a, double b) {
  require(a >= 0.0, "a >= 0");
  require(b * b <= 0.25, "b^2 <= 1/4");
}

}  // namespace detail

inline ClosedFormLambda lambda_closed_form(const GrowthRegime& regime) {
  return std::visit(
      [](const auto& r) -> ClosedFormLambda {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, RealQuadratic>) {
          detail::check_quadratic(r.a, r.b);
          detail::require(r.m >= 1 && r.p >= 0 && r.p <= r.m, "0 <= p <= m");
          const double lo = 1.0 + std::sqrt(1.0 - 4.0 * r.b * r.b);
          const double hi = 1.0 + std::sqrt(1.0 + 4.0 * r.a * r.a);
          const double num = 2.0 + (r.m - 1) * lo - 2.0 * r.p * hi;
          detail::require(num > 0.0, "2 + (m-1)(1+sqrt(1-4b^2)) - 2p(1+sqrt(1+4a^2)) > 0");
          return {num / 2.0, "2 + (m-1)(1+sqrt(1-4b^2)) - 2p(1+sqrt(1+4a^2)) > 0", num};
        } else if constexpr (std::is_same_v<T, ComplexHyperbolic>) {
          detail::require(r.alpha > 0.0 && r.beta > 0.0, "alpha > 0, beta > 0");
          detail::require(r.alpha >= r.beta, "beta <= alpha");
          const double h = (2.0 * r.m - 1.0) * r.beta - 2.0 * r.p * r.alpha;
          detail::require(h > 0.0, "(2m-1) beta - 2p alpha > 0");
          return {2.0 * (r.m - r.p * r.alpha / r.beta), "(2m-1) beta - 2p alpha > 0", h};
        } else if constexpr (std::is_same_v<T, ComplexPower>) {
          detail::require(r.eps > 0.0, "eps > 0");
          detail::require(r.A >= 0.0, "A >= 0");
          detail::require(r.B >= 0.0 && r.B < 2.0 * r.eps, "0 <= B < 2 eps");
          const double v = 1.0 + (2.0 * r.m - 1.0) * (1.0 - r.B / (2.0 * r.eps)) - 2.0 * r.p * std::exp(r.A / (2.0 * r.eps));
          detail::require(v > 0.0, "1 + (2m-1)(1-B/2eps) - 2p exp(A/2eps) > 0");
          return {v, "1 + (2m-1)(1-B/2eps) - 2p exp(A/2eps) > 0", v};
        } else if constexpr (std::is_same_v<T, ComplexQuadratic>) {
          detail::check_quadratic(r.a, r.b);
          const double lo = 1.0 + std::sqrt(1.0 - 4.0 * r.b * r.b);
          const double hi = 1.0 + std::sqrt(1.0 + 4.0 * r.a * r.a);
          const double h = 2.0 + (2.0 * r.m - 1.0) * lo - 2.0 * r.p * hi;
          detail::require(h > 0.0, "2 + (2m-1)(1+sqrt(1-4b^2)) - 2p(1+sqrt(1+4a^2)) > 0");
          return {1.0 + (2.0 * r.m - 1.0) * lo / 2.0 - r.p * hi, "2 + (2m-1)(1+sqrt(1-4b^2)) - 2p(1+sqrt(1+4a^2)) > 0", h};
        } else {
          detail::require(r.m >= 1, "m >= 1");
          if (r.variant == 1) {
            detail::require(r.beta > 0.0, "beta > 0");
            if (!r.r) return {static_cast<double>(r.m), "beta > 0", r.beta};
            detail::require(*r.r > 0.0, "r > 0");
            const double br = r.beta * *r.r;
            return {1.0 + (r.m - 1) * br / std::tanh(br), "beta > 0", r.beta};
          }
          if (r.variant == 2) {
            detail::require(r.eps > 0.0, "eps > 0");
            detail::require(r.B >= 0.0 && r.B < 2.0 * r.eps, "0 <= B < 2 eps");
            return {r.m * (1.0 - r.B / (2.0 * r.eps)), "0 <= B < 2 eps", 2.0 * r.eps - r.B};
          }
          if (r.variant == 3) {
            detail::require(r.b * r.b <= 0.25, "b^2 <= 1/4");
            return {r.m * (1.0 + std::sqrt(1.0 - 4.0 * r.b * r.b)) / 2.0, "b^2 <= 1/4", 0.25 - r.b * r.b};
          }
          fail(ErrorCode::InvalidArgument, "volume regime variant must be 1, 2 or 3");
        }
      },
      regime);
}

// ---------------------------------------------------------------------------

struct EigenBound {
  double value;
  std::string branch;
};

/// Lower bound on sum lambda_i - 2p lambda_max (real, dimension m) or on
/// sum eps_i - p eps_max (complex, complex dimension m) for Hess(r^2), given
/// h1 (g - dr dr) <= Hess r <= h2 (g - dr dr).
inline EigenBound hessian_r2_eigen_bounds(double h1, double h2, double r, int m, int p, ExhaustionKind kind) {
  if (!(h1 > 0.0) || !(h2 > 0.0)) fail(ErrorCode::BadBounds, "bounds must be positive");
  if (h1 > h2) fail(ErrorCode::BadBounds, "h1 exceeds h2");
  if (!(r > 0.0)) fail(ErrorCode::BadBounds, "r must be positive");
  const bool upper = r * h2 >= 1.0;
  if (kind == ExhaustionKind::real) {
    if (upper) return {2.0 + 2.0 * (m - 1) * r * h1 - 4.0 * p * r * h2, "r*h2>=1"};
    return {2.0 + 2.0 * (m - 1) * r * h1 - 4.0 * p, "r*h2<1"};
  }
  if (upper) return {1.0 + (2.0 * m - 1.0) * r * h1 - 2.0 * p * r * h2, "r*h2>=1"};
  return {1.0 + (2.0 * m - 1.0) * r * h1 - p * (1.0 + r * h2), "r*h2<1"};
}

}  // namespace stresslab

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "stresslab/forms.hpp"
#include "stresslab/quadrature.hpp"

namespace stresslab {

/// Both sides of the boundary/interior identity for S_w on {Phi < t}.
struct IntegralFormulaReport {
  double t = 0.0;
  Estimate lhs;  // boundary term: integral of S(X, nu) ds
  Estimate rhs;  // interior term: integral of <S, Hess(Psi)/2> + div S(X)
  double gap = 0.0;
  double relative_gap = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Flux of S_w(X, .) with X = grad(Psi)/2 through {Phi = t}.
inline Estimate boundary_flux(const BundleValuedForm& w, const ExhaustionFunction& exh, const Chart& chart, double t,
                              const QuadratureConfig& cfg = {}) {
  require_compatible(w, chart);
  return boundary_flux_integral(
      [&](const BoundaryPoint& bp) {
        const Mat S = stress_energy_at(w, chart, bp.x);
        const Vec grad = bp.ginv * bp.dpsi;
        return 0.5 * grad.dot(S * grad);
      },
      exh, chart, t, cfg);
}

inline Estimate interior_identity_integral(const BundleValuedForm& w, const ExhaustionFunction& exh, const Chart& chart,
                                           double t, const QuadratureConfig& cfg = {}) {
  require_compatible(w, chart);
  return region_integral(
      [&](const Vec& x) {
        const Mat g = chart.metric_raw(x);
        const Mat ginv = spd_inverse(g);
        const Mat S = stress_energy_at(w, chart, x);
        const Mat H = hessian_at(chart, exh.psi(), x);
        const Vec X = 0.5 * ginv * exh.psi().gradient(x);
        return 0.5 * tensor_inner(S, H, ginv) + div_stress_energy_identity(w, chart, x, X);
      },
      exh, chart, t, cfg);
}

inline IntegralFormulaReport verify_integral_formula(const BundleValuedForm& w, const ExhaustionFunction& exh,
                                                     const Chart& chart, double t, const QuadratureConfig& cfg = {}) {
  IntegralFormulaReport r;
  r.t = t;
  r.lhs = boundary_flux(w, exh, chart, t, cfg);
  r.rhs = interior_identity_integral(w, exh, chart, t, cfg);
  r.gap = std::abs(r.lhs.value - r.rhs.value);
  r.relative_gap = r.gap / std::max({std::abs(r.lhs.value), std::abs(r.rhs.value), 1e-300});
  r.tolerance = 3.0 * (r.lhs.error + r.rhs.error);
  r.pass = r.gap <= r.tolerance;
  return r;
}

// ---------------------------------------------------------------------------

struct MonotonicityRow {
  double rho = 0.0;
  double raw = 0.0;
  double raw_err = 0.0;
  double scaled = 0.0;
  double err = 0.0;
};

struct BoundaryCondition {
  double R0 = 0.0;
  double min_slack = 0.0;  // min over the sample of |w|^2/2 - |i_nu w|^2
  std::size_t sample_size = 0;
  bool holds = false;
};

struct MonotonicityReport {
  std::string label;
  double lambda_used = 0.0;
  std::vector<MonotonicityRow> rows;
  bool nondecreasing = true;
  std::vector<int> violations;  // i such that the pair (i, i+1) violates
  double slack = 0.0;
  bool strictly_increasing = true;
  bool constant_within_error = true;
  double tolerance_factor = 3.0;
  std::optional<BoundaryCondition> boundary_condition;
};

inline std::vector<double> geometric_grid(double lo, double hi, int n = 12) {
  if (!(lo > 0.0) || !(hi >= lo) || n < 1) fail(ErrorCode::InvalidArgument, "geometric grid needs 0 < lo <= hi, n >= 1");
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(n == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  return out;
}

/// Verdicts from the rows alone.
inline void classify(MonotonicityReport& rep, double floor = 1e-12) {
  const auto& r = rep.rows;
  rep.nondecreasing = true;
  rep.strictly_increasing = true;
  rep.constant_within_error = true;
  rep.violations.clear();
  rep.slack = r.size() < 2 ? 0.0 : std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    const double d = r[i + 1].scaled - r[i].scaled;
    const double tol = rep.tolerance_factor * (r[i].err + r[i + 1].err);
    if (d < -tol) {
      rep.nondecreasing = false;
      rep.violations.push_back(static_cast<int>(i));
    }
    if (!(d > 0.0)) rep.strictly_increasing = false;
    rep.slack = std::min(rep.slack, d / std::max(std::abs(r[i].scaled), floor));
  }
  for (std::size_t i = 1; i < r.size(); ++i)
    if (std::abs(r[i].scaled - r[0].scaled) > rep.tolerance_factor * (r[i].err + r[0].err))
      rep.constant_within_error = false;
}

inline void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) fail(ErrorCode::InvalidArgument, "empty radius grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0)) fail(ErrorCode::InvalidArgument, "radii must be positive");
    if (i > 0 && !(grid[i] > grid[i - 1])) fail(ErrorCode::InvalidArgument, "radii must increase");
  }
}

/// rho -> rho^{-lambda} * integral over {Phi < rho} of density dv.
inline MonotonicityReport ratio_scan(const std::function<double(const Vec&)>& density, const ExhaustionFunction& exh,
                                     const Chart& chart, double lambda, const std::vector<double>& grid,
                                     const QuadratureConfig& cfg = {}, std::string label = "") {
  check_grid(grid);
  MonotonicityReport rep;
  rep.label = std::move(label);
  rep.lambda_used = lambda;
  for (double rho : grid) {
    const Estimate e = region_integral(density, exh, chart, rho, cfg);
    const double scale = std::pow(rho, -lambda);
    rep.rows.push_back({rho, e.value, e.error, e.value * scale, e.error * scale});
  }
  classify(rep);
  return rep;
}

inline MonotonicityReport ratio_scan(const BundleValuedForm& w, const ExhaustionFunction& exh, const Chart& chart,
                                     double lambda, const std::vector<double>& grid, const QuadratureConfig& cfg = {}) {
  require_compatible(w, chart);
  return ratio_scan([&](const Vec& x) { return norm_sq(w, chart, x); }, exh, chart, lambda, grid, cfg, w.label());
}

/// min over {Phi = R0} of |w|^2/2 - |i_nu w|^2.
inline BoundaryCondition annulus_boundary_condition(const BundleValuedForm& w, const ExhaustionFunction& exh,
                                                    const Chart& chart, double R0, const QuadratureConfig& cfg = {}) {
  const auto pts = boundary_points(exh, chart, R0, cfg, boundary_ray_count(chart, cfg));
  BoundaryCondition bc;
  bc.R0 = R0;
  bc.sample_size = pts.size();
  bc.min_slack = std::numeric_limits<double>::infinity();
  for (const auto& bp : pts) {
    const FormValue v = w.value(bp.x);
    const double n2 = form_inner(v, v, bp.ginv);
    const FormValue iv = interior(v, bp.normal);
    const double in2 = w.degree() == 0 ? 0.0 : form_inner(iv, iv, bp.ginv);
    bc.min_slack = std::min(bc.min_slack, 0.5 * n2 - in2);
  }
  if (pts.empty()) fail(ErrorCode::EmptySample, "no boundary rays reach the level set");
  bc.holds = bc.min_slack >= -1e-12 * std::max(1.0, std::abs(bc.min_slack));
  return bc;
}

/// rho -> rho^{-lambda} * integral over {R0 <= Phi < rho} of |w|^2 dv.
inline MonotonicityReport annulus_ratio_scan(const BundleValuedForm& w, const ExhaustionFunction& exh,
                                             const Chart& chart, double R0, double lambda,
                                             const std::vector<double>& grid, const QuadratureConfig& cfg = {}) {
  require_compatible(w, chart);
  check_grid(grid);
  if (!(grid.front() > R0)) fail(ErrorCode::InvalidArgument, "annulus radii must exceed R0");
  auto density = [&](const Vec& x) { return norm_sq(w, chart, x); };
  const Estimate inner = region_integral(density, exh, chart, R0, cfg);
  MonotonicityReport rep;
  rep.label = w.label();
  rep.lambda_used = lambda;
  for (double rho : grid) {
    const Estimate e = region_integral(density, exh, chart, rho, cfg);
    const double raw = e.value - inner.value;
    const double err = e.error + inner.error;
    const double scale = std::pow(rho, -lambda);
    rep.rows.push_back({rho, raw, err, raw * scale, err * scale});
  }
  classify(rep);
  rep.boundary_condition = annulus_boundary_condition(w, exh, chart, R0, cfg);
  return rep;
}

}  // namespace stresslab

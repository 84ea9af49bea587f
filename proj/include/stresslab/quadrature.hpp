#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stresslab/chart.hpp"
#include "stresslab/exhaustion.hpp"
#include "stresslab/parallel.hpp"

namespace stresslab {

inline constexpr double kPi = 3.14159265358979323846;

struct QuadratureConfig {
  /// Nodes per axis of the fine rule is resolution / 2; the error estimate
  /// comes from the rule at half that.
  int resolution = 64;
  /// Ray directions for level-set integrals; 0 selects 2000 (m = 2, 3).
  int boundary_rays = 0;
  std::optional<Vec> center;
  int threads = default_threads();
  int march_samples = 64;
  double critical_cutoff = 1e-8;

  void validate() const {
    if (resolution < 16) fail(ErrorCode::InvalidArgument, "quadrature resolution must be >= 16");
    if (boundary_rays != 0 && boundary_rays < 16) fail(ErrorCode::InvalidArgument, "boundary_rays must be >= 16");
    if (march_samples < 4) fail(ErrorCode::InvalidArgument, "march_samples must be >= 4");
  }
};

/// Integral value with a one-step refinement error estimate.
struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
inline GaussRule gauss_legendre(int n) {
  GaussRule r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    r.nodes[static_cast<std::size_t>(i)] = -z;
    r.nodes[static_cast<std::size_t>(n - 1 - i)] = z;
    r.weights[static_cast<std::size_t>(i)] = w;
    r.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  return r;
}

/// Quadrature on the unit sphere S^{m-1} of coordinate space.
struct SphereRule {
  std::vector<Vec> dirs;
  std::vector<double> weights;
};

/// m = 2: n_azimuth uniform nodes. m >= 3: n_polar Gauss nodes on every polar
/// angle (with sin^k weights) times n_azimuth uniform azimuth nodes.
inline SphereRule sphere_rule(int m, int n_polar, int n_azimuth) {
  SphereRule s;
  if (m == 1) {
    s.dirs = {Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)};
    s.weights = {1.0, 1.0};
    return s;
  }
  std::vector<double> az(static_cast<std::size_t>(n_azimuth));
  for (int k = 0; k < n_azimuth; ++k) az[static_cast<std::size_t>(k)] = 2.0 * kPi * (k + 0.5) / n_azimuth;
  const double waz = 2.0 * kPi / n_azimuth;
  if (m == 2) {
    for (double phi : az) {
      Vec d(2);
      d << std::cos(phi), std::sin(phi);
      s.dirs.push_back(d);
      s.weights.push_back(waz);
    }
    return s;
  }
  const GaussRule gl = gauss_legendre(n_polar);
  const int n_angles = m - 2;
  std::vector<int> counter(static_cast<std::size_t>(n_angles), 0);
  while (true) {
    double w = 1.0;
    double sin_prod = 1.0;
    Vec d(m);
    for (int i = 0; i < n_angles; ++i) {
      const auto ci = static_cast<std::size_t>(counter[static_cast<std::size_t>(i)]);
      const double psi = 0.5 * kPi * (gl.nodes[ci] + 1.0);
      w *= 0.5 * kPi * gl.weights[ci] * std::pow(std::sin(psi), m - 2 - i);
      d[i] = sin_prod * std::cos(psi);
      sin_prod *= std::sin(psi);
    }
    for (double phi : az) {
      Vec e = d;
      e[m - 2] = sin_prod * std::cos(phi);
      e[m - 1] = sin_prod * std::sin(phi);
      s.dirs.push_back(e);
      s.weights.push_back(w * waz);
    }
    int i = n_angles - 1;
    while (i >= 0 && ++counter[static_cast<std::size_t>(i)] == n_polar) {
      counter[static_cast<std::size_t>(i)] = 0;
      --i;
    }
    if (i < 0) break;
  }
  return s;
}

namespace detail {

/// Angular node count per polar axis for a volume rule at resolution n.
inline int polar_nodes(int m, int n) { return m <= 3 ? n : std::max(4, n / 2); }

inline SphereRule volume_sphere_rule(int m, int n) {
  const int np = polar_nodes(m, n);
  return sphere_rule(m, np, m == 2 ? 2 * n : 2 * np);
}

inline SphereRule boundary_sphere_rule(int m, int rays) {
  if (m == 2) return sphere_rule(2, 0, rays);
  if (m == 3) {
    const int n = std::max(4, static_cast<int>(std::lround(std::sqrt(rays / 2.0))));
    return sphere_rule(3, n, 2 * n);
  }
  const int n = std::max(4, static_cast<int>(std::lround(std::pow(rays / 2.0, 1.0 / (m - 1)))));
  return sphere_rule(m, n, 2 * n);
}

inline int default_boundary_rays(int m) { return m == 2 ? 2000 : (m == 3 ? 2000 : 4000); }

}  // namespace detail

/// Where a ray from the center leaves the sublevel set {Psi < t^2}.
struct RayHit {
  double R = 0.0;
  bool crossed = false;  // false: clipped at a periodic face of the box
};

inline RayHit solve_ray(const ExhaustionFunction& exh, const Chart& chart, const Vec& c, const Vec& dir, double t,
                        const QuadratureConfig& cfg) {
  const double t2 = t * t;
  auto f = [&](double s) { return exh.psi().value(c + s * dir) - t2; };
  int axis = -1;
  const double s_max = chart.box().exit_distance(c, dir, &axis);
  if (!std::isfinite(s_max) || axis < 0) fail(ErrorCode::InvalidArgument, "degenerate ray direction");
  const int K = cfg.march_samples;
  double prev_s = 0.0;
  double prev_f = f(0.0);
  if (!(prev_f < 0.0)) fail(ErrorCode::InvalidArgument, "star center is not inside the sublevel set");
  int changes = 0;
  double lo = 0.0, hi = 0.0;
  for (int i = 1; i <= K; ++i) {
    const double s = s_max * i / K;
    const double v = f(s);
    if ((prev_f < 0.0) != (v < 0.0)) {
      ++changes;
      if (changes == 1) {
        lo = prev_s;
        hi = s;
      }
    }
    prev_s = s;
    prev_f = v;
  }
  if (changes >= 2) fail(ErrorCode::NotStarShaped, "a ray crosses the level set " + std::to_string(changes) + " times");
  if (changes == 0) {
    if (chart.box().periodic[static_cast<std::size_t>(axis)]) return {s_max, false};
    fail(ErrorCode::LevelSetTouchesBoundary, "sublevel set reaches the edge of the chart box");
  }
  const double tol = 1e-12 * std::max(1.0, s_max);
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < 0.0) lo = mid;
    else hi = mid;
  }
  return {0.5 * (lo + hi), true};
}

namespace detail {

inline Vec resolve_center(const ExhaustionFunction& exh, const QuadratureConfig& cfg) {
  return cfg.center ? *cfg.center : exh.center();
}

struct RuleResult {
  double value;
  double abs_value;
};

inline RuleResult region_rule(const std::function<double(const Vec&)>& density, const ExhaustionFunction& exh,
                              const Chart& chart, double t, const QuadratureConfig& cfg, int n) {
  const int m = chart.dim();
  const Vec c = resolve_center(exh, cfg);
  const SphereRule sph = volume_sphere_rule(m, n);
  const GaussRule gl = gauss_legendre(n);
  std::vector<double> vals(sph.dirs.size()), absv(sph.dirs.size());
  parallel_for(sph.dirs.size(), cfg.threads, [&](std::size_t k) {
    const RayHit hit = solve_ray(exh, chart, c, sph.dirs[k], t, cfg);
    double s_val = 0.0, s_abs = 0.0;
    for (int i = 0; i < n; ++i) {
      const double s = 0.5 * hit.R * (gl.nodes[static_cast<std::size_t>(i)] + 1.0);
      const double w = 0.5 * hit.R * gl.weights[static_cast<std::size_t>(i)];
      const Vec x = c + s * sph.dirs[k];
      const double vol = std::sqrt(chart.metric_raw(x).determinant());
      const double f = density(x) * vol * std::pow(s, m - 1) * w;
      s_val += f;
      s_abs += std::abs(f);
    }
    vals[k] = sph.weights[k] * s_val;
    absv[k] = sph.weights[k] * s_abs;
  });
  return {tree_sum(vals), tree_sum(absv)};
}

inline Estimate combine(const RuleResult& fine, const RuleResult& coarse) {
  const double err = std::max({std::abs(fine.value - coarse.value), 1e-10 * fine.abs_value, 1e-14});
  return {fine.value, err};
}

}  // namespace detail

/// Integral of density * sqrt(det g) over {Phi < t}, in polar form about the
/// star center with Gauss radial nodes.
inline Estimate region_integral(const std::function<double(const Vec&)>& density, const ExhaustionFunction& exh,
                                const Chart& chart, double t, const QuadratureConfig& cfg = {}) {
  cfg.validate();
  if (!(t > 0.0)) fail(ErrorCode::InvalidArgument, "sublevel value must be positive");
  const int n = cfg.resolution / 2;
  return detail::combine(detail::region_rule(density, exh, chart, t, cfg, n),
                         detail::region_rule(density, exh, chart, t, cfg, n / 2));
}

/// A point of the level set {Phi = t} reached by one ray.
struct BoundaryPoint {
  Vec x;
  Vec dpsi;
  Mat g;
  Mat ginv;
  Vec normal;          // g-unit outward normal (vector)
  double weight = 0.0; // sphere weight * sqrt(det g) * R^{m-1} / (dPsi . dir)
};

inline std::vector<BoundaryPoint> boundary_points(const ExhaustionFunction& exh, const Chart& chart, double t,
                                                  const QuadratureConfig& cfg, int rays) {
  const int m = chart.dim();
  const Vec c = detail::resolve_center(exh, cfg);
  const SphereRule sph = detail::boundary_sphere_rule(m, rays);
  std::vector<std::optional<BoundaryPoint>> slots(sph.dirs.size());
  parallel_for(sph.dirs.size(), cfg.threads, [&](std::size_t k) {
    const RayHit hit = solve_ray(exh, chart, c, sph.dirs[k], t, cfg);
    if (!hit.crossed) return;
    BoundaryPoint bp;
    bp.x = c + hit.R * sph.dirs[k];
    bp.dpsi = exh.psi().gradient(bp.x);
    bp.g = chart.metric_raw(bp.x);
    bp.ginv = spd_inverse(bp.g);
    const double denom = bp.dpsi.dot(sph.dirs[k]);
    const double grad_norm = std::sqrt(bp.dpsi.dot(bp.ginv * bp.dpsi));
    if (!(denom > 0.0) || grad_norm / (2.0 * t) < cfg.critical_cutoff)
      fail(ErrorCode::NonRegularValue, "level value is not regular along a boundary ray");
    bp.normal = bp.ginv * bp.dpsi / grad_norm;
    bp.weight = sph.weights[k] * std::sqrt(bp.g.determinant()) * std::pow(hit.R, m - 1) / denom;
    slots[k] = std::move(bp);
  });
  std::vector<BoundaryPoint> out;
  for (auto& s : slots)
    if (s) out.push_back(std::move(*s));
  return out;
}

inline int boundary_ray_count(const Chart& chart, const QuadratureConfig& cfg) {
  return cfg.boundary_rays > 0 ? cfg.boundary_rays : detail::default_boundary_rays(chart.dim());
}

/// Integral over {Phi = t} of q / |grad Psi|_g, where q(point) is supplied in
/// the form dPsi(Y) for the flux of a vector field Y.
inline Estimate boundary_flux_integral(const std::function<double(const BoundaryPoint&)>& q,
                                       const ExhaustionFunction& exh, const Chart& chart, double t,
                                       const QuadratureConfig& cfg = {}) {
  cfg.validate();
  const int rays = boundary_ray_count(chart, cfg);
  auto run = [&](int nrays) {
    const auto pts = boundary_points(exh, chart, t, cfg, nrays);
    std::vector<double> v(pts.size()), a(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      v[i] = pts[i].weight * q(pts[i]);
      a[i] = std::abs(v[i]);
    }
    return detail::RuleResult{tree_sum(v), tree_sum(a)};
  };
  return detail::combine(run(rays), run(rays / 2));
}

/// Integral of h ds_g over {Phi = t}.
inline Estimate boundary_scalar_integral(const std::function<double(const Vec&)>& h, const ExhaustionFunction& exh,
                                         const Chart& chart, double t, const QuadratureConfig& cfg = {}) {
  return boundary_flux_integral(
      [&](const BoundaryPoint& bp) { return h(bp.x) * std::sqrt(bp.dpsi.dot(bp.ginv * bp.dpsi)); }, exh, chart, t, cfg);
}

}  // namespace stresslab

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stresslab/errors.hpp"
#include "stresslab/linalg.hpp"

namespace stresslab {

enum class JetMode { analytic, finite_difference };

inline constexpr double kDefaultStepScale = 1e-4;

/// Central-difference step h = scale * max(1, |x|).
inline double fd_step(const Vec& x, double scale) { return scale * std::max(1.0, x.norm()); }

/// Axis-aligned coordinate box. Periodic axes are seams of the coordinate
/// patch (e.g. an angle); sublevel sets may be clipped there.
struct CoordinateBox {
  Vec lo;
  Vec hi;
  std::vector<bool> periodic;

  CoordinateBox() = default;
  CoordinateBox(Vec lower, Vec upper, std::vector<bool> periodic_axes = {})
      : lo(std::move(lower)), hi(std::move(upper)), periodic(std::move(periodic_axes)) {
    if (lo.size() != hi.size()) fail(ErrorCode::InvalidArgument, "box bounds differ in dimension");
    if (periodic.empty()) periodic.assign(static_cast<std::size_t>(lo.size()), false);
    for (Eigen::Index i = 0; i < lo.size(); ++i)
      if (!(lo[i] < hi[i])) fail(ErrorCode::InvalidArgument, "box has empty extent");
  }

  static CoordinateBox cube(int dim, double half_width) {
    return CoordinateBox(Vec::Constant(dim, -half_width), Vec::Constant(dim, half_width));
  }

  int dim() const { return static_cast<int>(lo.size()); }

  bool contains(const Vec& x, double slack = 1e-12) const {
    if (x.size() != lo.size()) return false;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double tol = slack * std::max(1.0, std::abs(hi[i] - lo[i]));
      if (!(x[i] >= lo[i] - tol && x[i] <= hi[i] + tol)) return false;
    }
    return true;
  }

  /// Distance along unit direction `dir` from interior point `c` to the box
  /// boundary; `axis` receives the index of the face that is hit.
  double exit_distance(const Vec& c, const Vec& dir, int* axis = nullptr) const {
    double best = std::numeric_limits<double>::infinity();
    int best_axis = -1;
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      if (dir[i] > 0.0) {
        const double s = (hi[i] - c[i]) / dir[i];
        if (s < best) { best = s; best_axis = static_cast<int>(i); }
      } else if (dir[i] < 0.0) {
        const double s = (lo[i] - c[i]) / dir[i];
        if (s < best) { best = s; best_axis = static_cast<int>(i); }
      }
    }
    if (axis) *axis = best_axis;
    return best;
  }
};

using MetricD1 = std::vector<Mat>;               // [k] -> d_k g
using MetricD2 = std::vector<std::vector<Mat>>;  // [k][l] -> d_k d_l g

/// A single coordinate patch carrying a Riemannian metric and optionally a
/// constant complex structure J (acting on coordinate vectors).
class Chart {
 public:
  using MetricFn = std::function<Mat(const Vec&)>;
  using MetricD1Fn = std::function<MetricD1(const Vec&)>;
  using MetricD2Fn = std::function<MetricD2(const Vec&)>;

  Chart(std::string id, int dim, CoordinateBox box, MetricFn metric, MetricD1Fn d1 = {}, MetricD2Fn d2 = {})
      : id_(std::move(id)), dim_(dim), box_(std::move(box)), metric_(std::move(metric)), d1_(std::move(d1)),
        d2_(std::move(d2)) {
    if (dim_ < 1) fail(ErrorCode::InvalidArgument, "chart dimension must be positive");
    if (box_.dim() != dim_) fail(ErrorCode::InvalidArgument, "chart box dimension mismatch");
    if (!metric_) fail(ErrorCode::InvalidArgument, "chart needs a metric");
  }

  const std::string& id() const { return id_; }
  int dim() const { return dim_; }
  const CoordinateBox& box() const { return box_; }
  JetMode jet_mode() const { return d1_ ? JetMode::analytic : JetMode::finite_difference; }
  double step_scale() const { return step_scale_; }
  const std::optional<Mat>& complex_structure() const { return complex_; }

  /// Copy of this chart that differentiates the metric numerically.
  Chart finite_difference(double step_scale = kDefaultStepScale) const {
    Chart c = *this;
    c.d1_ = {};
    c.d2_ = {};
    c.step_scale_ = step_scale;
    return c;
  }

  /// Copy carrying the constant complex structure `j`; requires J^2 = -I.
  Chart with_complex_structure(const Mat& j) const {
    if (dim_ % 2 != 0) fail(ErrorCode::NoComplexStructure, "complex structure needs even dimension");
    if (j.rows() != dim_ || j.cols() != dim_) fail(ErrorCode::InvalidArgument, "complex structure has wrong shape");
    if ((j * j + Mat::Identity(dim_, dim_)).cwiseAbs().maxCoeff() > 1e-9)
      fail(ErrorCode::NoComplexStructure, "J^2 != -I");
    Chart c = *this;
    c.complex_ = j;
    return c;
  }

  Chart renamed(std::string id) const {
    Chart c = *this;
    c.id_ = std::move(id);
    return c;
  }

  void require_in_domain(const Vec& x) const {
    if (x.size() != dim_) fail(ErrorCode::OutOfDomain, "point has dimension " + std::to_string(x.size()));
    if (!box_.contains(x)) fail(ErrorCode::OutOfDomain, "point outside the domain box of chart '" + id_ + "'");
  }

  Mat metric(const Vec& x) const {
    require_in_domain(x);
    return metric_raw(x);
  }

  MetricD1 metric_d1(const Vec& x) const {
    require_in_domain(x);
    return metric_d1_raw(x);
  }

  MetricD2 metric_d2(const Vec& x) const {
    require_in_domain(x);
    if (d2_) return d2_(x);
    const double h = fd_step(x, step_scale_);
    MetricD2 out(static_cast<std::size_t>(dim_), MetricD1(static_cast<std::size_t>(dim_)));
    if (d1_) {
      for (int l = 0; l < dim_; ++l) {
        Vec xp = x, xm = x;
        xp[l] += h;
        xm[l] -= h;
        const MetricD1 dp = d1_(xp), dm = d1_(xm);
        for (int k = 0; k < dim_; ++k) out[k][l] = (dp[k] - dm[k]) / (2.0 * h);
      }
      for (int k = 0; k < dim_; ++k)
        for (int l = k + 1; l < dim_; ++l) {
          const Mat avg = 0.5 * (out[k][l] + out[l][k]);
          out[k][l] = avg;
          out[l][k] = avg;
        }
      return out;
    }
    const Mat g0 = metric_(x);
    for (int k = 0; k < dim_; ++k) {
      for (int l = k; l < dim_; ++l) {
        Mat val;
        if (k == l) {
          Vec xp = x, xm = x;
          xp[k] += h;
          xm[k] -= h;
          val = (metric_(xp) - 2.0 * g0 + metric_(xm)) / (h * h);
        } else {
          Vec pp = x, pm = x, mp = x, mm = x;
          pp[k] += h; pp[l] += h;
          pm[k] += h; pm[l] -= h;
          mp[k] -= h; mp[l] += h;
          mm[k] -= h; mm[l] -= h;
          val = (metric_(pp) - metric_(pm) - metric_(mp) + metric_(mm)) / (4.0 * h * h);
        }
        out[k][l] = val;
        out[l][k] = val;
      }
    }
    return out;
  }

  /// Metric evaluation without the domain check (stencil points may sit just
  /// outside the box).
  Mat metric_raw(const Vec& x) const {
    Mat g = metric_(x);
    return 0.5 * (g + g.transpose());
  }

  MetricD1 metric_d1_raw(const Vec& x) const {
    if (d1_) return d1_(x);
    const double h = fd_step(x, step_scale_);
    MetricD1 out(static_cast<std::size_t>(dim_));
    for (int k = 0; k < dim_; ++k) {
      Vec xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      out[k] = (metric_(xp) - metric_(xm)) / (2.0 * h);
    }
    return out;
  }

 private:
  std::string id_;
  int dim_;
  CoordinateBox box_;
  MetricFn metric_;
  MetricD1Fn d1_;
  MetricD2Fn d2_;
  double step_scale_ = kDefaultStepScale;
  std::optional<Mat> complex_;
};

/// A real function on a chart with analytic or finite-difference jets.
class ScalarField {
 public:
  using ValueFn = std::function<double(const Vec&)>;
  using GradFn = std::function<Vec(const Vec&)>;
  using HessFn = std::function<Mat(const Vec&)>;

  static ScalarField analytic(std::string label, ValueFn f, GradFn grad, HessFn hess) {
    ScalarField s;
    s.label_ = std::move(label);
    s.f_ = std::move(f);
    s.grad_ = std::move(grad);
    s.hess_ = std::move(hess);
    return s;
  }

  static ScalarField sampled(std::string label, ValueFn f, double step_scale = kDefaultStepScale) {
    ScalarField s;
    s.label_ = std::move(label);
    s.f_ = std::move(f);
    s.step_scale_ = step_scale;
    return s;
  }

  ScalarField finite_difference(double step_scale = kDefaultStepScale) const {
    return sampled(label_, f_, step_scale);
  }

  const std::string& label() const { return label_; }
  JetMode jet_mode() const { return grad_ && hess_ ? JetMode::analytic : JetMode::finite_difference; }

  double value(const Vec& x) const { return f_(x); }

  Vec gradient(const Vec& x) const {
    if (grad_) return grad_(x);
    const double h = fd_step(x, step_scale_);
    Vec g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      Vec xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      g[i] = (f_(xp) - f_(xm)) / (2.0 * h);
    }
    return g;
  }

  /// Raw coordinate second derivatives (9-point cross stencil when sampled).
  Mat coordinate_hessian(const Vec& x) const {
    if (hess_) {
      Mat h = hess_(x);
      return 0.5 * (h + h.transpose());
    }
    const Eigen::Index n = x.size();
    const double h = fd_step(x, step_scale_);
    const double f0 = f_(x);
    Mat out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      Vec xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      out(i, i) = (f_(xp) - 2.0 * f0 + f_(xm)) / (h * h);
      for (Eigen::Index j = i + 1; j < n; ++j) {
        Vec pp = x, pm = x, mp = x, mm = x;
        pp[i] += h; pp[j] += h;
        pm[i] += h; pm[j] -= h;
        mp[i] -= h; mp[j] += h;
        mm[i] -= h; mm[j] -= h;
        out(i, j) = (f_(pp) - f_(pm) - f_(mp) + f_(mm)) / (4.0 * h * h);
        out(j, i) = out(i, j);
      }
    }
    return out;
  }

 private:
  ScalarField() = default;
  std::string label_;
  ValueFn f_;
  GradFn grad_;
  HessFn hess_;
  double step_scale_ = kDefaultStepScale;
};

/// Levi-Civita connection coefficients; upper[k](i, j) = Gamma^k_{ij}.
struct Christoffel {
  std::vector<Mat> upper;
  double operator()(int k, int i, int j) const { return upper[static_cast<std::size_t>(k)](i, j); }
  int dim() const { return static_cast<int>(upper.size()); }
};

inline Christoffel christoffel_from_jets(const Mat& g, const MetricD1& dg) {
  const int m = static_cast<int>(g.rows());
  const Mat ginv = spd_inverse(g);
  // lowered[l](i,j) = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
  std::vector<Mat> lowered(static_cast<std::size_t>(m), Mat::Zero(m, m));
  for (int l = 0; l < m; ++l)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        lowered[l](i, j) = 0.5 * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
  Christoffel out;
  out.upper.assign(static_cast<std::size_t>(m), Mat::Zero(m, m));
  for (int k = 0; k < m; ++k)
    for (int l = 0; l < m; ++l) {
      const double gkl = ginv(k, l);
      if (gkl != 0.0) out.upper[k] += gkl * lowered[l];
    }
  for (auto& gk : out.upper) gk = 0.5 * (gk + gk.transpose());
  return out;
}

inline Christoffel christoffel_at(const Chart& chart, const Vec& x) {
  const Mat g = chart.metric(x);
  return christoffel_from_jets(g, chart.metric_d1(x));
}

inline double gradient_norm_sq(const Chart& chart, const ScalarField& field, const Vec& x) {
  const Vec df = field.gradient(x);
  return df.dot(spd_inverse(chart.metric(x)) * df);
}

/// Covariant Hessian d_i d_j f - Gamma^k_ij d_k f.
inline Mat hessian_at(const Chart& chart, const ScalarField& field, const Vec& x) {
  const Christoffel gamma = christoffel_at(chart, x);
  const Vec df = field.gradient(x);
  Mat h = field.coordinate_hessian(x);
  for (int k = 0; k < chart.dim(); ++k) h -= df[k] * gamma.upper[k];
  return 0.5 * (h + h.transpose());
}

inline double laplace_beltrami_at(const Chart& chart, const ScalarField& field, const Vec& x) {
  const Mat ginv = spd_inverse(chart.metric(x));
  return ginv.cwiseProduct(hessian_at(chart, field, x)).sum();
}

/// Eigenvalues of Hess(f) relative to g, ascending.
inline std::vector<double> hessian_spectrum(const Chart& chart, const ScalarField& field, const Vec& x,
                                            const JacobiOptions& opt = {}) {
  return generalized_eigenvalues(hessian_at(chart, field, x), chart.metric(x), opt);
}

/// Max entrywise violation of J^T g J = g (and J^2 = -I) at x.
inline double complex_structure_defect(const Chart& chart, const Vec& x) {
  if (!chart.complex_structure()) fail(ErrorCode::NoComplexStructure, "chart '" + chart.id() + "' has no J");
  const Mat& j = *chart.complex_structure();
  const Mat g = chart.metric(x);
  const double orth = (j.transpose() * g * j - g).cwiseAbs().maxCoeff();
  const double square = (j * j + Mat::Identity(chart.dim(), chart.dim())).cwiseAbs().maxCoeff();
  return std::max(orth, square);
}

/// Eigenvalues of the J-symmetrized Hessian (H + J^T H J)/2 relative to g.
/// They come in equal pairs; one value per pair is returned, ascending.
inline std::vector<double> complex_hessian_spectrum(const Chart& chart, const ScalarField& field, const Vec& x,
                                                    const JacobiOptions& opt = {}) {
  if (!chart.complex_structure()) fail(ErrorCode::NoComplexStructure, "chart '" + chart.id() + "' has no J");
  const bool analytic = chart.jet_mode() == JetMode::analytic && field.jet_mode() == JetMode::analytic;
  const Mat g = chart.metric(x);
  const double compat_tol = (analytic ? 1e-9 : 1e-5) * std::max(1.0, g.cwiseAbs().maxCoeff());
  if (complex_structure_defect(chart, x) > compat_tol)
    fail(ErrorCode::NoComplexStructure, "J is not g-orthogonal at the sample point");
  const Mat& j = *chart.complex_structure();
  const Mat h = hessian_at(chart, field, x);
  const Mat hs = 0.5 * (h + j.transpose() * h * j);
  const std::vector<double> all = generalized_eigenvalues(hs, g, opt);
  double scale = 1.0;
  for (double v : all) scale = std::max(scale, std::abs(v));
  const double pair_tol = (analytic ? 1e-7 : 1e-3) * scale;
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < all.size(); i += 2) {
    if (std::abs(all[i] - all[i + 1]) > pair_tol)
      fail(ErrorCode::MultiplicityMismatch, "J-symmetrized Hessian eigenvalues are not paired");
    out.push_back(0.5 * (all[i] + all[i + 1]));
  }
  return out;
}

/// Max over (k,i,j) of |d_k g_ij - Gamma^l_ki g_lj - Gamma^l_kj g_il|, where
/// d_k g comes from a fourth-order stencil on metric values (independent of
/// the chart jets) and Gamma from the chart jets. Scaled by max(1, |g|_max).
inline double metric_compatibility_residual(const Chart& chart, const Vec& x) {
  const int m = chart.dim();
  const Mat g = chart.metric(x);
  const Christoffel gamma = christoffel_at(chart, x);
  const double h = 1e-3 * std::max(1.0, x.norm());
  double worst = 0.0;
  for (int k = 0; k < m; ++k) {
    Vec p1 = x, p2 = x, m1 = x, m2 = x;
    p1[k] += h; p2[k] += 2 * h;
    m1[k] -= h; m2[k] -= 2 * h;
    const Mat dk = (-chart.metric_raw(p2) + 8.0 * chart.metric_raw(p1) - 8.0 * chart.metric_raw(m1) +
                    chart.metric_raw(m2)) / (12.0 * h);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        double rhs = 0.0;
        for (int l = 0; l < m; ++l) rhs += gamma(l, k, i) * g(l, j) + gamma(l, k, j) * g(i, l);
        worst = std::max(worst, std::abs(dk(i, j) - rhs));
      }
  }
  return worst / std::max(1.0, g.cwiseAbs().maxCoeff());
}

}  // namespace stresslab

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stresslab/chart.hpp"
#include "stresslab/exhaustion.hpp"
#include "stresslab/forms.hpp"
#include "stresslab/monotonicity.hpp"
#include "stresslab/quadrature.hpp"

namespace stresslab {

/// A parameterized map u: box in R^m -> R^N with a base point o.
class Immersion {
 public:
  using MapFn = std::function<Vec(const Vec&)>;
  using D1Fn = std::function<Mat(const Vec&)>;               // N x m
  using D2Fn = std::function<std::vector<Vec>(const Vec&)>;  // [i * m + j] -> d_i d_j u

  Immersion(std::string id, int m, int N, CoordinateBox box, MapFn u, D1Fn du = {}, D2Fn ddu = {})
      : id_(std::move(id)), m_(m), N_(N), box_(std::move(box)), u_(std::move(u)), du_(std::move(du)),
        ddu_(std::move(ddu)), base_(Vec::Zero(N)), center_(Vec::Zero(m)) {
    if (m_ < 1 || N_ < m_) fail(ErrorCode::InvalidArgument, "immersion needs 1 <= m <= N");
    if (box_.dim() != m_) fail(ErrorCode::InvalidArgument, "immersion box dimension mismatch");
  }

  const std::string& id() const { return id_; }
  int dim() const { return m_; }
  int ambient_dim() const { return N_; }
  const CoordinateBox& box() const { return box_; }
  const Vec& base_point() const { return base_; }
  /// Parameter point about which extrinsic balls are star-shaped.
  const Vec& center() const { return center_; }
  const std::optional<Mat>& complex_structure() const { return J_; }
  JetMode jet_mode() const { return du_ && ddu_ ? JetMode::analytic : JetMode::finite_difference; }

  Immersion with_base_point(Vec o) const {
    Immersion c = *this;
    if (o.size() != N_) fail(ErrorCode::InvalidArgument, "base point has the wrong dimension");
    c.base_ = std::move(o);
    return c;
  }
  Immersion with_center(Vec x) const {
    Immersion c = *this;
    c.center_ = std::move(x);
    return c;
  }
  /// Constant complex structure on the parameter domain.
  Immersion with_complex_structure(const Mat& J) const {
    if (m_ % 2 != 0) fail(ErrorCode::NoComplexStructure, "odd parameter dimension");
    if ((J * J + Mat::Identity(m_, m_)).cwiseAbs().maxCoeff() > 1e-12) fail(ErrorCode::NoComplexStructure, "J^2 != -I");
    Immersion c = *this;
    c.J_ = J;
    return c;
  }
  Immersion finite_difference() const {
    Immersion c = *this;
    c.du_ = {};
    c.ddu_ = {};
    return c;
  }

  Vec position(const Vec& x) const { return u_(x); }

  Mat tangent(const Vec& x) const {
    if (du_) return du_(x);
    const double h = fd_step(x, 1e-5);
    Mat d(N_, m_);
    for (int i = 0; i < m_; ++i) {
      Vec xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      d.col(i) = (u_(xp) - u_(xm)) / (2.0 * h);
    }
    return d;
  }

  std::vector<Vec> second(const Vec& x) const {
    if (ddu_) return ddu_(x);
    const double h = fd_step(x, kDefaultStepScale);
    std::vector<Vec> out(static_cast<std::size_t>(m_ * m_));
    const Vec u0 = u_(x);
    for (int i = 0; i < m_; ++i) {
      Vec xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      out[static_cast<std::size_t>(i * m_ + i)] = (u_(xp) - 2.0 * u0 + u_(xm)) / (h * h);
      for (int j = i + 1; j < m_; ++j) {
        Vec pp = x, pm = x, mp = x, mm = x;
        pp[i] += h; pp[j] += h;
        pm[i] += h; pm[j] -= h;
        mp[i] -= h; mp[j] += h;
        mm[i] -= h; mm[j] -= h;
        const Vec v = (u_(pp) - u_(pm) - u_(mp) + u_(mm)) / (4.0 * h * h);
        out[static_cast<std::size_t>(i * m_ + j)] = v;
        out[static_cast<std::size_t>(j * m_ + i)] = v;
      }
    }
    return out;
  }

 private:
  std::string id_;
  int m_;
  int N_;
  CoordinateBox box_;
  MapFn u_;
  D1Fn du_;
  D2Fn ddu_;
  Vec base_;
  Vec center_;
  std::optional<Mat> J_;
};

/// Pointwise extrinsic data. A[i*m+j] is the normal part of d_i d_j u.
struct InducedGeometry {
  Mat tangent;  // N x m
  Mat g;
  Mat ginv;
  Mat normal_projector;  // N x N
  std::vector<Vec> A;
  Vec H;
  double A_norm_sq = 0.0;

  Vec A_of(const Vec& X, const Vec& Y) const {
    const auto m = X.size();
    Vec out = Vec::Zero(A.front().size());
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j)
        if (X[i] != 0.0 && Y[j] != 0.0) out += X[i] * Y[j] * A[static_cast<std::size_t>(i * m + j)];
    return out;
  }
};

inline InducedGeometry induced_geometry_at(const Immersion& imm, const Vec& x) {
  if (!imm.box().contains(x)) fail(ErrorCode::OutOfDomain, "point outside the parameter box of '" + imm.id() + "'");
  const int m = imm.dim();
  InducedGeometry G;
  G.tangent = imm.tangent(x);
  G.g = G.tangent.transpose() * G.tangent;
  try {
    G.ginv = spd_inverse(G.g);
  } catch (const Error&) {
    fail(ErrorCode::DegenerateImmersion, "induced metric of '" + imm.id() + "' is degenerate");
  }
  if (G.g.determinant() < 1e-14 * std::max(1.0, std::pow(G.g.trace(), m)))
    fail(ErrorCode::DegenerateImmersion, "induced metric of '" + imm.id() + "' is degenerate");
  const int N = imm.ambient_dim();
  G.normal_projector = Mat::Identity(N, N) - G.tangent * G.ginv * G.tangent.transpose();
  const std::vector<Vec> dd = imm.second(x);
  G.A.resize(dd.size());
  for (std::size_t k = 0; k < dd.size(); ++k) G.A[k] = G.normal_projector * dd[k];
  G.H = Vec::Zero(N);
  G.A_norm_sq = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      G.H += G.ginv(i, j) * G.A[static_cast<std::size_t>(i * m + j)];
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
          G.A_norm_sq += G.ginv(i, a) * G.ginv(j, b) *
                         G.A[static_cast<std::size_t>(i * m + j)].dot(G.A[static_cast<std::size_t>(a * m + b)]);
    }
  return G;
}

/// The pulled-back metric as a chart. First metric derivatives are analytic
/// in the map jets; second derivatives are differenced from them.
inline Chart induced_chart(const Immersion& imm) {
  const int m = imm.dim();
  auto metric = [imm](const Vec& x) -> Mat {
    const Mat d = imm.tangent(x);
    return d.transpose() * d;
  };
  auto d1 = [imm, m](const Vec& x) {
    const Mat d = imm.tangent(x);
    const std::vector<Vec> dd = imm.second(x);
    MetricD1 out(static_cast<std::size_t>(m), Mat::Zero(m, m));
    for (int k = 0; k < m; ++k)
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          out[k](i, j) = dd[static_cast<std::size_t>(k * m + i)].dot(d.col(j)) +
                         d.col(i).dot(dd[static_cast<std::size_t>(k * m + j)]);
    return out;
  };
  Chart c("induced:" + imm.id(), m, imm.box(), metric, d1);
  if (imm.complex_structure()) c = c.with_complex_structure(*imm.complex_structure());
  return c;
}

/// Psi = |u - o|^2 with analytic jets from the map.
inline ExhaustionFunction extrinsic_exhaustion(const Immersion& imm) {
  const int m = imm.dim();
  auto psi = ScalarField::analytic(
      "rho^2",
      [imm](const Vec& x) { return (imm.position(x) - imm.base_point()).squaredNorm(); },
      [imm](const Vec& x) -> Vec { return 2.0 * imm.tangent(x).transpose() * (imm.position(x) - imm.base_point()); },
      [imm, m](const Vec& x) -> Mat {
        const Vec r = imm.position(x) - imm.base_point();
        const Mat d = imm.tangent(x);
        const std::vector<Vec> dd = imm.second(x);
        Mat h = 2.0 * d.transpose() * d;
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j) h(i, j) += 2.0 * dd[static_cast<std::size_t>(i * m + j)].dot(r);
        return h;
      });
  return {psi, imm.center()};
}

struct RhoHessianCheck {
  double intrinsic;  // Hess(rho^2)(X, X) from the induced chart
  double extrinsic;  // 2<X, X> + 2<A(X, X), u - o>
  double residual;   // |difference| / max(1, |extrinsic|)
};

inline RhoHessianCheck extrinsic_rho_hessian_check(const Immersion& imm, const Vec& x, const Vec& X) {
  const Vec r = imm.position(x) - imm.base_point();
  if (r.norm() < 1e-12) fail(ErrorCode::BasePointCoincides, "u(x) coincides with the base point");
  const Chart chart = induced_chart(imm);
  const ExhaustionFunction exh = extrinsic_exhaustion(imm);
  const Mat H = hessian_at(chart, exh.psi(), x);
  const InducedGeometry G = induced_geometry_at(imm, x);
  RhoHessianCheck out;
  out.intrinsic = X.dot(H * X);
  out.extrinsic = 2.0 * X.dot(G.g * X) + 2.0 * G.A_of(X, X).dot(r);
  out.residual = std::abs(out.intrinsic - out.extrinsic) / std::max(1.0, std::abs(out.extrinsic));
  return out;
}

/// |dgamma|^2 of the Gauss map, i.e. |A|^2.
inline double gauss_map_energy_density(const Immersion& imm, const Vec& x) {
  return induced_geometry_at(imm, x).A_norm_sq;
}

/// Vol(D(rho)) / rho^lambda on a radius grid, D(rho) the extrinsic ball.
inline MonotonicityReport volume_ratio_scan(const Immersion& imm, double lambda, const std::vector<double>& grid,
                                            const QuadratureConfig& cfg = {}) {
  const Chart chart = induced_chart(imm);
  const ExhaustionFunction exh = extrinsic_exhaustion(imm);
  try {
    return ratio_scan([](const Vec&) { return 1.0; }, exh, chart, lambda, grid, cfg, "volume:" + imm.id());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::LevelSetTouchesBoundary)
      fail(ErrorCode::WindowTooSmall, "extrinsic ball leaves the parameter window of '" + imm.id() + "'");
    throw;
  }
}

// ---------------------------------------------------------------------------
// Complex Gauss map of a real Kahler submanifold.

using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

struct ComplexGaussCheck {
  double dgamma_norm_sq;  // doubled sum over a real orthonormal frame
  double A_norm_sq;
  double gap;
  double antiholomorphic_defect;  // max_j |dgamma(eta_j)|
};

namespace detail {

/// g-orthonormal frame e_1, .., e_n, J e_1, .., J e_n (columns).
inline Mat unitary_frame(const Mat& g, const Mat& J) {
  const int m = static_cast<int>(g.rows());
  const int n = m / 2;
  Mat out(m, m);
  int found = 0;
  auto ip = [&](const Vec& a, const Vec& b) { return a.dot(g * b); };
  for (int k = 0; k < m && found < n; ++k) {
    Vec v = Vec::Unit(m, k);
    for (int j = 0; j < found; ++j) {
      v -= ip(v, out.col(j)) * out.col(j);
      v -= ip(v, out.col(n + j)) * out.col(n + j);
    }
    const double len = std::sqrt(ip(v, v));
    if (len < 1e-8) continue;
    v /= len;
    out.col(found) = v;
    out.col(n + found) = J * v;
    ++found;
  }
  if (found < n) fail(ErrorCode::NotKahlerCatalog, "could not build a unitary frame");
  return out;
}

/// Plucker coordinates (all n x n minors) of the columns of an N x n matrix.
inline CVec plucker(const CMat& cols) {
  const int N = static_cast<int>(cols.rows());
  const int n = static_cast<int>(cols.cols());
  const auto& sets = combinations(N, n);
  CVec out(static_cast<Eigen::Index>(sets.size()));
  CMat sub(n, n);
  for (std::size_t s = 0; s < sets.size(); ++s) {
    for (int r = 0; r < n; ++r) sub.row(r) = cols.row(sets[s][static_cast<std::size_t>(r)]);
    out[static_cast<Eigen::Index>(s)] = n == 0 ? std::complex<double>(1.0) : sub.determinant();
  }
  return out;
}

}  // namespace detail

inline ComplexGaussCheck complex_gauss_energy_check(const Immersion& imm, const Vec& x) {
  if (!imm.complex_structure()) fail(ErrorCode::NotKahlerCatalog, "immersion '" + imm.id() + "' carries no J");
  const Mat& J = *imm.complex_structure();
  const InducedGeometry G = induced_geometry_at(imm, x);
  const double scale = std::max(1.0, G.g.cwiseAbs().maxCoeff());
  if ((J.transpose() * G.g * J - G.g).cwiseAbs().maxCoeff() > 1e-9 * scale)
    fail(ErrorCode::NotKahlerCatalog, "J is not orthogonal for the induced metric of '" + imm.id() + "'");
  const int m = imm.dim();
  const int n = m / 2;
  const int N = imm.ambient_dim();
  const std::complex<double> I(0.0, 1.0);
  const double s2 = std::sqrt(0.5);
  const Mat E = detail::unitary_frame(G.g, J);

  // eta_bar_k in parameter coordinates (complexified) and pushed to C^N
  std::vector<CVec> eta_bar(static_cast<std::size_t>(n)), eta(static_cast<std::size_t>(n));
  CMat frame_bar(N, n);
  for (int k = 0; k < n; ++k) {
    eta_bar[k] = s2 * (E.col(k).cast<std::complex<double>>() + I * E.col(n + k).cast<std::complex<double>>());
    eta[k] = s2 * (E.col(k).cast<std::complex<double>>() - I * E.col(n + k).cast<std::complex<double>>());
    frame_bar.col(k) = G.tangent.cast<std::complex<double>>() * eta_bar[k];
  }
  auto A_c = [&](const CVec& X, const CVec& Y) {
    CVec out = CVec::Zero(N);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        out += X[i] * Y[j] * G.A[static_cast<std::size_t>(i * m + j)].cast<std::complex<double>>();
    return out;
  };
  auto dgamma = [&](const CVec& X) {
    CVec total;
    for (int k = 0; k < n; ++k) {
      CMat cols = frame_bar;
      cols.col(k) = A_c(X, eta_bar[k]);
      const CVec p = detail::plucker(cols);
      total = k == 0 ? p : CVec(total + p);
    }
    return total;
  };
  ComplexGaussCheck out;
  double sum = 0.0;
  for (int a = 0; a < m; ++a) sum += dgamma(E.col(a).cast<std::complex<double>>()).squaredNorm();
  out.dgamma_norm_sq = 2.0 * sum;
  out.A_norm_sq = G.A_norm_sq;
  out.gap = std::abs(out.dgamma_norm_sq - out.A_norm_sq);
  out.antiholomorphic_defect = 0.0;
  for (int j = 0; j < n; ++j) out.antiholomorphic_defect = std::max(out.antiholomorphic_defect, dgamma(eta[j]).norm());
  return out;
}

// ---------------------------------------------------------------------------
// Bernstein diagnostics.

enum class Verdict { holds_on_window, fails, not_applicable };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::holds_on_window: return "holds-on-window";
    case Verdict::fails: return "fails";
    case Verdict::not_applicable: return "not-applicable";
  }
  return "unknown";
}

struct BernsteinWindow {
  Vec lo;
  Vec hi;
  int samples_per_axis = 24;
  double rho_min = 0.5;
  double rho_max = 2.0;
  int rho_points = 12;
};

struct EnergyRow {
  double rho;
  double energy;
  double err;
};

struct BernsteinReport {
  int m = 0;
  double delta = 0.0;
  double mu1 = 0.0;
  double mu2 = 0.0;
  double max_mean_curvature = 0.0;
  double parallel_H_defect = 0.0;
  bool minimal = false;
  bool parallel_mean_curvature = false;
  std::vector<EnergyRow> energy_rows;
  double energy_slope = 0.0;
  bool energy_vanishes = false;
  Estimate total_scalar_curvature;
  std::optional<double> boundary_slack;
  std::optional<double> boundary_R0;
  Verdict verdict_i = Verdict::not_applicable;
  Verdict verdict_ii = Verdict::not_applicable;
  std::string window;
};

/// min over {rho = R0} of |A|^2/2 - sum_j |A(nu, e_j)|^2.
inline double boundary_condition_slack(const Immersion& imm, double R0, const QuadratureConfig& cfg = {}) {
  const Chart chart = induced_chart(imm);
  const ExhaustionFunction exh = extrinsic_exhaustion(imm);
  const auto pts = boundary_points(exh, chart, R0, cfg, boundary_ray_count(chart, cfg));
  if (pts.empty()) fail(ErrorCode::EmptySample, "no boundary rays reach D(R0)");
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& bp : pts) {
    const InducedGeometry G = induced_geometry_at(imm, bp.x);
    const Mat E = orthonormal_frame(G.g);
    double inu = 0.0;
    for (int j = 0; j < imm.dim(); ++j) inu += G.A_of(bp.normal, E.col(j)).squaredNorm();
    worst = std::min(worst, 0.5 * G.A_norm_sq - inu);
  }
  return worst;
}

inline std::vector<Vec> window_grid(const Vec& lo, const Vec& hi, int n) {
  const auto m = lo.size();
  std::vector<Vec> out;
  std::vector<int> idx(static_cast<std::size_t>(m), 0);
  while (true) {
    Vec x(m);
    for (Eigen::Index i = 0; i < m; ++i)
      x[i] = n == 1 ? 0.5 * (lo[i] + hi[i]) : lo[i] + (hi[i] - lo[i]) * idx[static_cast<std::size_t>(i)] / (n - 1);
    out.push_back(x);
    Eigen::Index i = m - 1;
    while (i >= 0 && ++idx[static_cast<std::size_t>(i)] == n) {
      idx[static_cast<std::size_t>(i)] = 0;
      --i;
    }
    if (i < 0) break;
  }
  return out;
}

/// Least-squares slope of log(y) against log(x) over rows with y > 0.
inline double loglog_slope(const std::vector<EnergyRow>& rows) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& r : rows) {
    if (!(r.energy > 0.0)) continue;
    const double lx = std::log(r.rho), ly = std::log(r.energy);
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    ++n;
  }
  if (n < 2) return 0.0;
  const double den = n * sxx - sx * sx;
  return den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
}

inline BernsteinReport bernstein_report(const Immersion& imm, const BernsteinWindow& win,
                                        std::optional<double> boundary_R0 = std::nullopt,
                                        const QuadratureConfig& cfg = {}) {
  const int m = imm.dim();
  BernsteinReport rep;
  rep.m = m;
  const auto grid = window_grid(win.lo, win.hi, win.samples_per_axis);
  double hmax = 0.0, dh = 0.0;
  for (const Vec& x : grid) {
    const InducedGeometry G = induced_geometry_at(imm, x);
    const double rho = (imm.position(x) - imm.base_point()).norm();
    rep.delta = std::max(rep.delta, rho * std::sqrt(std::max(0.0, G.A_norm_sq)));
    hmax = std::max(hmax, G.H.norm());
    // normal part of the derivative of H
    const double h = fd_step(x, 1e-4);
    for (int k = 0; k < m; ++k) {
      Vec xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      if (!imm.box().contains(xp) || !imm.box().contains(xm)) continue;
      const Vec dH = (induced_geometry_at(imm, xp).H - induced_geometry_at(imm, xm).H) / (2.0 * h);
      dh = std::max(dh, (G.normal_projector * dH).norm());
    }
  }
  rep.max_mean_curvature = hmax;
  rep.parallel_H_defect = dh;
  rep.minimal = hmax <= 1e-8;
  rep.parallel_mean_curvature = rep.minimal || dh <= 1e-5;
  rep.mu1 = m - 2 - m * rep.delta;
  rep.mu2 = m - 2 - 2 * rep.delta;

  std::ostringstream os;
  os.precision(17);
  os << "params[";
  for (Eigen::Index i = 0; i < win.lo.size(); ++i) os << (i ? "," : "") << win.lo[i] << ":" << win.hi[i];
  os << "] rho[" << win.rho_min << "," << win.rho_max << "]";
  rep.window = os.str();

  const Chart chart = induced_chart(imm);
  const ExhaustionFunction exh = extrinsic_exhaustion(imm);
  auto energy = [&](const Vec& x) { return induced_geometry_at(imm, x).A_norm_sq; };
  rep.energy_vanishes = true;
  try {
    for (double rho : geometric_grid(win.rho_min, win.rho_max, win.rho_points)) {
      const Estimate e = region_integral(energy, exh, chart, rho, cfg);
      rep.energy_rows.push_back({rho, e.value, e.error});
      if (std::abs(e.value) > 1e-12) rep.energy_vanishes = false;
    }
    rep.total_scalar_curvature = region_integral(
        [&](const Vec& x) { return std::pow(std::max(0.0, energy(x)), 0.5 * m); }, exh, chart, win.rho_max, cfg);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::LevelSetTouchesBoundary)
      fail(ErrorCode::WindowTooSmall, "extrinsic ball leaves the parameter window of '" + imm.id() + "'");
    throw;
  }
  rep.energy_slope = loglog_slope(rep.energy_rows);

  if (boundary_R0) {
    rep.boundary_R0 = boundary_R0;
    rep.boundary_slack = boundary_condition_slack(imm, *boundary_R0, cfg);
  }

  auto judge = [&](double mu, bool structural) {
    if (m < 3 || !(mu > 0.0) || !structural) return Verdict::not_applicable;
    if (rep.energy_vanishes || rep.energy_slope < mu - 0.1) return Verdict::holds_on_window;
    return Verdict::fails;
  };
  rep.verdict_i = judge(rep.mu1, rep.parallel_mean_curvature);
  rep.verdict_ii = judge(rep.mu2, rep.minimal);
  return rep;
}

}  // namespace stresslab

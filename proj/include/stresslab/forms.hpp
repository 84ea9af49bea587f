#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "stresslab/chart.hpp"

namespace stresslab {

// ---------------------------------------------------------------------------
// Multi-index bookkeeping. Components are stored on strictly increasing index
// tuples in lexicographic order.

inline constexpr int kMaxFormDim = 12;

inline const std::vector<std::vector<int>>& combinations(int m, int p) {
  static const auto table = [] {
    std::vector<std::vector<std::vector<std::vector<int>>>> t(kMaxFormDim + 1);
    for (int n = 0; n <= kMaxFormDim; ++n) {
      t[n].resize(static_cast<std::size_t>(n + 1));
      for (int k = 0; k <= n; ++k) {
        std::vector<int> c(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) c[i] = i;
        while (true) {
          t[n][k].push_back(c);
          int i = k - 1;
          while (i >= 0 && c[i] == n - k + i) --i;
          if (i < 0) break;
          ++c[i];
          for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
        }
      }
    }
    return t;
  }();
  if (m < 0 || m > kMaxFormDim || p < 0 || p > m) fail(ErrorCode::DegreeExceedsDimension, "no index set for degree " + std::to_string(p));
  return table[static_cast<std::size_t>(m)][static_cast<std::size_t>(p)];
}

inline long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Lexicographic rank of a strictly increasing tuple among p-subsets of m.
inline int combination_rank(const std::vector<int>& c, int m) {
  const int p = static_cast<int>(c.size());
  long rank = 0;
  int prev = -1;
  for (int i = 0; i < p; ++i) {
    for (int j = prev + 1; j < c[i]; ++j) rank += binomial(m - 1 - j, p - 1 - i);
    prev = c[i];
  }
  return static_cast<int>(rank);
}

/// Sorts `idx` in place and returns the permutation sign, or 0 on a repeat.
inline int sort_with_sign(std::vector<int>& idx) {
  int sign = 1;
  for (std::size_t i = 1; i < idx.size(); ++i)
    for (std::size_t j = i; j > 0 && idx[j - 1] > idx[j]; --j) {
      std::swap(idx[j - 1], idx[j]);
      sign = -sign;
    }
  for (std::size_t i = 1; i < idx.size(); ++i)
    if (idx[i] == idx[i - 1]) return 0;
  return sign;
}

// ---------------------------------------------------------------------------

/// Pointwise value of an R^k-valued p-form: rows are ordered multi-indices,
/// columns are bundle components.
struct FormValue {
  int dim = 0;
  int degree = 0;
  int rank = 1;
  Mat c;

  static FormValue zero(int dim, int degree, int rank) {
    FormValue v{dim, degree, rank, Mat::Zero(binomial(dim, degree), rank)};
    return v;
  }

  /// Component for an arbitrary (possibly unsorted) index tuple.
  double component(std::vector<int> idx, int a) const {
    const int s = sort_with_sign(idx);
    if (s == 0) return 0.0;
    return s * c(combination_rank(idx, dim), a);
  }

  void add_component(std::vector<int> idx, int a, double v) {
    const int s = sort_with_sign(idx);
    if (s == 0) return;
    c(combination_rank(idx, dim), a) += s * v;
  }
};

// ---------------------------------------------------------------------------
// Forward-mode dual numbers for exact directional derivatives of algebraic
// expressions in (g, omega).

struct Dual {
  double v = 0.0;
  double d = 0.0;
  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT
  Dual(double value, double deriv) : v(value), d(deriv) {}
};
inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator-(Dual a) { return {-a.v, -a.d}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
inline Dual operator/(Dual a, Dual b) { return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)}; }
inline Dual& operator+=(Dual& a, Dual b) { return a = a + b; }
inline Dual& operator-=(Dual& a, Dual b) { return a = a - b; }
inline double value_of(double x) { return x; }
inline double value_of(const Dual& x) { return x.v; }

namespace detail {

template <class T>
T det_small(std::vector<T> a, int n) {
  T det = T(1.0);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(value_of(a[r * n + col])) > std::abs(value_of(a[piv * n + col]))) piv = r;
    if (value_of(a[piv * n + col]) == 0.0) return T(0.0);
    if (piv != col) {
      for (int k = 0; k < n; ++k) std::swap(a[col * n + k], a[piv * n + k]);
      det = -det;
    }
    det = det * a[col * n + col];
    for (int r = col + 1; r < n; ++r) {
      const T f = a[r * n + col] / a[col * n + col];
      for (int k = col; k < n; ++k) a[r * n + k] -= f * a[col * n + k];
    }
  }
  return det;
}

template <class T>
std::vector<T> inverse_small(std::vector<T> a, int n) {
  std::vector<T> inv(static_cast<std::size_t>(n * n), T(0.0));
  for (int i = 0; i < n; ++i) inv[i * n + i] = T(1.0);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(value_of(a[r * n + col])) > std::abs(value_of(a[piv * n + col]))) piv = r;
    if (!(std::abs(value_of(a[piv * n + col])) > 0.0)) fail(ErrorCode::SingularMetric, "metric is singular");
    if (piv != col)
      for (int k = 0; k < n; ++k) {
        std::swap(a[col * n + k], a[piv * n + k]);
        std::swap(inv[col * n + k], inv[piv * n + k]);
      }
    const T d = a[col * n + col];
    for (int k = 0; k < n; ++k) {
      a[col * n + k] = a[col * n + k] / d;
      inv[col * n + k] = inv[col * n + k] / d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const T f = a[r * n + col];
      for (int k = 0; k < n; ++k) {
        a[r * n + k] -= f * a[col * n + k];
        inv[r * n + k] -= f * inv[col * n + k];
      }
    }
  }
  return inv;
}

/// p-th compound matrix: minors det(a[I, J]) over ordered p-subsets.
template <class T>
std::vector<T> compound(const std::vector<T>& a, int n, int p) {
  const auto& sets = combinations(n, p);
  const int q = static_cast<int>(sets.size());
  std::vector<T> out(static_cast<std::size_t>(q * q));
  std::vector<T> sub(static_cast<std::size_t>(p * p));
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) {
      for (int r = 0; r < p; ++r)
        for (int s = 0; s < p; ++s) sub[r * p + s] = a[sets[i][r] * n + sets[j][s]];
      out[i * q + j] = p == 0 ? T(1.0) : det_small(sub, p);
    }
  return out;
}

/// |omega|^2 and S = |omega|^2/2 g - omega.omega from raw arrays; g is m x m
/// row-major, omega is (C(m,p) x k) row-major.
template <class T>
std::pair<T, std::vector<T>> stress_kernel(const std::vector<T>& g, const std::vector<T>& omega, int m, int p, int k) {
  const std::vector<T> ginv = inverse_small(g, m);
  const auto& sets = combinations(m, p);
  const int q = static_cast<int>(sets.size());
  const std::vector<T> cp = compound(ginv, m, p);
  T norm(0.0);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) {
      T s(0.0);
      for (int a = 0; a < k; ++a) s += omega[i * k + a] * omega[j * k + a];
      norm += cp[i * q + j] * s;
    }
  std::vector<T> S(static_cast<std::size_t>(m * m));
  for (int i = 0; i < m * m; ++i) S[i] = T(0.5) * norm * g[i];
  if (p == 0) return {norm, S};

  // contracted[j] holds (i_{d_j} omega) on ordered (p-1)-sets
  const auto& low = combinations(m, p - 1);
  const int ql = static_cast<int>(low.size());
  std::vector<std::vector<T>> contracted(static_cast<std::size_t>(m), std::vector<T>(static_cast<std::size_t>(ql * k), T(0.0)));
  for (int j = 0; j < m; ++j)
    for (int r = 0; r < ql; ++r) {
      std::vector<int> idx;
      idx.reserve(static_cast<std::size_t>(p));
      idx.push_back(j);
      idx.insert(idx.end(), low[r].begin(), low[r].end());
      const int sign = sort_with_sign(idx);
      if (sign == 0) continue;
      const int row = combination_rank(idx, m);
      for (int a = 0; a < k; ++a) contracted[j][r * k + a] = T(static_cast<double>(sign)) * omega[row * k + a];
    }
  const std::vector<T> cl = compound(ginv, m, p - 1);
  for (int j = 0; j < m; ++j)
    for (int l = j; l < m; ++l) {
      T s(0.0);
      for (int r = 0; r < ql; ++r)
        for (int t = 0; t < ql; ++t) {
          const T w = cl[r * ql + t];
          if (value_of(w) == 0.0 && std::is_same_v<T, double>) continue;
          T dot(0.0);
          for (int a = 0; a < k; ++a) dot += contracted[j][r * k + a] * contracted[l][t * k + a];
          s += w * dot;
        }
      S[j * m + l] -= s;
      if (l != j) S[l * m + j] -= s;
    }
  return {norm, S};
}

inline std::vector<double> flatten(const Mat& a) {
  std::vector<double> out(static_cast<std::size_t>(a.size()));
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out[static_cast<std::size_t>(i * a.cols() + j)] = a(i, j);
  return out;
}

}  // namespace detail

/// g-inner product of two form values of equal degree and rank.
inline double form_inner(const FormValue& a, const FormValue& b, const Mat& ginv) {
  if (a.degree != b.degree || a.rank != b.rank) fail(ErrorCode::InvalidArgument, "form_inner: shape mismatch");
  if (a.degree == 0) return a.c.row(0).dot(b.c.row(0));
  const int m = a.dim;
  const std::vector<double> cp = detail::compound(detail::flatten(ginv), m, a.degree);
  const auto q = static_cast<int>(a.c.rows());
  const Mat gram = a.c * b.c.transpose();
  double s = 0.0;
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) s += cp[static_cast<std::size_t>(i * q + j)] * gram(i, j);
  return s;
}

/// (i_X w)_J = sum_l X^l w_{(l, J)}. Degree 0 maps to a zero degree-0 value.
inline FormValue interior(const FormValue& w, const Vec& X) {
  if (w.degree == 0) return FormValue::zero(w.dim, 0, w.rank);
  FormValue out = FormValue::zero(w.dim, w.degree - 1, w.rank);
  const auto& low = combinations(w.dim, w.degree - 1);
  for (std::size_t r = 0; r < low.size(); ++r)
    for (int l = 0; l < w.dim; ++l) {
      if (X[l] == 0.0) continue;
      std::vector<int> idx{l};
      idx.insert(idx.end(), low[r].begin(), low[r].end());
      const int s = sort_with_sign(idx);
      if (s == 0) continue;
      out.c.row(static_cast<Eigen::Index>(r)) += X[l] * s * w.c.row(combination_rank(idx, w.dim));
    }
  return out;
}

// ---------------------------------------------------------------------------

/// A p-form with values in the trivial bundle R^k (identity fibre metric) and
/// connection coefficients A_i (k x k, antisymmetric).
class BundleValuedForm {
 public:
  using ValueFn = std::function<Mat(const Vec&)>;
  using JetFn = std::function<std::vector<Mat>(const Vec&)>;
  using ConnectionFn = std::function<std::vector<Mat>(const Vec&)>;

  BundleValuedForm(std::string label, int dim, int degree, int rank, ValueFn value, JetFn jet = {},
                   ConnectionFn connection = {})
      : label_(std::move(label)), dim_(dim), degree_(degree), rank_(rank), value_(std::move(value)),
        jet_(std::move(jet)), connection_(std::move(connection)) {
    if (degree_ < 0 || degree_ > dim_)
      fail(ErrorCode::DegreeExceedsDimension, "degree " + std::to_string(degree_) + " exceeds dimension " + std::to_string(dim_));
    if (dim_ > kMaxFormDim) fail(ErrorCode::InvalidArgument, "form dimension too large");
    if (rank_ < 1) fail(ErrorCode::InvalidArgument, "bundle rank must be positive");
    if (!value_) fail(ErrorCode::InvalidArgument, "form needs a coefficient function");
  }

  const std::string& label() const { return label_; }
  int dim() const { return dim_; }
  int degree() const { return degree_; }
  int rank() const { return rank_; }
  JetMode jet_mode() const { return jet_ ? JetMode::analytic : JetMode::finite_difference; }
  bool has_connection() const { return static_cast<bool>(connection_); }

  /// Copy whose first derivatives come from central differences.
  BundleValuedForm finite_difference(double step_scale = kDefaultStepScale) const {
    BundleValuedForm f = *this;
    f.jet_ = {};
    f.step_scale_ = step_scale;
    f.allow_fd_ = true;
    return f;
  }

  /// Copy that refuses to differentiate unless analytic jets exist.
  BundleValuedForm without_fd_fallback() const {
    BundleValuedForm f = *this;
    f.allow_fd_ = false;
    return f;
  }

  BundleValuedForm with_connection(ConnectionFn connection) const {
    BundleValuedForm f = *this;
    f.connection_ = std::move(connection);
    return f;
  }

  FormValue value(const Vec& x) const {
    FormValue v{dim_, degree_, rank_, value_(x)};
    if (v.c.rows() != binomial(dim_, degree_) || v.c.cols() != rank_)
      fail(ErrorCode::InvalidArgument, "coefficient block of form '" + label_ + "' has the wrong shape");
    return v;
  }

  /// Coordinate derivatives d_l of the stored components.
  std::vector<FormValue> derivative(const Vec& x) const {
    std::vector<FormValue> out;
    out.reserve(static_cast<std::size_t>(dim_));
    if (jet_) {
      for (Mat& d : jet_(x)) out.push_back(FormValue{dim_, degree_, rank_, std::move(d)});
      if (static_cast<int>(out.size()) != dim_) fail(ErrorCode::InvalidArgument, "jet has the wrong length");
      return out;
    }
    if (!allow_fd_) fail(ErrorCode::JetUnavailable, "form '" + label_ + "' has no derivative jet");
    const double h = fd_step(x, step_scale_);
    for (int l = 0; l < dim_; ++l) {
      Vec xp = x, xm = x;
      xp[l] += h;
      xm[l] -= h;
      out.push_back(FormValue{dim_, degree_, rank_, (value_(xp) - value_(xm)) / (2.0 * h)});
    }
    return out;
  }

  /// Connection coefficients; checked antisymmetric (metric compatible).
  std::vector<Mat> connection(const Vec& x) const {
    if (!connection_) return std::vector<Mat>(static_cast<std::size_t>(dim_), Mat::Zero(rank_, rank_));
    std::vector<Mat> a = connection_(x);
    if (static_cast<int>(a.size()) != dim_) fail(ErrorCode::InvalidArgument, "connection has the wrong length");
    for (const Mat& ai : a) {
      if (ai.rows() != rank_ || ai.cols() != rank_) fail(ErrorCode::InvalidArgument, "connection block has the wrong shape");
      if ((ai + ai.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, ai.cwiseAbs().maxCoeff()))
        fail(ErrorCode::ConnectionNotMetric, "connection of form '" + label_ + "' is not antisymmetric");
    }
    return a;
  }

 private:
  std::string label_;
  int dim_;
  int degree_;
  int rank_;
  ValueFn value_;
  JetFn jet_;
  ConnectionFn connection_;
  double step_scale_ = kDefaultStepScale;
  bool allow_fd_ = true;
};

inline void require_compatible(const BundleValuedForm& w, const Chart& chart) {
  if (w.dim() != chart.dim())
    fail(ErrorCode::InvalidArgument, "form '" + w.label() + "' lives in dimension " + std::to_string(w.dim()));
}

inline double norm_sq(const BundleValuedForm& w, const Chart& chart, const Vec& x) {
  require_compatible(w, chart);
  const FormValue v = w.value(x);
  return form_inner(v, v, spd_inverse(chart.metric(x)));
}

inline FormValue interior_product(const BundleValuedForm& w, const Vec& X, const Chart& chart, const Vec& x) {
  require_compatible(w, chart);
  chart.require_in_domain(x);
  return interior(w.value(x), X);
}

/// (w.w)(d_j, d_k) = <i_{d_j} w, i_{d_k} w>.
inline Mat odot_tensor(const BundleValuedForm& w, const Chart& chart, const Vec& x) {
  require_compatible(w, chart);
  const int m = chart.dim();
  const Mat ginv = spd_inverse(chart.metric(x));
  const FormValue v = w.value(x);
  Mat out = Mat::Zero(m, m);
  if (w.degree() == 0) return out;
  std::vector<FormValue> contracted;
  for (int j = 0; j < m; ++j) contracted.push_back(interior(v, Vec::Unit(m, j)));
  for (int j = 0; j < m; ++j)
    for (int k = j; k < m; ++k) {
      out(j, k) = form_inner(contracted[j], contracted[k], ginv);
      out(k, j) = out(j, k);
    }
  return out;
}

inline Mat stress_energy_at(const BundleValuedForm& w, const Chart& chart, const Vec& x) {
  require_compatible(w, chart);
  const Mat g = chart.metric(x);
  const auto [norm, s] = detail::stress_kernel(detail::flatten(g), detail::flatten(w.value(x).c), chart.dim(),
                                               w.degree(), w.rank());
  Mat out(chart.dim(), chart.dim());
  for (int i = 0; i < chart.dim(); ++i)
    for (int j = 0; j < chart.dim(); ++j) out(i, j) = s[static_cast<std::size_t>(i * chart.dim() + j)];
  return 0.5 * (out + out.transpose());
}

/// Covariant derivatives (nabla_j w) for j = 0..m-1, combining the bundle
/// connection with the Levi-Civita connection on the form slots.
inline std::vector<FormValue> covariant_derivative(const BundleValuedForm& w, const Chart& chart, const Vec& x) {
  require_compatible(w, chart);
  const int m = chart.dim();
  const int p = w.degree();
  const FormValue v = w.value(x);
  std::vector<FormValue> out = w.derivative(x);
  const std::vector<Mat> A = w.connection(x);
  const Christoffel gamma = christoffel_at(chart, x);
  const auto& sets = combinations(m, p);
  for (int j = 0; j < m; ++j) {
    out[j].c += v.c * A[j].transpose();
    for (std::size_t r = 0; r < sets.size(); ++r)
      for (int s = 0; s < p; ++s)
        for (int l = 0; l < m; ++l) {
          const double gm = gamma(l, j, sets[r][s]);
          if (gm == 0.0) continue;
          std::vector<int> idx = sets[r];
          idx[s] = l;
          for (int a = 0; a < w.rank(); ++a) out[j].c(static_cast<Eigen::Index>(r), a) -= gm * v.component(idx, a);
        }
  }
  return out;
}

/// (d w)_{j0..jp} = sum_s (-1)^s (nabla_{js} w)_{J minus js}.
inline FormValue exterior_covariant_derivative(const BundleValuedForm& w, const Chart& chart, const Vec& x) {
  const int m = chart.dim();
  const int p = w.degree();
  if (p + 1 > m) {
    require_compatible(w, chart);
    return FormValue{m, p + 1, w.rank(), Mat::Zero(0, w.rank())};
  }
  const std::vector<FormValue> nab = covariant_derivative(w, chart, x);
  FormValue out = FormValue::zero(m, p + 1, w.rank());
  const auto& sets = combinations(m, p + 1);
  for (std::size_t r = 0; r < sets.size(); ++r)
    for (int s = 0; s <= p; ++s) {
      std::vector<int> rest;
      for (int t = 0; t <= p; ++t)
        if (t != s) rest.push_back(sets[r][t]);
      const double sign = (s % 2 == 0) ? 1.0 : -1.0;
      const int row = combination_rank(rest, m);
      out.c.row(static_cast<Eigen::Index>(r)) += sign * nab[sets[r][s]].c.row(row);
    }
  return out;
}

/// (delta w)_K = -g^{jl} (nabla_j w)_{(l, K)}.
inline FormValue codifferential(const BundleValuedForm& w, const Chart& chart, const Vec& x) {
  const int m = chart.dim();
  const int p = w.degree();
  if (p == 0) {
    require_compatible(w, chart);
    return FormValue::zero(m, 0, w.rank());
  }
  const std::vector<FormValue> nab = covariant_derivative(w, chart, x);
  const Mat ginv = spd_inverse(chart.metric(x));
  FormValue out = FormValue::zero(m, p - 1, w.rank());
  const auto& low = combinations(m, p - 1);
  for (std::size_t r = 0; r < low.size(); ++r)
    for (int j = 0; j < m; ++j)
      for (int l = 0; l < m; ++l) {
        if (ginv(j, l) == 0.0) continue;
        std::vector<int> idx{l};
        idx.insert(idx.end(), low[r].begin(), low[r].end());
        for (int a = 0; a < w.rank(); ++a)
          out.c(static_cast<Eigen::Index>(r), a) -= ginv(j, l) * nab[j].component(idx, a);
      }
  return out;
}

/// div S(X) as <delta w, i_X w> + <i_X d w, w>.
inline double div_stress_energy_identity(const BundleValuedForm& w, const Chart& chart, const Vec& x, const Vec& X) {
  const Mat ginv = spd_inverse(chart.metric(x));
  const FormValue v = w.value(x);
  double out = 0.0;
  if (w.degree() > 0) out += form_inner(codifferential(w, chart, x), interior(v, X), ginv);
  if (w.degree() < chart.dim()) out += form_inner(interior(exterior_covariant_derivative(w, chart, x), X), v, ginv);
  return out;
}

/// div S(X) = g^{lj} (nabla_l S)_{jk} X^k with d_l S differentiated exactly
/// through the algebraic map (g, w) -> S by dual numbers.
inline double div_stress_energy_direct(const BundleValuedForm& w, const Chart& chart, const Vec& x, const Vec& X) {
  require_compatible(w, chart);
  const int m = chart.dim();
  const Mat g = chart.metric(x);
  const Mat ginv = spd_inverse(g);
  const MetricD1 dg = chart.metric_d1(x);
  const FormValue v = w.value(x);
  const std::vector<FormValue> dv = w.derivative(x);
  const Christoffel gamma = christoffel_from_jets(g, dg);
  const Mat S = stress_energy_at(w, chart, x);

  double out = 0.0;
  std::vector<Dual> gd(static_cast<std::size_t>(m * m));
  std::vector<Dual> wd(static_cast<std::size_t>(v.c.size()));
  for (int l = 0; l < m; ++l) {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) gd[static_cast<std::size_t>(i * m + j)] = Dual(g(i, j), dg[l](i, j));
    for (Eigen::Index i = 0; i < v.c.rows(); ++i)
      for (Eigen::Index a = 0; a < v.c.cols(); ++a)
        wd[static_cast<std::size_t>(i * v.c.cols() + a)] = Dual(v.c(i, a), dv[l].c(i, a));
    const auto res = detail::stress_kernel(gd, wd, m, w.degree(), w.rank());
    const std::vector<Dual>& sd = res.second;
    for (int j = 0; j < m; ++j) {
      if (ginv(l, j) == 0.0) continue;
      for (int k = 0; k < m; ++k) {
        if (X[k] == 0.0) continue;
        double nab = sd[static_cast<std::size_t>(j * m + k)].d;
        for (int r = 0; r < m; ++r) nab -= gamma(r, l, j) * S(r, k) + gamma(r, l, k) * S(j, r);
        out += ginv(l, j) * nab * X[k];
      }
    }
  }
  return out;
}

struct DivergenceRoutes {
  double direct;
  double identity;
  double gap() const { return std::abs(direct - identity); }
};

inline DivergenceRoutes div_stress_energy(const BundleValuedForm& w, const Chart& chart, const Vec& x, const Vec& X) {
  return {div_stress_energy_direct(w, chart, x, X), div_stress_energy_identity(w, chart, x, X)};
}

/// Max over the sample and a g-orthonormal frame of |div S(e_i)|.
inline double conservation_residual(const BundleValuedForm& w, const Chart& chart, const std::vector<Vec>& sample) {
  if (sample.empty()) fail(ErrorCode::EmptySample, "conservation residual needs sample points");
  double worst = 0.0;
  for (const Vec& x : sample) {
    chart.require_in_domain(x);
    const Mat e = orthonormal_frame(chart.metric(x));
    for (int i = 0; i < chart.dim(); ++i)
      worst = std::max(worst, std::abs(div_stress_energy_identity(w, chart, x, e.col(i))));
  }
  return worst;
}

/// Max over g-orthonormal frame pairs of |(w.w)(JX, JY) - (w.w)(X, Y)|.
inline double j_invariance_defect(const BundleValuedForm& w, const Chart& chart, const Vec& x) {
  if (!chart.complex_structure()) fail(ErrorCode::NoComplexStructure, "chart '" + chart.id() + "' has no J");
  const Mat& j = *chart.complex_structure();
  const Mat t = odot_tensor(w, chart, x);
  const Mat e = orthonormal_frame(chart.metric(x));
  return (e.transpose() * (j.transpose() * t * j - t) * e).cwiseAbs().maxCoeff();
}

}  // namespace stresslab

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stresslab/chart.hpp"
#include "stresslab/forms.hpp"
#include "stresslab/submanifold.hpp"
#include "stresslab/warped.hpp"

namespace stresslab {

// ---------------------------------------------------------------------------
// Polynomial coefficients for inline and catalog forms.

struct Monomial {
  double coef = 0.0;
  std::vector<int> powers;  // one exponent per coordinate; missing entries are 0
};

struct Polynomial {
  std::vector<Monomial> terms;

  static Polynomial constant(double c) { return Polynomial{{Monomial{c, {}}}}; }
  /// c * x_i (0-based i).
  static Polynomial linear(int i, double c = 1.0) {
    Monomial t{c, std::vector<int>(static_cast<std::size_t>(i + 1), 0)};
    t.powers[static_cast<std::size_t>(i)] = 1;
    return Polynomial{{t}};
  }

  Polynomial operator+(const Polynomial& o) const {
    Polynomial r = *this;
    r.terms.insert(r.terms.end(), o.terms.begin(), o.terms.end());
    return r;
  }

  double value(const Vec& x) const {
    double s = 0.0;
    for (const auto& t : terms) s += t.coef * monomial(t, x, -1);
    return s;
  }

  Vec gradient(const Vec& x) const {
    Vec g = Vec::Zero(x.size());
    for (const auto& t : terms)
      for (Eigen::Index i = 0; i < x.size(); ++i) g[i] += t.coef * monomial(t, x, static_cast<int>(i));
    return g;
  }

  int max_variable() const {
    int n = 0;
    for (const auto& t : terms)
      for (std::size_t i = 0; i < t.powers.size(); ++i)
        if (t.powers[i] != 0) n = std::max(n, static_cast<int>(i) + 1);
    return n;
  }

 private:
  // Monomial value, or its partial in variable `d` when d >= 0.
  static double monomial(const Monomial& t, const Vec& x, int d) {
    double v = 1.0;
    const auto n = static_cast<int>(t.powers.size());
    if (d >= n) return 0.0;
    for (int i = 0; i < n; ++i) {
      int e = t.powers[static_cast<std::size_t>(i)];
      if (e < 0) fail(ErrorCode::InvalidArgument, "negative exponent in polynomial");
      if (i == d) {
        if (e == 0) return 0.0;
        v *= e;
        --e;
      }
      if (e > 0) v *= std::pow(x[i], e);
    }
    return v;
  }
};

/// Coefficient of dx^{idx[0]} ^ ... on bundle component `component` (0-based).
struct FormTerm {
  std::vector<int> idx;
  int component = 0;
  Polynomial coef;
};

/// A_{direction} entry (row, col); the (col, row) entry is filled with the negative.
struct ConnectionTerm {
  int direction = 0;
  int row = 0;
  int col = 1;
  Polynomial coef;
};

inline BundleValuedForm polynomial_form(const std::string& label, int m, int p, int k, std::vector<FormTerm> terms,
                                        std::vector<ConnectionTerm> connection = {}) {
  for (const auto& t : terms) {
    if (static_cast<int>(t.idx.size()) != p) fail(ErrorCode::InvalidArgument, "form term has the wrong degree");
    for (int i : t.idx)
      if (i < 0 || i >= m) fail(ErrorCode::DegreeExceedsDimension, "form index outside the chart dimension");
    if (t.component < 0 || t.component >= k) fail(ErrorCode::InvalidArgument, "bundle component out of range");
    if (t.coef.max_variable() > m) fail(ErrorCode::InvalidArgument, "coefficient uses a coordinate beyond the chart");
  }
  for (const auto& c : connection) {
    if (c.direction < 0 || c.direction >= m || c.row < 0 || c.row >= k || c.col < 0 || c.col >= k)
      fail(ErrorCode::InvalidArgument, "connection term out of range");
    if (c.row == c.col) fail(ErrorCode::ConnectionNotMetric, "diagonal connection entries must vanish");
  }
  auto value = [terms, m, p, k](const Vec& x) {
    FormValue v = FormValue::zero(m, p, k);
    for (const auto& t : terms) v.add_component(t.idx, t.component, t.coef.value(x));
    return v.c;
  };
  auto jet = [terms, m, p, k](const Vec& x) {
    std::vector<FormValue> d(static_cast<std::size_t>(m), FormValue::zero(m, p, k));
    for (const auto& t : terms) {
      const Vec gr = t.coef.gradient(x);
      for (int l = 0; l < m; ++l) d[static_cast<std::size_t>(l)].add_component(t.idx, t.component, gr[l]);
    }
    std::vector<Mat> out;
    for (auto& f : d) out.push_back(std::move(f.c));
    return out;
  };
  BundleValuedForm w(label, m, p, k, value, jet);
  if (!connection.empty()) {
    w = w.with_connection([connection, m, k](const Vec& x) {
      std::vector<Mat> a(static_cast<std::size_t>(m), Mat::Zero(k, k));
      for (const auto& c : connection) {
        const double v = c.coef.value(x);
        a[static_cast<std::size_t>(c.direction)](c.row, c.col) += v;
        a[static_cast<std::size_t>(c.direction)](c.col, c.row) -= v;
      }
      return a;
    });
  }
  return w;
}

// ---------------------------------------------------------------------------
// Charts.

inline Mat standard_complex_structure(int m) {
  Mat J = Mat::Zero(m, m);
  for (int k = 0; k + 1 < m; k += 2) {
    J(k + 1, k) = 1.0;
    J(k, k + 1) = -1.0;
  }
  return J;
}

inline Chart flat_chart(int m, double half_width = 10.0, std::string id = "") {
  if (id.empty()) id = "flat-R" + std::to_string(m);
  return Chart(
      std::move(id), m, CoordinateBox::cube(m, half_width), [m](const Vec&) { return Mat(Mat::Identity(m, m)); },
      [m](const Vec&) { return MetricD1(static_cast<std::size_t>(m), Mat::Zero(m, m)); },
      [m](const Vec&) {
        return MetricD2(static_cast<std::size_t>(m), MetricD1(static_cast<std::size_t>(m), Mat::Zero(m, m)));
      });
}

namespace detail {

// u = 0.1 x^2 - 0.05 y + 0.02 x y, g = exp(2u) I.
inline Chart conformal_c1() {
  auto u = [](const Vec& x) { return 0.1 * x[0] * x[0] - 0.05 * x[1] + 0.02 * x[0] * x[1]; };
  auto du = [](const Vec& x) { return std::array<double, 2>{0.2 * x[0] + 0.02 * x[1], -0.05 + 0.02 * x[0]}; };
  const double ddu[2][2] = {{0.2, 0.02}, {0.02, 0.0}};
  Chart c(
      "conformal-C1", 2, CoordinateBox::cube(2, 3.0),
      [u](const Vec& x) { return Mat(std::exp(2 * u(x)) * Mat::Identity(2, 2)); },
      [u, du](const Vec& x) {
        const double e = std::exp(2 * u(x));
        const auto d = du(x);
        MetricD1 out;
        for (int k = 0; k < 2; ++k) out.push_back(2 * d[k] * e * Mat::Identity(2, 2));
        return out;
      },
      [u, du, ddu](const Vec& x) {
        const double e = std::exp(2 * u(x));
        const auto d = du(x);
        MetricD2 out(2, MetricD1(2));
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l) out[k][l] = (4 * d[k] * d[l] + 2 * ddu[k][l]) * e * Mat::Identity(2, 2);
        return out;
      });
  return c.with_complex_structure(standard_complex_structure(2));
}

// g = I + 0.2 a a^T with a = (sin y, 0.5 cos(x + z), 0.3 x y).
inline Chart bumpy_r3() {
  auto a = [](const Vec& x) {
    Vec v(3);
    v << std::sin(x[1]), 0.5 * std::cos(x[0] + x[2]), 0.3 * x[0] * x[1];
    return v;
  };
  auto da = [](const Vec& x) {
    std::vector<Vec> d(3, Vec::Zero(3));
    const double s = std::sin(x[0] + x[2]);
    d[0] << 0.0, -0.5 * s, 0.3 * x[1];
    d[1] << std::cos(x[1]), 0.0, 0.3 * x[0];
    d[2] << 0.0, -0.5 * s, 0.0;
    return d;
  };
  auto dda = [](const Vec& x) {
    std::vector<std::vector<Vec>> d(3, std::vector<Vec>(3, Vec::Zero(3)));
    const double c = -0.5 * std::cos(x[0] + x[2]);
    for (int k : {0, 2})
      for (int l : {0, 2}) d[k][l][1] = c;
    d[1][1][0] = -std::sin(x[1]);
    d[0][1][2] = d[1][0][2] = 0.3;
    return d;
  };
  return Chart(
      "bumpy-R3", 3, CoordinateBox::cube(3, 5.0),
      [a](const Vec& x) {
        const Vec v = a(x);
        return Mat(Mat::Identity(3, 3) + 0.2 * v * v.transpose());
      },
      [a, da](const Vec& x) {
        const Vec v = a(x);
        const auto d = da(x);
        MetricD1 out;
        for (int k = 0; k < 3; ++k) out.push_back(0.2 * (d[k] * v.transpose() + v * d[k].transpose()));
        return out;
      },
      [a, da, dda](const Vec& x) {
        const Vec v = a(x);
        const auto d = da(x);
        const auto dd = dda(x);
        MetricD2 out(3, MetricD1(3));
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l)
            out[k][l] = 0.2 * (dd[k][l] * v.transpose() + d[k] * d[l].transpose() + d[l] * d[k].transpose() +
                               v * dd[k][l].transpose());
        return out;
      });
}

inline Chart polar_r2() {
  Vec lo(2), hi(2);
  lo << 1e-3, -kPi;
  hi << 10.0, kPi;
  return Chart(
      "polar-R2", 2, CoordinateBox(lo, hi, {false, true}),
      [](const Vec& x) {
        Mat g = Mat::Identity(2, 2);
        g(1, 1) = x[0] * x[0];
        return g;
      },
      [](const Vec& x) {
        MetricD1 out(2, Mat::Zero(2, 2));
        out[0](1, 1) = 2 * x[0];
        return out;
      },
      [](const Vec&) {
        MetricD2 out(2, MetricD1(2, Mat::Zero(2, 2)));
        out[0][0](1, 1) = 2.0;
        return out;
      });
}

inline bool parse_suffix_int(const std::string& id, const std::string& prefix, int* out) {
  if (id.rfind(prefix, 0) != 0 || id.size() == prefix.size()) return false;
  const std::string rest = id.substr(prefix.size());
  if (!std::all_of(rest.begin(), rest.end(), [](char c) { return c >= '0' && c <= '9'; })) return false;
  *out = std::stoi(rest);
  return true;
}

}  // namespace detail

inline std::vector<std::string> chart_ids() {
  return {"flat-R1",       "flat-R2",          "flat-R3",           "flat-R4",         "flat-R5",
          "flat-R6",       "flat-C1",          "flat-C2",           "flat-C3",         "scaled-R2",
          "polar-R2",      "conformal-C1",     "bumpy-R3",          "warped-hyperbolic", "warped-hyperbolic-band",
          "warped-power",  "warped-quadratic", "warped-flat",       "induced:<immersion>"};
}

/// Warped model behind a warped chart ID, with the regime that built it.
inline WarpedChart make_warped_catalog_chart(const std::string& id) {
  if (id == "warped-hyperbolic") return make_warped_chart(Hyperbolic{1.0, 1.0}, 3, 10.0, id);
  if (id == "warped-hyperbolic-band") return make_warped_chart(Hyperbolic{2.0, 1.0}, 3, 10.0, id);
  if (id == "warped-power") return make_warped_chart(PowerDecay{1.0, 0.5, 1.0}, 3, 10.0, id);
  if (id == "warped-quadratic") return make_warped_chart(QuadraticDecay{1.0, 0.4}, 3, 10.0, id);
  if (id == "warped-flat") return make_warped_chart(CustomCurvature{"K=0", [](double) { return 0.0; }}, 3, 10.0, id);
  fail(ErrorCode::UnknownCatalogId, "unknown warped chart '" + id + "'");
}

inline Immersion make_immersion(const std::string& id);

inline Chart make_chart(const std::string& id) {
  int n = 0;
  if (detail::parse_suffix_int(id, "flat-R", &n) && n >= 1 && n <= 8) return flat_chart(n);
  if (detail::parse_suffix_int(id, "flat-C", &n) && n >= 1 && n <= 4)
    return flat_chart(2 * n, 10.0, id).with_complex_structure(standard_complex_structure(2 * n));
  if (id == "scaled-R2")
    return Chart(
        id, 2, CoordinateBox::cube(2, 10.0), [](const Vec&) { return Mat(4.0 * Mat::Identity(2, 2)); },
        [](const Vec&) { return MetricD1(2, Mat::Zero(2, 2)); },
        [](const Vec&) { return MetricD2(2, MetricD1(2, Mat::Zero(2, 2))); });
  if (id == "polar-R2") return detail::polar_r2();
  if (id == "conformal-C1") return detail::conformal_c1();
  if (id == "bumpy-R3") return detail::bumpy_r3();
  if (id.rfind("warped-", 0) == 0) return make_warped_catalog_chart(id).chart;
  if (id.rfind("induced:", 0) == 0) return induced_chart(make_immersion(id.substr(8)));
  fail(ErrorCode::UnknownCatalogId, "unknown chart '" + id + "'");
}

// ---------------------------------------------------------------------------
// Immersions.

namespace detail {

inline Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) out[i++] = d;
  return out;
}

inline Mat columns(std::initializer_list<Vec> cols) {
  Mat out(cols.begin()->size(), static_cast<Eigen::Index>(cols.size()));
  Eigen::Index j = 0;
  for (const Vec& c : cols) out.col(j++) = c;
  return out;
}

/// Graph-like complex curve (z, F(z)) in C^2 = R^4 from F and its first two
/// complex derivatives.
template <class F>
Immersion complex_graph(const std::string& id, F f, double half_width) {
  using C = std::complex<double>;
  auto u = [f](const Vec& x) {
    const auto v = f(C(x[0], x[1]));
    return vec({x[0], x[1], v[0].real(), v[0].imag()});
  };
  auto du = [f](const Vec& x) {
    const C d = f(C(x[0], x[1]))[1];
    // d/dx F = F', d/dy F = i F'
    const C dy = C(0, 1) * d;
    return columns({vec({1, 0, d.real(), d.imag()}), vec({0, 1, dy.real(), dy.imag()})});
  };
  auto ddu = [f](const Vec& x) {
    const C d2 = f(C(x[0], x[1]))[2];
    const C xy = C(0, 1) * d2;
    const C yy = -d2;
    return std::vector<Vec>{vec({0, 0, d2.real(), d2.imag()}), vec({0, 0, xy.real(), xy.imag()}),
                            vec({0, 0, xy.real(), xy.imag()}), vec({0, 0, yy.real(), yy.imag()})};
  };
  return Immersion(id, 2, 4, CoordinateBox::cube(2, half_width), u, du, ddu)
      .with_complex_structure(standard_complex_structure(2));
}

}  // namespace detail

inline std::vector<std::string> immersion_ids() {
  return {"plane", "plane3", "catenoid", "helicoid", "enneper", "paraboloid", "cplx-z2", "cplx-z3", "cplx-line", "cplx-z1z2"};
}

inline Immersion make_immersion(const std::string& id) {
  using detail::columns;
  using detail::vec;
  if (id == "plane") {
    return Immersion(
        id, 2, 3, CoordinateBox::cube(2, 10.0), [](const Vec& x) { return vec({x[0], x[1], 0.0}); },
        [](const Vec&) { return columns({vec({1, 0, 0}), vec({0, 1, 0})}); },
        [](const Vec&) { return std::vector<Vec>(4, Vec::Zero(3)); });
  }
  if (id == "plane3") {
    // affine 3-plane in R^4 through p0, tilted out of the coordinate hyperplane
    const double c = std::cos(0.3), s = std::sin(0.3);
    const Vec p0 = vec({0.5, -0.2, 0.3, 0.1});
    const Mat E = columns({vec({c, 0, 0, s}), vec({0, 1, 0, 0}), vec({0, 0, 1, 0})});
    return Immersion(
               id, 3, 4, CoordinateBox::cube(3, 10.0), [p0, E](const Vec& x) { return Vec(p0 + E * x); },
               [E](const Vec&) { return E; }, [](const Vec&) { return std::vector<Vec>(9, Vec::Zero(4)); })
        .with_base_point(p0);
  }
  if (id == "catenoid") {
    Vec lo(2), hi(2);
    lo << -4.0, -kPi;
    hi << 4.0, kPi;
    return Immersion(
               id, 2, 3, CoordinateBox(lo, hi, {false, true}),
               [](const Vec& x) {
                 return vec({std::cosh(x[0]) * std::cos(x[1]), std::cosh(x[0]) * std::sin(x[1]), x[0]});
               },
               [](const Vec& x) {
                 const double ch = std::cosh(x[0]), sh = std::sinh(x[0]), c = std::cos(x[1]), s = std::sin(x[1]);
                 return columns({vec({sh * c, sh * s, 1.0}), vec({-ch * s, ch * c, 0.0})});
               },
               [](const Vec& x) {
                 const double ch = std::cosh(x[0]), sh = std::sinh(x[0]), c = std::cos(x[1]), s = std::sin(x[1]);
                 const Vec st = vec({-sh * s, sh * c, 0.0});
                 return std::vector<Vec>{vec({ch * c, ch * s, 0.0}), st, st, vec({-ch * c, -ch * s, 0.0})};
               })
        .with_base_point(vec({1.0, 0.0, 0.0}));
  }
  if (id == "helicoid") {
    return Immersion(
        id, 2, 3, CoordinateBox::cube(2, 10.0),
        [](const Vec& x) { return vec({x[0] * std::cos(x[1]), x[0] * std::sin(x[1]), x[1]}); },
        [](const Vec& x) {
          const double c = std::cos(x[1]), s = std::sin(x[1]);
          return columns({vec({c, s, 0.0}), vec({-x[0] * s, x[0] * c, 1.0})});
        },
        [](const Vec& x) {
          const double c = std::cos(x[1]), s = std::sin(x[1]);
          const Vec st = vec({-s, c, 0.0});
          return std::vector<Vec>{Vec::Zero(3), st, st, vec({-x[0] * c, -x[0] * s, 0.0})};
        });
  }
  if (id == "enneper") {
    return Immersion(
        id, 2, 3, CoordinateBox::cube(2, 3.0),
        [](const Vec& x) {
          const double a = x[0], b = x[1];
          return vec({a - a * a * a / 3 + a * b * b, b - b * b * b / 3 + a * a * b, a * a - b * b});
        },
        [](const Vec& x) {
          const double a = x[0], b = x[1];
          return columns({vec({1 - a * a + b * b, 2 * a * b, 2 * a}), vec({2 * a * b, 1 - b * b + a * a, -2 * b})});
        },
        [](const Vec& x) {
          const double a = x[0], b = x[1];
          const Vec ab = vec({2 * b, 2 * a, 0.0});
          return std::vector<Vec>{vec({-2 * a, 2 * b, 2.0}), ab, ab, vec({2 * a, -2 * b, -2.0})};
        });
  }
  if (id == "paraboloid") {
    return Immersion(
               id, 2, 3, CoordinateBox::cube(2, 3.0),
               [](const Vec& x) { return vec({x[0], x[1], x[0] * x[0] + x[1] * x[1]}); },
               [](const Vec& x) { return columns({vec({1, 0, 2 * x[0]}), vec({0, 1, 2 * x[1]})}); },
               [](const Vec&) {
                 return std::vector<Vec>{vec({0, 0, 2}), Vec::Zero(3), Vec::Zero(3), vec({0, 0, 2})};
               })
        .with_base_point(vec({0.0, 0.0, -1.0}));
  }
  using C = std::complex<double>;
  if (id == "cplx-z2")
    return detail::complex_graph(id, [](C z) { return std::array<C, 3>{z * z, 2.0 * z, C(2.0)}; }, 3.0);
  if (id == "cplx-z3")
    return detail::complex_graph(id, [](C z) { return std::array<C, 3>{z * z * z, 3.0 * z * z, 6.0 * z}; }, 2.5);
  if (id == "cplx-line") {
    const C c(1.0, 0.5);
    return detail::complex_graph(id, [c](C z) { return std::array<C, 3>{c * z, c, C(0.0)}; }, 10.0);
  }
  if (id == "cplx-z1z2") {
    // (z1, z2, z1 z2) in C^3, coordinates (x1, y1, x2, y2)
    return Immersion(
               id, 4, 6, CoordinateBox::cube(4, 2.0),
               [](const Vec& x) {
                 return vec({x[0], x[1], x[2], x[3], x[0] * x[2] - x[1] * x[3], x[0] * x[3] + x[1] * x[2]});
               },
               [](const Vec& x) {
                 return columns({vec({1, 0, 0, 0, x[2], x[3]}), vec({0, 1, 0, 0, -x[3], x[2]}),
                                 vec({0, 0, 1, 0, x[0], x[1]}), vec({0, 0, 0, 1, -x[1], x[0]})});
               },
               [](const Vec&) {
                 std::vector<Vec> d(16, Vec::Zero(6));
                 auto set = [&](int i, int j, double re, double im) {
                   d[static_cast<std::size_t>(i * 4 + j)] = d[static_cast<std::size_t>(j * 4 + i)] =
                       vec({0, 0, 0, 0, re, im});
                 };
                 set(0, 2, 1, 0);
                 set(0, 3, 0, 1);
                 set(1, 2, 0, 1);
                 set(1, 3, -1, 0);
                 return d;
               })
        .with_complex_structure(standard_complex_structure(4));
  }
  fail(ErrorCode::UnknownCatalogId, "unknown immersion '" + id + "'");
}

// ---------------------------------------------------------------------------
// Forms.

namespace detail {

/// "dx1^dx3" -> {0, 2}; empty optional when the string is not of that shape.
inline std::optional<std::vector<int>> parse_coordinate_form(const std::string& id) {
  std::vector<int> idx;
  std::size_t pos = 0;
  while (pos < id.size()) {
    if (id.compare(pos, 2, "dx") != 0) return std::nullopt;
    pos += 2;
    std::size_t end = pos;
    while (end < id.size() && id[end] >= '0' && id[end] <= '9') ++end;
    if (end == pos) return std::nullopt;
    idx.push_back(std::stoi(id.substr(pos, end - pos)) - 1);
    pos = end;
    if (pos < id.size()) {
      if (id[pos] != '^') return std::nullopt;
      ++pos;
    }
  }
  if (idx.empty()) return std::nullopt;
  return idx;
}

inline Polynomial mono(double c, std::vector<int> powers) { return Polynomial{{Monomial{c, std::move(powers)}}}; }

inline void require_dim(const std::string& id, int m, int need, bool even = false) {
  if (m < need) fail(ErrorCode::DegreeExceedsDimension, "form '" + id + "' needs dimension >= " + std::to_string(need));
  if (even && m % 2 != 0) fail(ErrorCode::NoComplexStructure, "form '" + id + "' needs an even dimension");
}

/// Unit normal of a hypersurface and its differential, from the map jets.
inline std::pair<Vec, Mat> normal_and_differential(const Immersion& imm, const Vec& x) {
  const Mat d = imm.tangent(x);
  const auto dd = imm.second(x);
  const Vec a = d.col(0), b = d.col(1);
  const Eigen::Vector3d c = Eigen::Vector3d(a[0], a[1], a[2]).cross(Eigen::Vector3d(b[0], b[1], b[2]));
  const double len = c.norm();
  const Vec n = Vec(c) / len;
  const Mat P = Mat::Identity(3, 3) - n * n.transpose();
  Mat dn(3, 2);
  for (int i = 0; i < 2; ++i) {
    const Vec ai = dd[static_cast<std::size_t>(i)], bi = dd[static_cast<std::size_t>(2 + i)];
    const Eigen::Vector3d dc = Eigen::Vector3d(ai[0], ai[1], ai[2]).cross(Eigen::Vector3d(b[0], b[1], b[2])) +
                               Eigen::Vector3d(a[0], a[1], a[2]).cross(Eigen::Vector3d(bi[0], bi[1], bi[2]));
    dn.col(i) = P * Vec(dc) / len;
  }
  return {n, dn};
}

}  // namespace detail

inline std::vector<std::string> form_ids() {
  return {"section",  "dx<i>[^dx<j>...]", "x1dx1",     "x2dx1",         "rotation",      "sum-2form",
          "kahler",   "dharm",            "dz2",       "dz1z2",         "twisted-section", "twisted-1form",
          "gauss-dn", "A-form"};
}

/// Catalog form on `chart`. Forms built from an immersion ("gauss-dn",
/// "A-form") need an induced chart and carry finite-difference jets.
inline BundleValuedForm make_form(const std::string& id, const Chart& chart) {
  using detail::mono;
  const int m = chart.dim();
  if (auto idx = detail::parse_coordinate_form(id)) {
    std::vector<int> sorted = *idx;
    if (sort_with_sign(sorted) == 0) fail(ErrorCode::InvalidArgument, "repeated index in '" + id + "'");
    for (int i : *idx)
      if (i < 0 || i >= m) fail(ErrorCode::DegreeExceedsDimension, "form '" + id + "' exceeds the chart dimension");
    return polynomial_form(id, m, static_cast<int>(idx->size()), 1, {{*idx, 0, Polynomial::constant(1.0)}});
  }
  if (id == "section") return polynomial_form(id, m, 0, 1, {{{}, 0, Polynomial::constant(1.0)}});
  if (id == "x1dx1") return polynomial_form(id, m, 1, 1, {{{0}, 0, Polynomial::linear(0)}});
  if (id == "x2dx1") {
    detail::require_dim(id, m, 2);
    return polynomial_form(id, m, 1, 1, {{{0}, 0, Polynomial::linear(1)}});
  }
  if (id == "rotation") {
    detail::require_dim(id, m, 2);
    return polynomial_form(id, m, 1, 1, {{{0}, 0, Polynomial::linear(1)}, {{1}, 0, Polynomial::linear(0, -1.0)}});
  }
  if (id == "sum-2form") {
    detail::require_dim(id, m, 3);
    return polynomial_form(id, m, 2, 1,
                           {{{0, 1}, 0, Polynomial::constant(1.0)},
                            {{0, 2}, 0, Polynomial::constant(1.0)},
                            {{1, 2}, 0, Polynomial::constant(1.0)}});
  }
  if (id == "kahler") {
    detail::require_dim(id, m, 2, true);
    std::vector<FormTerm> t;
    for (int k = 0; k + 1 < m; k += 2) t.push_back({{k, k + 1}, 0, Polynomial::constant(1.0)});
    return polynomial_form(id, m, 2, 1, t);
  }
  if (id == "dharm") {
    // d(x1^2 - x2^2)
    detail::require_dim(id, m, 2);
    return polynomial_form(id, m, 1, 1, {{{0}, 0, Polynomial::linear(0, 2.0)}, {{1}, 0, Polynomial::linear(1, -2.0)}});
  }
  if (id == "dz2") {
    // d(z^2) as an R^2-valued 1-form on C^1
    detail::require_dim(id, m, 2, true);
    return polynomial_form(id, m, 1, 2,
                           {{{0}, 0, Polynomial::linear(0, 2.0)},
                            {{0}, 1, Polynomial::linear(1, 2.0)},
                            {{1}, 0, Polynomial::linear(1, -2.0)},
                            {{1}, 1, Polynomial::linear(0, 2.0)}});
  }
  if (id == "dz1z2") {
    // d(z1 z2) on C^2 with coordinates (x1, y1, x2, y2)
    detail::require_dim(id, m, 4, true);
    const auto L = [](int i, double c) { return Polynomial::linear(i, c); };
    return polynomial_form(id, m, 1, 2,
                           {{{0}, 0, L(2, 1)},  {{0}, 1, L(3, 1)},  {{1}, 0, L(3, -1)}, {{1}, 1, L(2, 1)},
                            {{2}, 0, L(0, 1)},  {{2}, 1, L(1, 1)},  {{3}, 0, L(1, -1)}, {{3}, 1, L(0, 1)}});
  }
  if (id == "twisted-section") {
    detail::require_dim(id, m, 2);
    return polynomial_form(id, m, 0, 2,
                           {{{}, 0, Polynomial::constant(1.0) + mono(0.5, {1, 1})},
                            {{}, 1, Polynomial::linear(1, 0.3) + mono(-0.2, {2})}},
                           {{0, 0, 1, Polynomial::constant(0.7) + Polynomial::linear(1, 0.2)},
                            {1, 0, 1, mono(0.1, {1, 1})}});
  }
  if (id == "twisted-1form") {
    detail::require_dim(id, m, 2);
    return polynomial_form(id, m, 1, 2,
                           {{{0}, 0, Polynomial::linear(1)},
                            {{0}, 1, mono(1.0, {2})},
                            {{1}, 0, Polynomial::constant(0.5) + mono(0.3, {1, 1})},
                            {{1}, 1, Polynomial::linear(0, -1.0)}},
                           {{0, 0, 1, Polynomial::linear(1, 0.3)}, {1, 0, 1, Polynomial::linear(0, 0.1)}});
  }
  if (id == "gauss-dn" || id == "A-form") {
    if (chart.id().rfind("induced:", 0) != 0)
      fail(ErrorCode::InvalidArgument, "form '" + id + "' needs an induced chart");
    const Immersion imm = make_immersion(chart.id().substr(8));
    if (id == "gauss-dn") {
      if (imm.dim() != 2 || imm.ambient_dim() != 3)
        fail(ErrorCode::InvalidArgument, "gauss-dn needs a surface in R^3");
      return BundleValuedForm(id + ":" + imm.id(), 2, 1, 3,
                              [imm](const Vec& x) { return Mat(detail::normal_and_differential(imm, x).second.transpose()); });
    }
    // A as a 1-form with values in R^{m N}: component (b, a) of row i is A(d_i, e_b)^a
    const int N = imm.ambient_dim();
    return BundleValuedForm(id + ":" + imm.id(), m, 1, m * N, [imm, m, N](const Vec& x) {
      const InducedGeometry G = induced_geometry_at(imm, x);
      const Mat E = orthonormal_frame(G.g);
      Mat c(m, m * N);
      for (int i = 0; i < m; ++i)
        for (int b = 0; b < m; ++b) {
          const Vec v = G.A_of(Vec::Unit(m, i), E.col(b));
          for (int a = 0; a < N; ++a) c(i, b * N + a) = v[a];
        }
      return c;
    });
  }
  fail(ErrorCode::UnknownCatalogId, "unknown form '" + id + "'");
}

/// (form, chart) pairs with analytic jets, used for cross-route checks.
inline std::vector<std::pair<std::string, std::string>> analytic_form_cases() {
  return {{"section", "flat-R3"},      {"dx1", "flat-R3"},        {"dx1^dx2", "flat-R3"},
          {"dx1^dx2^dx3", "flat-R3"},  {"x1dx1", "flat-R2"},      {"x2dx1", "flat-R3"},
          {"rotation", "flat-R2"},     {"sum-2form", "flat-R3"},  {"kahler", "flat-C2"},
          {"dharm", "flat-R2"},        {"dz2", "flat-C1"},        {"dz1z2", "flat-C2"},
          {"twisted-section", "flat-R2"}, {"twisted-1form", "flat-R2"}, {"dx1", "scaled-R2"},
          {"x1dx1", "polar-R2"},       {"rotation", "conformal-C1"}, {"dz2", "conformal-C1"},
          {"x2dx1", "bumpy-R3"},       {"sum-2form", "bumpy-R3"}, {"twisted-1form", "bumpy-R3"},
          {"dx1^dx2", "warped-hyperbolic"}, {"x1dx1", "warped-power"}, {"twisted-section", "warped-quadratic"}};
}

}  // namespace stresslab

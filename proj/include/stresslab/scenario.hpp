#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "stresslab/catalog.hpp"
#include "stresslab/exhaustion.hpp"
#include "stresslab/monotonicity.hpp"
#include "stresslab/report_io.hpp"
#include "stresslab/submanifold.hpp"

namespace stresslab {

inline constexpr const char* kReportSchemaId = "stresslab.report.v1";

inline const std::vector<std::string>& scenario_kinds() {
  static const std::vector<std::string> k = {"growth-order", "integral-formula", "ratio-scan", "annulus-scan",
                                             "volume-scan",  "bernstein",        "gauss-energy"};
  return k;
}

// ---------------------------------------------------------------------------
// Schemas.

namespace schema {

inline json type(const char* t) { return {{"type", t}}; }
inline json array_of(json items, std::size_t min_items = 0) {
  json s = {{"type", "array"}, {"items", std::move(items)}};
  if (min_items) s["minItems"] = min_items;
  return s;
}
inline json object(json props, std::vector<std::string> required, bool closed = true) {
  json s = {{"type", "object"}, {"properties", std::move(props)}};
  if (!required.empty()) s["required"] = required;
  if (closed) s["additionalProperties"] = false;
  return s;
}
inline json numbers(std::size_t min_items = 0) { return array_of(type("number"), min_items); }
inline json positive_int(int minimum = 1) { return {{"type", "integer"}, {"minimum", minimum}}; }

inline json sample() {
  return object({{"type", {{"enum", {"grid", "points", "random", "radial"}}}},
                 {"lo", numbers(1)},
                 {"hi", numbers(1)},
                 {"n", positive_int()},
                 {"points", array_of(numbers(1), 1)},
                 {"seed", positive_int(0)},
                 {"r", numbers(2)},
                 {"angles", numbers()}},
                {"type"});
}

inline json exhaustion() {
  return object({{"type", {{"enum", {"euclidean", "ellipsoid", "complex-ellipsoid", "radial", "extrinsic"}}}},
                 {"a", numbers(1)}},
                {"type"});
}

inline json quadrature() {
  return object({{"resolution", positive_int(16)},
                 {"boundary_rays", positive_int(16)},
                 {"threads", positive_int(1)},
                 {"march_samples", positive_int(4)},
                 {"center", numbers(1)}},
                {});
}

inline json regime() {
  return object({{"regime", {{"enum", {"real-quadratic", "complex-hyperbolic", "complex-power", "complex-quadratic", "volume"}}}},
                 {"a", type("number")},
                 {"b", type("number")},
                 {"alpha", type("number")},
                 {"beta", type("number")},
                 {"A", type("number")},
                 {"B", type("number")},
                 {"eps", type("number")},
                 {"variant", positive_int()},
                 {"r", type("number")},
                 {"m", positive_int()},
                 {"p", positive_int(0)},
                 {"relation", {{"enum", {"equal", "lower-bound"}}}},
                 {"tol", type("number")}},
                {"regime"});
}

inline json poly() {
  return array_of(object({{"coef", type("number")}, {"powers", array_of(positive_int(0))}}, {"coef"}));
}

inline json form() {
  json inline_form = object(
      {{"label", type("string")},
       {"degree", positive_int(0)},
       {"rank", positive_int(1)},
       {"terms", array_of(object({{"index", array_of(positive_int(1))}, {"component", positive_int(1)}, {"poly", poly()}},
                                 {"index", "poly"}))},
       {"connection",
        array_of(object({{"direction", positive_int(1)}, {"row", positive_int(1)}, {"col", positive_int(1)}, {"poly", poly()}},
                        {"direction", "row", "col", "poly"}))}},
      {"degree", "terms"});
  inline_form["type"] = json::array({"string", "object"});
  return inline_form;
}

inline json grid() {
  json g = object({{"lo", type("number")}, {"hi", type("number")}, {"n", positive_int(1)}}, {"lo", "hi"});
  g["type"] = json::array({"array", "object"});
  g["items"] = type("number");
  g["minItems"] = 1;
  return g;
}

inline json lambda() {
  json l = object({{"closed_form", regime()},
                   {"growth_order", object({{"sample", sample()}, {"p", positive_int(0)}, {"mode", {{"enum", {"real", "complex"}}}}},
                                           {"sample", "p"})}},
                  {});
  l["type"] = json::array({"number", "object"});
  return l;
}

/// Configuration schema for one scenario kind.
inline json config(const std::string& kind) {
  json props = {{"id", type("string")},
                {"kind", {{"enum", {kind}}}},
                {"description", type("string")},
                {"quadrature", quadrature()},
                {"expect", type("object")},
                {"output", object({{"dir", type("string")}}, {})}};
  std::vector<std::string> req = {"id", "kind"};
  auto add = [&](const char* name, json s, bool required) {
    props[name] = std::move(s);
    if (required) req.push_back(name);
  };
  if (kind == "growth-order") {
    add("chart", type("string"), true);
    add("exhaustion", exhaustion(), true);
    add("p", positive_int(0), true);
    add("mode", {{"enum", {"real", "complex"}}}, false);
    add("sample", sample(), true);
    add("critical_cutoff", type("number"), false);
    add("closed_form", regime(), false);
  } else if (kind == "integral-formula") {
    add("chart", type("string"), true);
    add("form", form(), true);
    add("jets", {{"enum", {"analytic", "finite-difference"}}}, false);
    add("exhaustion", exhaustion(), true);
    json t = numbers(1);
    t["type"] = json::array({"number", "array"});
    add("t", t, true);
  } else if (kind == "ratio-scan" || kind == "annulus-scan") {
    add("chart", type("string"), true);
    add("form", form(), true);
    add("jets", {{"enum", {"analytic", "finite-difference"}}}, false);
    add("exhaustion", exhaustion(), true);
    add("lambda", lambda(), true);
    add("grid", grid(), true);
    add("assert", type("boolean"), false);
    add("certify_sample", sample(), false);
    if (kind == "annulus-scan") add("R0", type("number"), true);
  } else if (kind == "volume-scan") {
    add("immersion", type("string"), true);
    add("lambda", lambda(), false);
    add("grid", grid(), true);
    add("assert", type("boolean"), false);
  } else if (kind == "bernstein") {
    add("immersion", type("string"), true);
    add("window",
        object({{"lo", numbers(1)},
                {"hi", numbers(1)},
                {"samples_per_axis", positive_int()},
                {"rho_min", type("number")},
                {"rho_max", type("number")},
                {"rho_points", positive_int(2)}},
               {"lo", "hi"}),
        true);
    add("boundary_R0", type("number"), false);
    add("rho_hessian_samples", positive_int(), false);
    add("seed", positive_int(0), false);
  } else if (kind == "gauss-energy") {
    add("immersion", type("string"), true);
    add("sample", sample(), true);
  } else {
    fail(ErrorCode::ConfigParse, "unknown scenario kind '" + kind + "'");
  }
  json s = object(props, req);
  s["$schema"] = "https://json-schema.org/draft/2020-12/schema";
  s["title"] = "stresslab scenario: " + kind;
  return s;
}

inline json report() {
  json check = object({{"name", type("string")},
                       {"pass", type("boolean")},
                       {"value", {{"type", {"number", "null"}}}},
                       {"limit", {{"type", {"number", "null"}}}}},
                      {"name", "pass", "value", "limit"});
  json s = object({{"schema", {{"enum", {kReportSchemaId}}}},
                   {"id", type("string")},
                   {"kind", {{"enum", scenario_kinds()}}},
                   {"status", {{"enum", {"pass", "fail", "error"}}}},
                   {"exit_code", {{"enum", {0, 1}}}},
                   {"first_failure", {{"type", {"string", "null"}}}},
                   {"error", {{"type", {"object", "null"}}}},
                   {"asserted", array_of(check)},
                   {"diagnostic", type("object")},
                   {"results", type("object")},
                   {"csv_columns", array_of(type("string"), 1)}},
                  {"schema", "id", "kind", "status", "exit_code", "first_failure", "error", "asserted", "diagnostic",
                   "results", "csv_columns"});
  s["$schema"] = "https://json-schema.org/draft/2020-12/schema";
  s["title"] = "stresslab scenario report";
  return s;
}

}  // namespace schema

// ---------------------------------------------------------------------------
// Config decoding helpers.

namespace detail {

inline Vec to_vec(const json& a) {
  Vec v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

inline json from_vec(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

/// Uniform doubles in [0, 1) from a fixed generator; the mapping does not
/// depend on the standard library's distribution implementations.
class UnitStream {
 public:
  explicit UnitStream(std::uint64_t seed) : gen_(seed) {}
  double next() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 gen_;
};

inline void require_size(const Vec& v, int m, const std::string& what) {
  if (v.size() != m) fail(ErrorCode::InvalidArgument, what + " has dimension " + std::to_string(v.size()) + ", chart has " + std::to_string(m));
}

inline std::vector<Vec> make_sample(const json& s, const Chart& chart) {
  const std::string type = s.at("type").get<std::string>();
  const int m = chart.dim();
  std::vector<Vec> out;
  if (type == "points") {
    for (const auto& p : s.at("points")) {
      out.push_back(to_vec(p));
      require_size(out.back(), m, "sample point");
    }
  } else if (type == "grid" || type == "random") {
    const Vec lo = to_vec(s.at("lo")), hi = to_vec(s.at("hi"));
    require_size(lo, m, "sample lo");
    require_size(hi, m, "sample hi");
    const int n = s.value("n", 5);
    if (type == "grid") {
      out = window_grid(lo, hi, n);
    } else {
      UnitStream u(s.value("seed", 1u));
      for (int k = 0; k < n; ++k) {
        Vec x(m);
        for (int i = 0; i < m; ++i) x[i] = lo[i] + (hi[i] - lo[i]) * u.next();
        out.push_back(x);
      }
    }
  } else {  // radial: (r, angles...) on a warped chart
    const Vec r = to_vec(s.at("r"));
    const int n = s.value("n", 20);
    Vec ang = Vec::Constant(m - 1, kPi / 2);
    if (m >= 2) ang[m - 2] = 0.3;
    if (s.contains("angles")) {
      ang = to_vec(s["angles"]);
      require_size(ang, m - 1, "radial sample angles");
    }
    for (int k = 0; k < n; ++k) {
      Vec x(m);
      x[0] = n == 1 ? r[0] : r[0] + (r[1] - r[0]) * k / (n - 1);
      x.tail(m - 1) = ang;
      out.push_back(x);
    }
  }
  for (const Vec& x : out)
    if (!chart.box().contains(x)) fail(ErrorCode::InvalidArgument, "sample point outside the chart box of '" + chart.id() + "'");
  return out;
}

inline std::optional<Immersion> chart_immersion(const Chart& chart) {
  if (chart.id().rfind("induced:", 0) == 0) return make_immersion(chart.id().substr(8));
  return std::nullopt;
}

inline ExhaustionFunction make_exhaustion(const json& e, const Chart& chart) {
  const std::string type = e.at("type").get<std::string>();
  const int m = chart.dim();
  if (type == "euclidean") return euclidean_exhaustion(m);
  if (type == "ellipsoid") {
    const Vec a = to_vec(e.at("a"));
    require_size(a, m, "ellipsoid weights");
    return ellipsoid_exhaustion(a);
  }
  if (type == "complex-ellipsoid") {
    const Vec a = to_vec(e.at("a"));
    require_size(a, m / 2, "complex ellipsoid weights");
    if (m % 2) fail(ErrorCode::NoComplexStructure, "complex ellipsoid on an odd-dimensional chart");
    Vec full(m);
    for (int i = 0; i < m / 2; ++i) full[2 * i] = full[2 * i + 1] = a[i];
    return ellipsoid_exhaustion(full);
  }
  if (type == "radial") {
    if (chart.id().rfind("warped-", 0) != 0) fail(ErrorCode::InvalidArgument, "radial exhaustion needs a warped chart");
    Vec c = Vec::Zero(m);
    c[0] = chart.box().lo[0];
    return {radial_squared_field(), c};
  }
  const auto imm = chart_immersion(chart);
  if (!imm) fail(ErrorCode::InvalidArgument, "extrinsic exhaustion needs an induced chart");
  return extrinsic_exhaustion(*imm);
}

inline Polynomial make_poly(const json& a) {
  Polynomial p;
  for (const auto& t : a) p.terms.push_back({t.at("coef").get<double>(), t.value("powers", std::vector<int>{})});
  return p;
}

inline BundleValuedForm make_form(const json& f, const Chart& chart, const std::string& jets) {
  std::optional<BundleValuedForm> w;
  if (f.is_string()) {
    w = stresslab::make_form(f.get<std::string>(), chart);
  } else {
    const int p = f.at("degree").get<int>();
    const int k = f.value("rank", 1);
    std::vector<FormTerm> terms;
    for (const auto& t : f.at("terms")) {
      std::vector<int> idx = t.at("index").get<std::vector<int>>();
      for (int& i : idx) --i;
      terms.push_back({idx, t.value("component", 1) - 1, make_poly(t.at("poly"))});
    }
    std::vector<ConnectionTerm> conn;
    for (const auto& c : f.value("connection", json::array()))
      conn.push_back({c.at("direction").get<int>() - 1, c.at("row").get<int>() - 1, c.at("col").get<int>() - 1,
                      make_poly(c.at("poly"))});
    w = polynomial_form(f.value("label", std::string("inline")), chart.dim(), p, k, terms, conn);
  }
  if (jets == "finite-difference") return w->finite_difference();
  return *w;
}

inline GrowthRegime make_regime(const json& r, int m, int p) {
  const std::string name = r.at("regime").get<std::string>();
  m = r.value("m", m);
  p = r.value("p", p);
  if (name == "real-quadratic") return RealQuadratic{r.value("a", 0.0), r.value("b", 0.0), m, p};
  if (name == "complex-hyperbolic") return ComplexHyperbolic{r.value("alpha", 1.0), r.value("beta", 1.0), m, p};
  if (name == "complex-power") return ComplexPower{r.value("A", 0.0), r.value("B", 0.0), r.value("eps", 1.0), m, p};
  if (name == "complex-quadratic") return ComplexQuadratic{r.value("a", 0.0), r.value("b", 0.0), m, p};
  VolumeGrowth v{r.value("variant", 1), m};
  v.beta = r.value("beta", 0.0);
  v.B = r.value("B", 0.0);
  v.eps = r.value("eps", 1.0);
  v.b = r.value("b", 0.0);
  if (r.contains("r")) v.r = r["r"].get<double>();
  return v;
}

inline std::vector<double> make_grid(const json& g) {
  if (g.is_array()) return g.get<std::vector<double>>();
  return geometric_grid(g.at("lo").get<double>(), g.at("hi").get<double>(), g.value("n", 12));
}

inline QuadratureConfig make_quadrature(const json& cfg, const std::optional<int>& resolution,
                                        const std::optional<int>& threads) {
  QuadratureConfig q;
  const json s = cfg.value("quadrature", json::object());
  q.resolution = s.value("resolution", q.resolution);
  q.boundary_rays = s.value("boundary_rays", q.boundary_rays);
  q.threads = s.value("threads", q.threads);
  q.march_samples = s.value("march_samples", q.march_samples);
  if (s.contains("center")) q.center = to_vec(s["center"]);
  if (resolution) q.resolution = *resolution;
  if (threads) q.threads = *threads;
  q.validate();
  return q;
}

/// Points of {Phi < t} drawn by rejection from the chart box.
inline std::vector<Vec> sample_sublevel(const ExhaustionFunction& exh, const Chart& chart, double t, int n,
                                        std::uint64_t seed) {
  UnitStream u(seed);
  std::vector<Vec> out;
  const Vec& lo = chart.box().lo;
  const Vec& hi = chart.box().hi;
  for (long tries = 0; static_cast<int>(out.size()) < n && tries < 400000; ++tries) {
    Vec x(chart.dim());
    for (int i = 0; i < chart.dim(); ++i) x[i] = lo[i] + (hi[i] - lo[i]) * u.next();
    if (exh.phi(x) < t) out.push_back(x);
  }
  if (out.empty()) fail(ErrorCode::EmptySample, "no sample point found inside the sublevel set");
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Results.

struct Check {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double limit = 0.0;
};

struct KindResult {
  std::vector<Check> checks;
  json results = json::object();
  json diagnostic = json::object();
  std::vector<std::string> csv_header;
  std::vector<std::vector<double>> csv_rows;
};

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::optional<int> resolution;
  std::optional<int> threads;
  bool write_files = true;
};

struct ScenarioOutcome {
  int exit_code = 2;
  std::string id;
  std::string kind;
  json report;
  std::string report_text;
  std::string csv_text;
  std::filesystem::path json_path;
  std::filesystem::path csv_path;
  std::string message;
};

namespace detail {

inline void expect_close(KindResult& r, const json& expect, const char* key, double actual, double default_tol) {
  if (!expect.contains(key)) return;
  const double want = expect[key].get<double>();
  const double tol = expect.value(std::string(key) + "_tol", expect.value("tol", default_tol));
  const double gap = std::abs(actual - want);
  r.checks.push_back({std::string("expect_") + key, gap <= tol, gap, tol});
}

inline void expect_flag(KindResult& r, const json& expect, const char* key, bool actual) {
  if (!expect.contains(key)) return;
  const bool want = expect[key].get<bool>();
  r.checks.push_back({std::string("expect_") + key, want == actual, actual ? 1.0 : 0.0, want ? 1.0 : 0.0});
}

inline json monotonicity_json(const MonotonicityReport& rep) {
  json rows = json::array();
  for (const auto& row : rep.rows)
    rows.push_back({{"rho", number(row.rho)},
                    {"raw", number(row.raw)},
                    {"raw_err", number(row.raw_err)},
                    {"scaled", number(row.scaled)},
                    {"err", number(row.err)}});
  json j = {{"label", rep.label},
            {"lambda_used", number(rep.lambda_used)},
            {"rows", rows},
            {"nondecreasing", rep.nondecreasing},
            {"violations", rep.violations},
            {"slack", number(rep.slack)},
            {"strictly_increasing", rep.strictly_increasing},
            {"constant_within_error", rep.constant_within_error},
            {"tolerance_factor", rep.tolerance_factor}};
  if (rep.boundary_condition) {
    const auto& bc = *rep.boundary_condition;
    j["boundary_condition"] = {{"R0", number(bc.R0)},
                               {"min_slack", number(bc.min_slack)},
                               {"sample_size", bc.sample_size},
                               {"status", bc.holds ? "holds" : "violated"}};
  }
  return j;
}

inline void monotonicity_csv(KindResult& r, const MonotonicityReport& rep) {
  r.csv_header = {"rho", "raw", "scaled", "err"};
  for (const auto& row : rep.rows) r.csv_rows.push_back({row.rho, row.raw, row.scaled, row.err});
}

inline double resolve_lambda(const json& cfg, const Chart& chart, const ExhaustionFunction& exh, json& diag,
                             double fallback) {
  if (!cfg.contains("lambda")) {
    diag["lambda_source"] = "default";
    return fallback;
  }
  const json& l = cfg["lambda"];
  if (l.is_number()) {
    diag["lambda_source"] = "given";
    return l.get<double>();
  }
  if (l.contains("closed_form")) {
    const auto cf = lambda_closed_form(make_regime(l["closed_form"], chart.dim(), 0));
    diag["lambda_source"] = "closed-form";
    diag["lambda_hypothesis"] = cf.hypothesis;
    return cf.value;
  }
  if (l.contains("growth_order")) {
    const json& g = l["growth_order"];
    ExhaustionSpec spec{exh, chart, g.at("p").get<int>(), make_sample(g.at("sample"), chart)};
    const bool complex = g.value("mode", std::string("real")) == "complex";
    const auto rep = complex ? growth_constants_complex(spec) : growth_constants_real(spec);
    diag["lambda_source"] = "growth-order";
    diag["lambda_window"] = "window-valid: k2 estimated on the sample only";
    diag["k1"] = number(rep.k1);
    diag["k2"] = number(rep.k2);
    return rep.lambda;
  }
  fail(ErrorCode::ConfigParse, "lambda needs a number, closed_form or growth_order");
}

// Conservation certification shared by the scan kinds.
inline bool certify(KindResult& r, const BundleValuedForm& w, const Chart& chart, const std::vector<Vec>& sample,
                    bool asserted) {
  const double threshold = w.jet_mode() == JetMode::analytic && chart.jet_mode() == JetMode::analytic ? 1e-8 : 1e-4;
  const double res = conservation_residual(w, chart, sample);
  r.diagnostic["conservation_residual"] = number(res);
  r.diagnostic["certification_threshold"] = threshold;
  r.diagnostic["certification_sample_size"] = sample.size();
  const bool ok = res <= threshold;
  if (asserted) r.checks.push_back({"conservation_certified", ok, res, threshold});
  return ok;
}

// ---------------------------------------------------------------------------

inline KindResult run_growth_order(const json& cfg) {
  KindResult r;
  const Chart chart = make_chart(cfg.at("chart").get<std::string>());
  const ExhaustionFunction exh = make_exhaustion(cfg.at("exhaustion"), chart);
  const int p = cfg.at("p").get<int>();
  const bool complex = cfg.value("mode", std::string("real")) == "complex";
  ExhaustionSpec spec{exh, chart, p, make_sample(cfg.at("sample"), chart)};
  spec.critical_cutoff = cfg.value("critical_cutoff", spec.critical_cutoff);
  spec.window = "sample of " + std::to_string(spec.sample.size()) + " points";
  GrowthOrderReport rep = complex ? growth_constants_complex(spec) : growth_constants_real(spec);

  const json expect = cfg.value("expect", json::object());
  if (expect.value("k1_positive", true)) r.checks.push_back({"k1_positive", rep.k1_positive(), rep.k1, 0.0});
  expect_close(r, expect, "k1", rep.k1, 1e-9);
  expect_close(r, expect, "k2", rep.k2, 1e-9);
  expect_close(r, expect, "lambda", rep.lambda, 1e-9);

  r.results = {{"mode", complex ? "complex" : "real"},
               {"p", p},
               {"k1", number(rep.k1)},
               {"k2", number(rep.k2)},
               {"lambda", number(rep.lambda)},
               {"sample_size", rep.sample_size},
               {"excluded_critical_points", rep.excluded},
               {"k1_argmin", from_vec(rep.k1_argmin)},
               {"exhaustion_status", rep.k1_positive() ? "ok" : "failed"}};
  if (cfg.contains("closed_form")) {
    const json& c = cfg["closed_form"];
    const int m = complex ? chart.dim() / 2 : chart.dim();
    const auto cf = lambda_closed_form(make_regime(c, m, p));
    const double tol = c.value("tol", 1e-9);
    r.results["closed_form"] = {{"value", number(cf.value)},
                                {"hypothesis", cf.hypothesis},
                                {"hypothesis_value", number(cf.hypothesis_value)}};
    if (c.value("relation", std::string("equal")) == "equal")
      r.checks.push_back({"closed_form_match", std::abs(rep.lambda - cf.value) <= tol, std::abs(rep.lambda - cf.value), tol});
    else
      r.checks.push_back({"closed_form_lower_bound", rep.lambda >= cf.value - tol, rep.lambda - cf.value, -tol});
  }
  r.diagnostic = {{"window", spec.window}, {"critical_cutoff", spec.critical_cutoff},
                  {"lambda_validity", "window-valid: k2 is a maximum over the sample"}};
  r.csv_header = {"index", "phi", "term", "grad_phi_sq", "excluded"};
  for (std::size_t i = 0; i < rep.samples.size(); ++i) {
    const auto& s = rep.samples[i];
    r.csv_rows.push_back({static_cast<double>(i), s.phi, s.term, s.grad_phi_sq, s.excluded ? 1.0 : 0.0});
  }
  return r;
}

inline KindResult run_integral_formula(const json& cfg, const QuadratureConfig& q) {
  KindResult r;
  const Chart chart = make_chart(cfg.at("chart").get<std::string>());
  const BundleValuedForm w = make_form(cfg.at("form"), chart, cfg.value("jets", std::string("analytic")));
  const ExhaustionFunction exh = make_exhaustion(cfg.at("exhaustion"), chart);
  std::vector<double> ts;
  if (cfg.at("t").is_number()) ts.push_back(cfg["t"].get<double>());
  else ts = cfg["t"].get<std::vector<double>>();
  const json expect = cfg.value("expect", json::object());
  json rows = json::array();
  r.csv_header = {"t", "lhs", "lhs_err", "rhs", "rhs_err", "gap", "tolerance", "pass"};
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto rep = verify_integral_formula(w, exh, chart, ts[i], q);
    const std::string suffix = ts.size() > 1 ? "[" + std::to_string(i) + "]" : "";
    r.checks.push_back({"identity" + suffix, rep.pass, rep.gap, rep.tolerance});
    rows.push_back({{"t", number(rep.t)},
                    {"lhs", number(rep.lhs.value)},
                    {"lhs_err", number(rep.lhs.error)},
                    {"rhs", number(rep.rhs.value)},
                    {"rhs_err", number(rep.rhs.error)},
                    {"gap", number(rep.gap)},
                    {"relative_gap", number(rep.relative_gap)},
                    {"tolerance", number(rep.tolerance)},
                    {"pass", rep.pass}});
    r.csv_rows.push_back({rep.t, rep.lhs.value, rep.lhs.error, rep.rhs.value, rep.rhs.error, rep.gap, rep.tolerance,
                          rep.pass ? 1.0 : 0.0});
    if (i == 0) {
      expect_close(r, expect, "lhs", rep.lhs.value, 1e-3);
      expect_close(r, expect, "rhs", rep.rhs.value, 1e-3);
    }
  }
  r.results = {{"form", w.label()}, {"degree", w.degree()}, {"rows", rows}};
  r.diagnostic = {{"resolution", q.resolution}, {"boundary_rays", boundary_ray_count(chart, q)}};
  return r;
}

inline KindResult run_scan(const json& cfg, const QuadratureConfig& q, bool annulus) {
  KindResult r;
  const Chart chart = make_chart(cfg.at("chart").get<std::string>());
  const BundleValuedForm w = make_form(cfg.at("form"), chart, cfg.value("jets", std::string("analytic")));
  const ExhaustionFunction exh = make_exhaustion(cfg.at("exhaustion"), chart);
  const std::vector<double> grid = make_grid(cfg.at("grid"));
  check_grid(grid);
  const bool asserted = cfg.value("assert", true);
  const double lambda = resolve_lambda(cfg, chart, exh, r.diagnostic, static_cast<double>(chart.dim()));
  const auto sample = cfg.contains("certify_sample") ? make_sample(cfg["certify_sample"], chart)
                                                     : sample_sublevel(exh, chart, grid.back(), 64, 7);
  const bool certified = certify(r, w, chart, sample, asserted);

  const MonotonicityReport rep = annulus ? annulus_ratio_scan(w, exh, chart, cfg.at("R0").get<double>(), lambda, grid, q)
                                         : ratio_scan(w, exh, chart, lambda, grid, q);
  const bool bc_holds = !rep.boundary_condition || rep.boundary_condition->holds;
  if (asserted && bc_holds)
    r.checks.push_back({"nondecreasing", rep.nondecreasing, static_cast<double>(rep.violations.size()), 0.0});
  const json expect = cfg.value("expect", json::object());
  expect_flag(r, expect, "strictly_increasing", rep.strictly_increasing);
  expect_flag(r, expect, "constant_within_error", rep.constant_within_error);
  expect_flag(r, expect, "nondecreasing", rep.nondecreasing);
  if (rep.boundary_condition && expect.contains("boundary_condition")) {
    const bool want = expect["boundary_condition"].get<std::string>() == "holds";
    r.checks.push_back({"expect_boundary_condition", want == rep.boundary_condition->holds,
                        rep.boundary_condition->min_slack, 0.0});
  }
  if (!rep.rows.empty()) {
    expect_close(r, expect, "first_scaled", rep.rows.front().scaled, 1e-3);
    expect_close(r, expect, "last_scaled", rep.rows.back().scaled, 1e-3);
  }
  r.results = monotonicity_json(rep);
  r.results["certified_conserved"] = certified;
  r.diagnostic["asserted_mode"] = asserted;
  if (rep.boundary_condition && !bc_holds) r.diagnostic["verdict_note"] = "boundary condition violated; verdict not asserted";
  monotonicity_csv(r, rep);
  return r;
}

inline KindResult run_volume_scan(const json& cfg, const QuadratureConfig& q) {
  KindResult r;
  const Immersion imm = make_immersion(cfg.at("immersion").get<std::string>());
  const Chart chart = induced_chart(imm);
  const ExhaustionFunction exh = extrinsic_exhaustion(imm);
  const std::vector<double> grid = make_grid(cfg.at("grid"));
  check_grid(grid);
  const bool asserted = cfg.value("assert", true);
  const double lambda = resolve_lambda(cfg, chart, exh, r.diagnostic, static_cast<double>(imm.dim()));

  double hmax = 0.0;
  for (const Vec& x : sample_sublevel(exh, chart, grid.back(), 64, 11))
    hmax = std::max(hmax, induced_geometry_at(imm, x).H.norm());
  const double hthr = imm.jet_mode() == JetMode::analytic ? 1e-8 : 1e-4;
  r.diagnostic["max_mean_curvature"] = number(hmax);
  if (asserted) r.checks.push_back({"minimal_certified", hmax <= hthr, hmax, hthr});

  const MonotonicityReport rep = volume_ratio_scan(imm, lambda, grid, q);
  if (asserted) r.checks.push_back({"nondecreasing", rep.nondecreasing, static_cast<double>(rep.violations.size()), 0.0});
  const json expect = cfg.value("expect", json::object());
  expect_flag(r, expect, "strictly_increasing", rep.strictly_increasing);
  expect_flag(r, expect, "constant_within_error", rep.constant_within_error);
  expect_flag(r, expect, "nondecreasing", rep.nondecreasing);
  if (expect.contains("constant")) {
    const double want = expect["constant"].get<double>();
    const double tol = expect.value("tol", 1e-3);
    double worst = 0.0;
    for (const auto& row : rep.rows) worst = std::max(worst, std::abs(row.scaled - want));
    r.checks.push_back({"expect_constant", worst <= tol, worst, tol});
  }
  if (expect.contains("last_between") && !rep.rows.empty()) {
    const auto b = expect["last_between"].get<std::vector<double>>();
    const double v = rep.rows.back().scaled;
    r.checks.push_back({"expect_last_between", b.size() == 2 && v > b[0] && v < b[1], v, b.size() == 2 ? b[1] : 0.0});
  }
  r.results = monotonicity_json(rep);
  r.results["immersion"] = imm.id();
  monotonicity_csv(r, rep);
  return r;
}

inline KindResult run_bernstein(const json& cfg, const QuadratureConfig& q) {
  KindResult r;
  const Immersion imm = make_immersion(cfg.at("immersion").get<std::string>());
  const json& w = cfg.at("window");
  BernsteinWindow win;
  win.lo = to_vec(w.at("lo"));
  win.hi = to_vec(w.at("hi"));
  require_size(win.lo, imm.dim(), "window lo");
  require_size(win.hi, imm.dim(), "window hi");
  win.samples_per_axis = w.value("samples_per_axis", win.samples_per_axis);
  win.rho_min = w.value("rho_min", win.rho_min);
  win.rho_max = w.value("rho_max", win.rho_max);
  win.rho_points = w.value("rho_points", win.rho_points);
  std::optional<double> R0;
  if (cfg.contains("boundary_R0")) R0 = cfg["boundary_R0"].get<double>();
  const BernsteinReport rep = bernstein_report(imm, win, R0, q);

  // rho^2 Hessian identity on random (point, direction) pairs in the window.
  const int n = cfg.value("rho_hessian_samples", 100);
  UnitStream u(cfg.value("seed", 5u));
  double worst = 0.0;
  int used = 0;
  for (int k = 0; k < n; ++k) {
    Vec x(imm.dim()), X(imm.dim());
    for (int i = 0; i < imm.dim(); ++i) x[i] = win.lo[i] + (win.hi[i] - win.lo[i]) * u.next();
    for (int i = 0; i < imm.dim(); ++i) X[i] = 2.0 * u.next() - 1.0;
    if ((imm.position(x) - imm.base_point()).norm() < 1e-9) continue;
    worst = std::max(worst, extrinsic_rho_hessian_check(imm, x, X).residual);
    ++used;
  }
  const double thr = imm.jet_mode() == JetMode::analytic ? 1e-6 : 1e-4;
  r.checks.push_back({"rho_hessian_identity", worst <= thr, worst, thr});

  const json expect = cfg.value("expect", json::object());
  expect_close(r, expect, "delta", rep.delta, 1e-9);
  expect_close(r, expect, "total_scalar_curvature", rep.total_scalar_curvature.value, 1e-9);
  for (const char* key : {"verdict_i", "verdict_ii"}) {
    if (!expect.contains(key)) continue;
    const Verdict v = std::string(key) == "verdict_i" ? rep.verdict_i : rep.verdict_ii;
    r.checks.push_back({std::string("expect_") + key, expect[key].get<std::string>() == to_string(v), 0.0, 0.0});
  }
  if (expect.contains("mu2_negative"))
    r.checks.push_back({"expect_mu2_negative", (rep.mu2 < 0.0) == expect["mu2_negative"].get<bool>(), rep.mu2, 0.0});
  if (expect.contains("condition_slack_nonnegative") && rep.boundary_slack)
    r.checks.push_back({"expect_condition_slack_nonnegative", *rep.boundary_slack >= -1e-9, *rep.boundary_slack, -1e-9});

  json rows = json::array();
  for (const auto& e : rep.energy_rows) rows.push_back({{"rho", number(e.rho)}, {"energy", number(e.energy)}, {"err", number(e.err)}});
  r.results = {{"immersion", imm.id()},
               {"m", rep.m},
               {"delta", number(rep.delta)},
               {"mu1", number(rep.mu1)},
               {"mu2", number(rep.mu2)},
               {"max_mean_curvature", number(rep.max_mean_curvature)},
               {"minimal", rep.minimal},
               {"parallel_mean_curvature", rep.parallel_mean_curvature},
               {"total_scalar_curvature", number(rep.total_scalar_curvature.value)},
               {"total_scalar_curvature_err", number(rep.total_scalar_curvature.error)},
               {"verdict_i", to_string(rep.verdict_i)},
               {"verdict_ii", to_string(rep.verdict_ii)},
               {"energy_rows", rows},
               {"rho_hessian_max_residual", number(worst)},
               {"rho_hessian_samples", used}};
  if (rep.boundary_slack) {
    r.results["boundary_R0"] = number(*rep.boundary_R0);
    r.results["boundary_condition_slack"] = number(*rep.boundary_slack);
  } else {
    r.results["boundary_R0"] = nullptr;
    r.results["boundary_condition_slack"] = nullptr;
  }
  r.diagnostic = {{"window", rep.window},
                  {"energy_loglog_slope", number(rep.energy_slope)},
                  {"energy_vanishes", rep.energy_vanishes},
                  {"parallel_H_defect", number(rep.parallel_H_defect)},
                  {"growth_heuristic", "slope < mu - 0.1 on the window; not a proof of o(rho^mu)"}};
  r.csv_header = {"rho", "energy", "err"};
  for (const auto& e : rep.energy_rows) r.csv_rows.push_back({e.rho, e.energy, e.err});
  return r;
}

inline KindResult run_gauss_energy(const json& cfg) {
  KindResult r;
  const Immersion imm = make_immersion(cfg.at("immersion").get<std::string>());
  const Chart chart = induced_chart(imm);
  const auto sample = make_sample(cfg.at("sample"), chart);
  const BundleValuedForm Aform = stresslab::make_form("A-form", chart);
  double gap = 0.0, defect = 0.0, jdef = 0.0;
  json rows = json::array();
  r.csv_header = {"index", "dgamma_sq", "A_sq", "gap", "antiholomorphic_defect", "j_invariance_defect"};
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const auto c = complex_gauss_energy_check(imm, sample[i]);
    const double jd = j_invariance_defect(Aform, chart, sample[i]);
    gap = std::max(gap, c.gap);
    defect = std::max(defect, c.antiholomorphic_defect);
    jdef = std::max(jdef, jd);
    rows.push_back({{"x", from_vec(sample[i])},
                    {"dgamma_sq", number(c.dgamma_norm_sq)},
                    {"A_sq", number(c.A_norm_sq)},
                    {"gap", number(c.gap)},
                    {"antiholomorphic_defect", number(c.antiholomorphic_defect)},
                    {"j_invariance_defect", number(jd)}});
    r.csv_rows.push_back({static_cast<double>(i), c.dgamma_norm_sq, c.A_norm_sq, c.gap, c.antiholomorphic_defect, jd});
  }
  r.checks.push_back({"energy_identity", gap <= 1e-6, gap, 1e-6});
  r.checks.push_back({"antiholomorphic", defect <= 1e-6, defect, 1e-6});
  r.checks.push_back({"A_odot_A_j_invariant", jdef <= 1e-9, jdef, 1e-9});
  const json expect = cfg.value("expect", json::object());
  if (!rows.empty()) expect_close(r, expect, "first_A_sq", rows[0]["A_sq"].get<double>(), 1e-9);
  r.results = {{"immersion", imm.id()}, {"rows", rows}, {"max_gap", number(gap)}, {"max_antiholomorphic_defect", number(defect)},
               {"max_j_invariance_defect", number(jdef)}};
  r.diagnostic = {{"normalization", "|dgamma|^2 is twice the sum over a real orthonormal frame"}};
  return r;
}

inline bool is_config_error(ErrorCode c) {
  switch (c) {
    case ErrorCode::ConfigParse:
    case ErrorCode::UnknownCatalogId:
    case ErrorCode::InvalidArgument:
    case ErrorCode::BadRegimeParams:
    case ErrorCode::DegreeExceedsDimension:
    case ErrorCode::NoComplexStructure:
    case ErrorCode::HypothesisViolated:
    case ErrorCode::BadBounds:
      return true;
    default:
      return false;
  }
}

}  // namespace detail

/// Validates `cfg` against the schema of its kind; throws ConfigParse.
inline void validate_config(const json& cfg) {
  if (!cfg.is_object()) fail(ErrorCode::ConfigParse, "scenario must be a JSON object");
  if (!cfg.contains("kind") || !cfg["kind"].is_string()) fail(ErrorCode::ConfigParse, "scenario needs a string 'kind'");
  const std::string kind = cfg["kind"].get<std::string>();
  if (std::find(scenario_kinds().begin(), scenario_kinds().end(), kind) == scenario_kinds().end())
    fail(ErrorCode::ConfigParse, "unknown scenario kind '" + kind + "'");
  const auto errs = validate_json(cfg, schema::config(kind));
  if (!errs.empty()) {
    std::string msg = "invalid scenario:";
    for (const auto& e : errs) msg += "\n  " + e;
    fail(ErrorCode::ConfigParse, msg);
  }
}

inline std::string csv_text(const KindResult& r) {
  CsvTable t(r.csv_header);
  for (const auto& row : r.csv_rows) {
    std::vector<std::string> cells;
    for (double v : row) cells.push_back(format_number(v));
    t.add(cells);
  }
  return t.str();
}

/// Runs one parsed scenario. Exit code 0 = all asserted checks pass,
/// 1 = a check failed or the computation raised, 2 = configuration error.
inline ScenarioOutcome run_scenario(const json& cfg, const RunOptions& opt = {}) {
  ScenarioOutcome out;
  std::optional<QuadratureConfig> q;
  try {
    validate_config(cfg);
    out.id = cfg["id"].get<std::string>();
    out.kind = cfg["kind"].get<std::string>();
    q = detail::make_quadrature(cfg, opt.resolution, opt.threads);
  } catch (const Error& e) {
    out.exit_code = 2;
    out.message = e.what();
    return out;
  } catch (const json::exception& e) {
    out.exit_code = 2;
    out.message = std::string("configuration error: ") + e.what();
    return out;
  }

  KindResult r;
  json error = nullptr;
  try {
    if (out.kind == "growth-order") r = detail::run_growth_order(cfg);
    else if (out.kind == "integral-formula") r = detail::run_integral_formula(cfg, *q);
    else if (out.kind == "ratio-scan") r = detail::run_scan(cfg, *q, false);
    else if (out.kind == "annulus-scan") r = detail::run_scan(cfg, *q, true);
    else if (out.kind == "volume-scan") r = detail::run_volume_scan(cfg, *q);
    else if (out.kind == "bernstein") r = detail::run_bernstein(cfg, *q);
    else r = detail::run_gauss_energy(cfg);
  } catch (const Error& e) {
    if (detail::is_config_error(e.code())) {
      out.exit_code = 2;
      out.message = e.what();
      return out;
    }
    error = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
  } catch (const json::exception& e) {
    out.exit_code = 2;
    out.message = std::string("configuration error: ") + e.what();
    return out;
  }

  json asserted = json::array();
  json first_failure = nullptr;
  for (const auto& c : r.checks) {
    asserted.push_back({{"name", c.name}, {"pass", c.pass}, {"value", number(c.value)}, {"limit", number(c.limit)}});
    if (!c.pass && first_failure.is_null()) first_failure = c.name;
  }
  if (!error.is_null()) first_failure = "computation";
  out.exit_code = first_failure.is_null() ? 0 : 1;
  if (r.csv_header.empty()) r.csv_header = {"none"};
  out.report = {{"schema", kReportSchemaId},
                {"id", out.id},
                {"kind", out.kind},
                {"status", !error.is_null() ? "error" : (out.exit_code == 0 ? "pass" : "fail")},
                {"exit_code", out.exit_code},
                {"first_failure", first_failure},
                {"error", error},
                {"asserted", asserted},
                {"diagnostic", r.diagnostic},
                {"results", r.results},
                {"csv_columns", r.csv_header}};
  out.report_text = out.report.dump(2) + "\n";
  out.csv_text = csv_text(r);
  out.message = first_failure.is_null() ? "pass" : "failed: " + first_failure.get<std::string>();

  if (opt.write_files) {
    std::filesystem::path dir = opt.out_dir;
    if (cfg.contains("output") && cfg["output"].contains("dir")) dir = dir / cfg["output"]["dir"].get<std::string>();
    out.json_path = dir / (out.id + ".json");
    out.csv_path = dir / (out.id + ".csv");
    write_atomic(out.json_path, out.report_text);
    write_atomic(out.csv_path, out.csv_text);
  }
  return out;
}

inline ScenarioOutcome run_scenario_file(const std::filesystem::path& path, const RunOptions& opt = {}) {
  json cfg;
  try {
    cfg = json::parse(read_file(path));
  } catch (const Error& e) {
    ScenarioOutcome out;
    out.message = e.what();
    return out;
  } catch (const json::exception& e) {
    ScenarioOutcome out;
    out.message = "cannot parse '" + path.string() + "': " + e.what();
    return out;
  }
  return run_scenario(cfg, opt);
}

}  // namespace stresslab

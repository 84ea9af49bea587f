#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "stresslab/errors.hpp"

namespace stresslab {

using json = nlohmann::json;

/// Shortest round-trip decimal, independent of the C locale. Non-finite
/// values become "nan", "inf", "-inf".
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// JSON number, or null when not finite.
inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  std::size_t columns() const { return header_.size(); }
  std::size_t rows() const { return rows_.size(); }

  CsvTable& add(std::vector<std::string> row) {
    if (row.size() != header_.size()) fail(ErrorCode::InvalidArgument, "CSV row width differs from the header");
    rows_.push_back(std::move(row));
    return *this;
  }

  std::string str() const {
    std::string out;
    write_row(out, header_);
    for (const auto& r : rows_) write_row(out, r);
    return out;
  }

 private:
  static void write_row(std::string& out, const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      const std::string& f = row[i];
      if (f.find_first_of(",\"\r\n") == std::string::npos) {
        out += f;
        continue;
      }
      out += '"';
      for (char c : f) {
        if (c == '"') out += '"';
        out += c;
      }
      out += '"';
    }
    out += "\r\n";
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Writes via a sibling temporary file and a rename.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) fail(ErrorCode::InvalidArgument, "cannot open '" + tmp.string() + "' for writing");
    os << content;
    os.flush();
    if (!os) fail(ErrorCode::InvalidArgument, "failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    fail(ErrorCode::InvalidArgument, "cannot rename onto '" + path.string() + "': " + ec.message());
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::ConfigParse, "cannot read '" + path.string() + "'");
  return std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

// ---------------------------------------------------------------------------
// A small JSON Schema subset: type, enum, required, properties,
// additionalProperties (bool), items, minItems, maxItems, minimum, oneOf.

namespace detail {

inline bool type_matches(const json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "boolean") return v.is_boolean();
  if (t == "null") return v.is_null();
  if (t == "integer") return v.is_number_integer() || (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>());
  if (t == "number") return v.is_number();
  return false;
}

inline void validate(const json& v, const json& schema, const std::string& where, std::vector<std::string>& errs) {
  if (schema.contains("oneOf")) {
    int matches = 0;
    for (const auto& s : schema["oneOf"]) {
      std::vector<std::string> sub;
      validate(v, s, where, sub);
      if (sub.empty()) ++matches;
    }
    if (matches != 1) errs.push_back(where + ": matches " + std::to_string(matches) + " alternatives, expected 1");
    return;
  }
  if (schema.contains("type")) {
    bool ok = false;
    if (schema["type"].is_array()) {
      for (const auto& t : schema["type"]) ok = ok || type_matches(v, t.get<std::string>());
    } else {
      ok = type_matches(v, schema["type"].get<std::string>());
    }
    if (!ok) {
      errs.push_back(where + ": expected type " + schema["type"].dump());
      return;
    }
  }
  if (schema.contains("enum")) {
    bool ok = false;
    for (const auto& e : schema["enum"]) ok = ok || e == v;
    if (!ok) errs.push_back(where + ": value " + v.dump() + " not in " + schema["enum"].dump());
  }
  if (schema.contains("minimum") && v.is_number() && v.get<double>() < schema["minimum"].get<double>())
    errs.push_back(where + ": below minimum " + schema["minimum"].dump());
  if (v.is_object()) {
    if (schema.contains("required"))
      for (const auto& r : schema["required"])
        if (!v.contains(r.get<std::string>())) errs.push_back(where + ": missing required field '" + r.get<std::string>() + "'");
    const bool closed = schema.contains("additionalProperties") && schema["additionalProperties"] == false;
    const json props = schema.value("properties", json::object());
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (props.contains(it.key()))
        validate(it.value(), props[it.key()], where + "." + it.key(), errs);
      else if (closed)
        errs.push_back(where + ": unexpected field '" + it.key() + "'");
    }
  }
  if (v.is_array()) {
    if (schema.contains("minItems") && v.size() < schema["minItems"].get<std::size_t>())
      errs.push_back(where + ": fewer than " + schema["minItems"].dump() + " items");
    if (schema.contains("maxItems") && v.size() > schema["maxItems"].get<std::size_t>())
      errs.push_back(where + ": more than " + schema["maxItems"].dump() + " items");
    if (schema.contains("items"))
      for (std::size_t i = 0; i < v.size(); ++i) validate(v[i], schema["items"], where + "[" + std::to_string(i) + "]", errs);
  }
}

}  // namespace detail

/// Human-readable violations of `schema` by `doc`; empty when valid.
inline std::vector<std::string> validate_json(const json& doc, const json& schema) {
  std::vector<std::string> errs;
  detail::validate(doc, schema, "$", errs);
  return errs;
}

}  // namespace stresslab

#pragma once

// Spec JSON loading and deterministic report serialization.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"

#include "hspace/catalog.hpp"
#include "hspace/error.hpp"
#include "hspace/expr.hpp"

namespace hspace {

using Json = nlohmann::json;  // std::map-backed objects, so keys serialize sorted

namespace detail {

inline void reject_unknown(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) throw SpecError("unknown key '" + key + "' in " + where);
}

inline const Json& require(const Json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SpecError("missing key '" + std::string(key) + "' in " + where);
  return *it;
}

inline Point read_point(const Json& arr, const std::string& where) {
  if (!arr.is_array() || arr.size() != kDim) throw SpecError(where + " must be an array of 6 numbers");
  Point p;
  for (int i = 0; i < kDim; ++i) {
    if (!arr[i].is_number()) throw SpecError(where + " must be an array of 6 numbers");
    p[i] = arr[i].get<double>();
  }
  return p;
}

}  // namespace detail

/// Builds a spec from parsed JSON. Schema violations raise SpecError, bad expressions ParseError.
inline HSpaceSpec spec_from_json(const Json& j) {
  if (!j.is_object()) throw SpecError("spec must be a JSON object");
  detail::reject_unknown(j, {"name", "type", "signs", "constants", "functions", "chart", "variant", "perturb"}, "spec");
  HSpaceSpec s;
  const Json& type = detail::require(j, "type", "spec");
  if (!type.is_string()) throw SpecError("type must be a string");
  const auto t = type_from_tag(type.get<std::string>());
  if (!t) throw SpecError("unknown type '" + type.get<std::string>() + "'");
  s.type = *t;
  if (auto it = j.find("name"); it != j.end()) {
    if (!it->is_string()) throw SpecError("name must be a string");
    s.name = it->get<std::string>();
  }
  for (const auto& [k, v] : detail::require(j, "signs", "spec").items()) {
    if (!v.is_number_integer()) throw SpecError("sign " + k + " must be +1 or -1");
    s.signs[k] = v.get<int>();
  }
  for (const auto& [k, v] : detail::require(j, "constants", "spec").items()) {
    if (!v.is_number()) throw SpecError("constant " + k + " must be a number");
    s.constants[k] = v.get<double>();
  }
  for (const auto& [k, v] : detail::require(j, "functions", "spec").items()) {
    if (!v.is_string()) throw SpecError("function " + k + " must be an expression string");
    try {
      s.functions[k] = ExprAst::parse(v.get<std::string>());
    } catch (const ParseError& ex) {
      throw ParseError("functions." + k + ": " + ex.message(), ex.offset());
    }
  }
  const Json& chart = detail::require(j, "chart", "spec");
  if (!chart.is_object()) throw SpecError("chart must be an object");
  detail::reject_unknown(chart, {"lo", "hi", "margin"}, "chart");
  s.chart.lo = detail::read_point(detail::require(chart, "lo", "chart"), "chart.lo");
  s.chart.hi = detail::read_point(detail::require(chart, "hi", "chart"), "chart.hi");
  if (auto it = chart.find("margin"); it != chart.end()) {
    if (!it->is_number()) throw SpecError("chart.margin must be a number");
    s.chart.margin = it->get<double>();
  }
  if (auto it = j.find("variant"); it != j.end()) {
    if (!it->is_string()) throw SpecError("variant must be a string");
    s.variant = it->get<std::string>();
  }
  if (auto it = j.find("perturb"); it != j.end()) {
    if (!it->is_object()) throw SpecError("perturb must be an object");
    detail::reject_unknown(*it, {"component", "expr"}, "perturb");
    const Json& comp = detail::require(*it, "component", "perturb");
    if (!comp.is_array() || comp.size() != 2 || !comp[0].is_number_integer() || !comp[1].is_number_integer())
      throw SpecError("perturb.component must be [i, j] with 1-based indices");
    Perturbation pt;
    pt.i = comp[0].get<int>() - 1;
    pt.j = comp[1].get<int>() - 1;
    if (pt.i < 0 || pt.i >= kDim || pt.j < 0 || pt.j >= kDim) throw SpecError("perturb.component out of range 1..6");
    const Json& e = detail::require(*it, "expr", "perturb");
    if (!e.is_string()) throw SpecError("perturb.expr must be an expression string");
    try {
      pt.expr = ExprAst::parse(e.get<std::string>());
    } catch (const ParseError& ex) {
      throw ParseError("perturb.expr: " + ex.message(), ex.offset());
    }
    s.perturb = pt;
  }
  return s;
}

inline HSpaceSpec parse_spec(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& ex) {
    throw ParseError(std::string("malformed JSON: ") + ex.what(), ex.byte);
  }
  return spec_from_json(j);
}

inline HSpaceSpec load_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SpecError("cannot open spec file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  HSpaceSpec s = parse_spec(buf.str());
  if (s.name.empty()) {
    const auto slash = path.find_last_of('/');
    s.name = slash == std::string::npos ? path : path.substr(slash + 1);
  }
  return s;
}

inline Json spec_to_json(const HSpaceSpec& s) {
  Json j;
  j["type"] = std::string(type_tag(s.type));
  if (!s.name.empty()) j["name"] = s.name;
  j["signs"] = Json::object();
  for (const auto& [k, v] : s.signs) j["signs"][k] = v;
  j["constants"] = Json::object();
  for (const auto& [k, v] : s.constants) j["constants"][k] = v;
  j["functions"] = Json::object();
  for (const auto& [k, v] : s.functions) j["functions"][k] = v.to_string();
  j["chart"] = {{"lo", s.chart.lo.c}, {"hi", s.chart.hi.c}, {"margin", s.chart.margin}};
  if (!s.variant.empty()) j["variant"] = s.variant;
  if (s.perturb) j["perturb"] = {{"component", {s.perturb->i + 1, s.perturb->j + 1}}, {"expr", s.perturb->expr.to_string()}};
  return j;
}

namespace detail {

inline void write_json(std::string& out, const Json& j, int indent) {
  const std::string pad(2 * indent, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + "  " + Json(k).dump() + ": ";
        write_json(out, v, indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k) out += ",\n";
        out += pad + "  ";
        write_json(out, j[k], indent + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += v != v ? "\"nan\"" : (v > 0 ? "\"inf\"" : "\"-inf\"");
        return;
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace detail

/// Report text: keys sorted, two-space indent, doubles with 17 significant digits.
inline std::string format_report(const Json& j) {
  std::string out;
  detail::write_json(out, j, 0);
  out += "\n";
  return out;
}

}  // namespace hspace

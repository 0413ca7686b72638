#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "supergeom/chart.hpp"
#include "supergeom/superconnection.hpp"

namespace supergeom::io {

using json = nlohmann::ordered_json;

inline constexpr const char* kScenarioVersion = "supergeom-scenario/1";
inline constexpr const char* kReportVersion = "supergeom-report/1";
inline constexpr int kMaxScenarioDim = 6;

/// Malformed JSON. Carries the byte offset and line/column of the failure.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t byte, int line, int column)
      : Error(what), byte(byte), line(line), column(column) {}
  std::size_t byte;
  int line, column;
};

struct SamplerConfig {
  std::uint64_t seed = 1;
  int count = 5;
};

/// A scenario as read from disk: one geometry, several evaluation points.
struct ScenarioFile {
  std::string version = kScenarioVersion;
  GeometryScenario geometry;  // geometry.point is unused; see points
  std::vector<std::vector<double>> points;
  SamplerConfig sampler;
  std::map<std::string, double> tolerances;  // "default" and per-invariant overrides

  GeometryScenario at(std::size_t i) const {
    GeometryScenario s = geometry;
    s.point = points.at(i);
    return s;
  }

  double tolerance(const std::string& name, double fallback = 1e-9) const {
    if (auto it = tolerances.find(name); it != tolerances.end()) return it->second;
    if (auto it = tolerances.find("default"); it != tolerances.end()) return it->second;
    return fallback;
  }
};

// ---------------------------------------------------------------------------
// Enum names
// ---------------------------------------------------------------------------

inline std::string connection_name(ConnectionKind k) {
  switch (k) {
    case ConnectionKind::levi_civita: return "levi_civita";
    case ConnectionKind::symplectic_cubic: return "symplectic_cubic";
    default: return "christoffel";
  }
}

inline ConnectionKind parse_connection(const std::string& s) {
  if (s == "christoffel") return ConnectionKind::christoffel;
  if (s == "levi_civita") return ConnectionKind::levi_civita;
  if (s == "symplectic_cubic") return ConnectionKind::symplectic_cubic;
  throw ScenarioError("unknown connection kind '" + s + "'");
}

inline SymmetryClass parse_symmetry(const std::string& s) {
  if (s == "symmetric") return SymmetryClass::symmetric;
  if (s == "skew") return SymmetryClass::skew;
  if (s == "generic") return SymmetryClass::generic;
  throw ScenarioError("unknown h_class '" + s + "'");
}

// ---------------------------------------------------------------------------
// Chart functions
// ---------------------------------------------------------------------------

inline json to_json(const ChartFunction& f) {
  json terms = json::array();
  for (const auto& t : f.terms) {
    json j = {{"c", t.coef}};
    auto put = [&](const char* key, const std::vector<int>& v) {
      for (int e : v)
        if (e != 0) {
          j[key] = v;
          return;
        }
    };
    put("pow", t.pow);
    put("sin", t.sin);
    put("cos", t.cos);
    terms.push_back(std::move(j));
  }
  return terms;
}

namespace detail {

inline std::vector<int> exponents(const json& j, const char* key, int n, const std::string& where) {
  if (!j.contains(key)) return {};
  const auto& a = j.at(key);
  if (!a.is_array() || static_cast<int>(a.size()) != n)
    throw ScenarioError(where + "." + key + " must be an array of " + std::to_string(n) + " integers");
  std::vector<int> out;
  for (const auto& e : a) {
    if (!e.is_number_integer() || e.get<int>() < 0)
      throw ScenarioError(where + "." + key + " entries must be non-negative integers");
    out.push_back(e.get<int>());
  }
  return out;
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ScenarioError(where + " must be a number");
  return j.get<double>();
}

}  // namespace detail

inline ChartFunction chart_function_from_json(const json& j, int n, const std::string& where) {
  ChartFunction f;
  if (j.is_number()) return ChartFunction::constant(j.get<double>());
  if (!j.is_array()) throw ScenarioError(where + " must be a number or a list of terms");
  for (std::size_t k = 0; k < j.size(); ++k) {
    const auto& t = j[k];
    const std::string w = where + "[" + std::to_string(k) + "]";
    if (!t.is_object() || !t.contains("c")) throw ScenarioError(w + " must be an object with a coefficient \"c\"");
    for (const auto& [key, _] : t.items())
      if (key != "c" && key != "pow" && key != "sin" && key != "cos") throw ScenarioError(w + ": unknown key '" + key + "'");
    f.terms.push_back(ChartTerm{detail::number(t.at("c"), w + ".c"), detail::exponents(t, "pow", n, w),
                                detail::exponents(t, "sin", n, w), detail::exponents(t, "cos", n, w)});
  }
  return f;
}

inline json to_json(const std::vector<ChartFunction>& table) {
  json a = json::array();
  for (const auto& f : table) a.push_back(to_json(f));
  return a;
}

inline std::vector<ChartFunction> table_from_json(const json& j, int n, std::size_t size, const std::string& where) {
  if (!j.is_array() || j.size() != size)
    throw ScenarioError(where + " must be an array of " + std::to_string(size) + " entries (row-major)");
  std::vector<ChartFunction> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(chart_function_from_json(j[i], n, where + "[" + std::to_string(i) + "]"));
  return out;
}

// ---------------------------------------------------------------------------
// Scenario files
// ---------------------------------------------------------------------------

inline json to_json(const ScenarioFile& s) {
  const auto& g = s.geometry;
  json j;
  j["version"] = s.version;
  j["name"] = g.name;
  j["dim"] = g.dim;
  j["jet_order"] = g.jet_order;
  j["points"] = s.points;
  if (!g.domain_lower.empty()) j["domain"] = {{"lower", g.domain_lower}, {"upper", g.domain_upper}};
  j["h_class"] = to_string(g.h_class);
  j["connection"] = connection_name(g.connection);
  if (!g.metric.empty()) j["metric"] = to_json(g.metric);
  if (!g.h.empty()) j["h"] = to_json(g.h);
  if (!g.gamma.empty()) j["gamma"] = to_json(g.gamma);
  if (!g.cubic.empty()) j["cubic"] = to_json(g.cubic);
  j["sampler"] = {{"seed", s.sampler.seed}, {"count", s.sampler.count}};
  if (!s.tolerances.empty()) j["tolerances"] = s.tolerances;
  return j;
}

inline ScenarioFile scenario_from_json(const json& j) {
  if (!j.is_object()) throw ScenarioError("scenario must be a JSON object");
  static const std::vector<std::string> known = {"version", "name",  "dim",   "jet_order", "points",
                                                 "domain",  "h_class", "connection", "metric", "h",
                                                 "gamma",   "cubic", "sampler", "tolerances"};
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ScenarioError("unknown key '" + key + "'");
  auto need = [&](const char* key) -> const json& {
    if (!j.contains(key)) throw ScenarioError(std::string("missing key '") + key + "'");
    return j.at(key);
  };

  ScenarioFile s;
  const auto& version = need("version");
  if (!version.is_string() || version.get<std::string>() != kScenarioVersion)
    throw ScenarioError(std::string("unrecognized version tag; expected \"") + kScenarioVersion + "\"");
  s.version = version.get<std::string>();

  auto& g = s.geometry;
  g.name = j.value("name", std::string("unnamed"));
  const auto& dim = need("dim");
  if (!dim.is_number_integer()) throw ScenarioError("dim must be an integer");
  g.dim = dim.get<int>();
  if (g.dim < 1 || g.dim > kMaxScenarioDim) throw ScenarioError("dim must lie in 1..6");
  const int n = g.dim;
  if (j.contains("jet_order")) {
    if (!j["jet_order"].is_number_integer() || j["jet_order"].get<int>() < 2)
      throw ScenarioError("jet_order must be an integer >= 2");
    g.jet_order = j["jet_order"].get<int>();
  }

  const auto& pts = need("points");
  if (!pts.is_array() || pts.empty()) throw ScenarioError("points must be a non-empty array");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const std::string w = "points[" + std::to_string(i) + "]";
    if (!pts[i].is_array() || static_cast<int>(pts[i].size()) != n)
      throw ScenarioError(w + " must have " + std::to_string(n) + " coordinates");
    std::vector<double> p;
    for (std::size_t k = 0; k < pts[i].size(); ++k) p.push_back(detail::number(pts[i][k], w));
    s.points.push_back(std::move(p));
  }
  if (j.contains("domain")) {
    const auto& d = j["domain"];
    for (const char* key : {"lower", "upper"}) {
      if (!d.contains(key) || !d[key].is_array() || static_cast<int>(d[key].size()) != n)
        throw ScenarioError(std::string("domain.") + key + " must have " + std::to_string(n) + " entries");
    }
    for (int k = 0; k < n; ++k) {
      g.domain_lower.push_back(detail::number(d["lower"][k], "domain.lower"));
      g.domain_upper.push_back(detail::number(d["upper"][k], "domain.upper"));
    }
  }

  const auto& cls = need("h_class");
  if (!cls.is_string()) throw ScenarioError("h_class must be a string");
  g.h_class = parse_symmetry(cls.get<std::string>());
  const auto& conn = need("connection");
  if (!conn.is_string()) throw ScenarioError("connection must be a string");
  g.connection = parse_connection(conn.get<std::string>());

  const std::size_t n2 = static_cast<std::size_t>(n * n), n3 = n2 * n;
  if (j.contains("metric")) g.metric = table_from_json(j["metric"], n, n2, "metric");
  if (j.contains("h")) g.h = table_from_json(j["h"], n, n2, "h");
  if (j.contains("gamma")) g.gamma = table_from_json(j["gamma"], n, n3, "gamma");
  if (j.contains("cubic")) g.cubic = table_from_json(j["cubic"], n, n3, "cubic");
  if (g.metric.empty() && g.h.empty()) throw ScenarioError("scenario needs a metric or an h table");
  if (g.connection == ConnectionKind::levi_civita && g.metric.empty())
    throw ScenarioError("connection levi_civita needs a metric table");
  if (g.connection == ConnectionKind::symplectic_cubic && g.cubic.empty())
    throw ScenarioError("connection symplectic_cubic needs a cubic table");

  if (j.contains("sampler")) {
    const auto& sm = j["sampler"];
    if (!sm.is_object()) throw ScenarioError("sampler must be an object");
    if (sm.contains("seed")) {
      if (!sm["seed"].is_number_unsigned()) throw ScenarioError("sampler.seed must be a non-negative integer");
      s.sampler.seed = sm["seed"].get<std::uint64_t>();
    }
    if (sm.contains("count")) {
      if (!sm["count"].is_number_integer() || sm["count"].get<int>() < 0)
        throw ScenarioError("sampler.count must be a non-negative integer");
      s.sampler.count = sm["count"].get<int>();
    }
  }
  if (j.contains("tolerances")) {
    const auto& t = j["tolerances"];
    if (!t.is_object()) throw ScenarioError("tolerances must be an object");
    for (const auto& [key, v] : t.items()) {
      const double x = detail::number(v, "tolerances." + key);
      if (!(x > 0.0)) throw ScenarioError("tolerances." + key + " must be positive");
      s.tolerances[key] = x;
    }
  }
  return s;
}

inline json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t byte = e.byte;
    int line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string msg = e.what();
    if (const auto k = msg.find(": ", msg.find("parse error")); k != std::string::npos) msg = msg.substr(k + 2);
    throw ParseError("parse error at line " + std::to_string(line) + ", column " + std::to_string(column) +
                         " (byte " + std::to_string(byte) + "): " + msg,
                     byte, line, column);
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ScenarioFile load_scenario(const std::string& path) { return scenario_from_json(parse_json(read_file(path))); }

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ScenarioError("cannot write '" + path + "'");
  out << text;
}

// ---------------------------------------------------------------------------
// Numeric payloads
// ---------------------------------------------------------------------------

inline json to_json(const Matrix& m) {
  json a = json::array();
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) a.push_back(m(i, j));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(a)}};
}

inline json to_json(const ExteriorElement& e) {
  json out = json::object();
  for (Mask m = 0; m < e.size(); ++m)
    if (e.at(m) != 0.0) out[std::to_string(m)] = e.at(m);
  return out;
}

/// Values and first derivatives, row-major over the tensor indices; the
/// gradient array appends the derivative index last.
inline json to_json(const JetTensor& t) {
  json value = json::array(), gradient = json::array();
  for (const auto& j : t) {
    value.push_back(j.value());
    const int n = j.space()->dim();
    for (int k = 0; k < n; ++k) gradient.push_back(j.linear(k));
  }
  return {{"value", std::move(value)}, {"gradient", std::move(gradient)}};
}

inline json to_json(const ConnectionTensors& t) {
  json j;
  j["n"] = t.n;
  const auto names = ConnectionTensors::names();
  const auto all = t.all();
  for (std::size_t i = 0; i < all.size(); ++i) j[names[i]] = to_json(*all[i]);
  return j;
}

inline json to_json(const FedosovInfo& i) {
  return {{"k3_free_dim", i.k3_free_dim},
          {"l0_free_dim", i.l0_free_dim},
          {"k3_empty_family", i.k3_empty_family},
          {"l0_empty_family", i.l0_empty_family},
          {"consistency", i.consistency}};
}

}  // namespace supergeom::io

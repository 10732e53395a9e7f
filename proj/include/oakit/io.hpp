#pragma once

// JSON model documents and iteration traces (CSV / JSON).
//
// Expression nodes:
//   {"op": "const", "value": c}           {"var": "x", "index": i}
//   {"op": "sum",   "args": [...]}        {"op": "scale", "coef": c, "args": [e]}
//   {"op": "pow", "exponent": p, "args": [e]}
//   {"op": "sqrt" | "exp" | "log" | "abs", "args": [e]}
//   {"op": "max", "args": [...]}

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "oakit/errors.hpp"
#include "oakit/expr.hpp"
#include "oakit/model.hpp"
#include "oakit/oa.hpp"

namespace oakit::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

namespace detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw ParseError((path.empty() ? std::string("document") : path) + ": " + what);
}

inline const json& field(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path, std::string("missing field \"") + key + "\"");
  return *it;
}

inline double number(const json& j, const std::string& path) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

// Bounds use null for an infinite value.
inline double bound(const json& j, const std::string& path, double inf) {
  if (j.is_null()) return inf;
  return number(j, path);
}

inline json bound_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline std::size_t count(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) fail(path, "expected a nonnegative integer");
  return j.get<std::size_t>();
}

inline std::vector<double> vector_of(const json& j, std::size_t len, const std::string& path, double inf = 0.0) {
  if (!j.is_array()) fail(path, "expected an array");
  if (j.size() != len) fail(path, "expected " + std::to_string(len) + " entries, got " + std::to_string(j.size()));
  std::vector<double> v;
  for (std::size_t i = 0; i < len; ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    v.push_back(inf != 0.0 ? bound(j[i], p, inf) : number(j[i], p));
  }
  return v;
}

inline Expr parse_expr(const json& j, const std::string& path, std::size_t n, std::size_t p) {
  if (!j.is_object()) fail(path, "expected an expression object");
  if (j.contains("var")) {
    const json& v = j.at("var");
    const std::size_t idx = count(field(j, "index", path), path + ".index");
    if (v == "x") {
      if (idx >= n) fail(path + ".index", "x index " + std::to_string(idx) + " out of range");
      return var_x(idx);
    }
    if (v == "y") {
      if (idx >= p) fail(path + ".index", "y index " + std::to_string(idx) + " out of range");
      return var_y(idx);
    }
    fail(path + ".var", "expected \"x\" or \"y\"");
  }
  const json& opj = field(j, "op", path);
  if (!opj.is_string()) fail(path + ".op", "expected a string");
  const std::string op = opj.get<std::string>();
  if (op == "const") return constant(number(field(j, "value", path), path + ".value"));

  const json& argsj = field(j, "args", path);
  if (!argsj.is_array()) fail(path + ".args", "expected an array");
  std::vector<Expr> args;
  for (std::size_t i = 0; i < argsj.size(); ++i)
    args.push_back(parse_expr(argsj[i], path + ".args[" + std::to_string(i) + "]", n, p));
  auto unary = [&]() -> const Expr& {
    if (args.size() != 1) fail(path + ".args", "\"" + op + "\" takes exactly one argument");
    return args[0];
  };
  if (op == "sum") return sum(std::move(args));
  if (op == "max") {
    if (args.empty()) fail(path + ".args", "\"max\" needs at least one argument");
    return max(std::move(args));
  }
  if (op == "scale") return scale(number(field(j, "coef", path), path + ".coef"), unary());
  if (op == "pow") return pow(unary(), number(field(j, "exponent", path), path + ".exponent"));
  if (op == "sqrt") return sqrt(unary());
  if (op == "exp") return exp(unary());
  if (op == "log") return log(unary());
  if (op == "abs") return abs(unary());
  fail(path + ".op", "unknown operator \"" + op + "\"");
}

inline Polyhedron parse_polyhedron(const json& doc, const char* bounds_key, const char* rows_key, std::size_t d) {
  const json& bj = field(doc, bounds_key, "");
  Polyhedron P(vector_of(field(bj, "lower", bounds_key), d, std::string(bounds_key) + ".lower", -kInf),
               vector_of(field(bj, "upper", bounds_key), d, std::string(bounds_key) + ".upper", kInf));
  if (doc.contains(rows_key)) {
    const json& rows = doc.at(rows_key);
    if (!rows.is_array()) fail(rows_key, "expected an array");
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const std::string path = std::string(rows_key) + "[" + std::to_string(r) + "]";
      P.add_row(vector_of(field(rows[r], "a", path), d, path + ".a"), number(field(rows[r], "b", path), path + ".b"));
    }
  }
  return P;
}

inline json polyhedron_rows(const Polyhedron& P) {
  json rows = json::array();
  for (std::size_t r = 0; r < P.A.size(); ++r) rows.push_back({{"a", P.A[r]}, {"b", P.b[r]}});
  return rows;
}

inline json polyhedron_bounds(const Polyhedron& P) {
  json lo = json::array(), hi = json::array();
  for (std::size_t j = 0; j < P.dim(); ++j) {
    lo.push_back(bound_json(P.lower[j]));
    hi.push_back(bound_json(P.upper[j]));
  }
  return {{"lower", lo}, {"upper", hi}};
}

}  // namespace detail

inline json expr_to_json(const Expr& e) {
  switch (e.op()) {
    case Op::constant: return {{"op", "const"}, {"value", e.param()}};
    case Op::var_x: return {{"var", "x"}, {"index", e.index()}};
    case Op::var_y: return {{"var", "y"}, {"index", e.index()}};
    default: break;
  }
  json j;
  j["op"] = op_name(e.op());
  if (e.op() == Op::scale) j["coef"] = e.param();
  if (e.op() == Op::pow) j["exponent"] = e.param();
  json args = json::array();
  for (const auto& a : e.args()) args.push_back(expr_to_json(a));
  j["args"] = std::move(args);
  return j;
}

inline Expr expr_from_json(const json& j, std::size_t n, std::size_t p) { return detail::parse_expr(j, "", n, p); }

/// Parses and validates a model document. Errors name the offending field or byte offset.
inline MinlpProblem parse_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  using detail::field;
  const json& ver = field(doc, "schema_version", "");
  if (!ver.is_number_integer() || ver.get<int>() != kSchemaVersion)
    detail::fail("schema_version", "unsupported version (expected " + std::to_string(kSchemaVersion) + ")");

  MinlpProblem P;
  P.n = detail::count(field(doc, "n", ""), "n");
  P.p = detail::count(field(doc, "p", ""), "p");
  P.X = detail::parse_polyhedron(doc, "x_bounds", "x_rows", P.n);
  P.Y = detail::parse_polyhedron(doc, "y_bounds", "y_rows", P.p);
  P.objective = detail::parse_expr(field(doc, "objective", ""), "objective", P.n, P.p);
  const json& cons = field(doc, "constraints", "");
  if (!cons.is_array()) detail::fail("constraints", "expected an array");
  for (std::size_t i = 0; i < cons.size(); ++i)
    P.constraints.push_back(detail::parse_expr(cons[i], "constraints[" + std::to_string(i) + "]", P.n, P.p));
  if (doc.contains("metadata")) {
    const json& md = doc.at("metadata");
    if (!md.is_object()) detail::fail("metadata", "expected an object");
    if (md.contains("name")) {
      if (!md.at("name").is_string()) detail::fail("metadata.name", "expected a string");
      P.name = md.at("name").get<std::string>();
    }
    if (md.contains("known_optimum") && !md.at("known_optimum").is_null())
      P.known_optimum = detail::number(md.at("known_optimum"), "metadata.known_optimum");
  }
  require_valid(P);
  return P;
}

inline json model_to_json(const MinlpProblem& P) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["n"] = P.n;
  doc["p"] = P.p;
  doc["x_bounds"] = detail::polyhedron_bounds(P.X);
  doc["x_rows"] = detail::polyhedron_rows(P.X);
  doc["y_bounds"] = detail::polyhedron_bounds(P.Y);
  doc["y_rows"] = detail::polyhedron_rows(P.Y);
  doc["objective"] = expr_to_json(P.objective);
  json cons = json::array();
  for (const auto& g : P.constraints) cons.push_back(expr_to_json(g));
  doc["constraints"] = std::move(cons);
  json md = json::object();
  if (!P.name.empty()) md["name"] = P.name;
  if (P.known_optimum) md["known_optimum"] = *P.known_optimum;
  doc["metadata"] = std::move(md);
  return doc;
}

inline std::string serialize_model(const MinlpProblem& P) { return model_to_json(P).dump(2) + "\n"; }

// ---------------------------------------------------------------- traces

enum class TraceFormat { csv, json };

inline constexpr const char* kTraceHeader = "k,y,classification,subproblem_value,rho,ubd,lbd,time_s";

namespace detail {

inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline double parse_num(const std::string& s, std::size_t line) {
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("trace line " + std::to_string(line) + ": bad number \"" + s + "\"");
  }
}

}  // namespace detail

/// Integer vectors in the y column are separated by ';'.
inline std::string write_trace_csv(const std::vector<IterationRecord>& trace) {
  std::string out = std::string(kTraceHeader) + "\n";
  for (const auto& r : trace) {
    char t[32];
    std::snprintf(t, sizeof t, "%.6f", r.time_s);
    out += std::to_string(r.k) + "," + to_string(r.y, ';') + "," + to_string(r.classification) + "," +
           detail::num(r.subproblem_value) + "," + detail::num(r.rho) + "," + detail::num(r.ubd) + "," +
           detail::num(r.lbd) + "," + t + "\n";
  }
  return out;
}

inline json trace_to_json(const std::vector<IterationRecord>& trace, const OaResult* result = nullptr) {
  auto jn = [](double v) { return std::isfinite(v) ? json(v) : json(detail::num(v)); };
  json rows = json::array();
  for (const auto& r : trace) {
    json row{{"k", r.k},
             {"y", r.y},
             {"classification", to_string(r.classification)},
             {"subproblem_value", jn(r.subproblem_value)},
             {"rho", jn(r.rho)},
             {"ubd", jn(r.ubd)},
             {"lbd", jn(r.lbd)},
             {"time_s", r.time_s},
             {"x", r.x}};
    if (!r.J.empty()) {
      row["J"] = r.J;
      row["Pi"] = r.Pi;
      row["max_g_J"] = r.max_g_J;
    }
    if (!r.note.empty()) row["note"] = r.note;
    rows.push_back(std::move(row));
  }
  json doc{{"rows", rows}};
  if (result) {
    json st{{"status", to_string(result->status)},
            {"objective", jn(result->objective)},
            {"lbd", jn(result->lbd)},
            {"iterations", result->iterations},
            {"message", result->message}};
    if (result->incumbent) {
      st["x"] = result->incumbent->x;
      st["y"] = result->incumbent->y;
    }
    doc["final"] = std::move(st);
  }
  return doc;
}

inline std::string write_trace(const std::vector<IterationRecord>& trace, TraceFormat fmt,
                               const OaResult* result = nullptr) {
  if (fmt == TraceFormat::csv) return write_trace_csv(trace);
  return trace_to_json(trace, result).dump(2) + "\n";
}

/// Reads the columns written by write_trace_csv back into records.
inline std::vector<IterationRecord> parse_trace_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("trace is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) throw ParseError("trace header mismatch: \"" + line + "\"");
  std::vector<IterationRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 8) throw ParseError("trace line " + std::to_string(lineno) + ": expected 8 columns");
    IterationRecord r;
    r.k = static_cast<int>(detail::parse_num(cells[0], lineno));
    std::stringstream ys(cells[1]);
    std::string part;
    while (std::getline(ys, part, ';')) r.y.push_back(static_cast<long long>(detail::parse_num(part, lineno)));
    if (cells[2] == "feasible")
      r.classification = Classification::feasible_integer;
    else if (cells[2] == "infeasible")
      r.classification = Classification::infeasible_integer;
    else
      throw ParseError("trace line " + std::to_string(lineno) + ": bad classification \"" + cells[2] + "\"");
    r.subproblem_value = detail::parse_num(cells[3], lineno);
    r.rho = detail::parse_num(cells[4], lineno);
    r.ubd = detail::parse_num(cells[5], lineno);
    r.lbd = detail::parse_num(cells[6], lineno);
    r.time_s = detail::parse_num(cells[7], lineno);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace oakit::io

#pragma once

// JSON mean-spec files:
//   { "n": 2, "domain": [0, "inf"], "f": "ln(x)", "direction": "inc",
//     "p": ["1", "x"] }
// Needs nlohmann/json (vendor/json.hpp) on the include path.

#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "expr.hpp"
#include "interval.hpp"
#include "mean.hpp"
#include "monotone.hpp"
#include "parser.hpp"

namespace bajmean {

/// A parsed spec file. Weights are optional so that generator-only files
/// (for inversion and left-inverse checks) share the format.
struct SpecDocument {
  Interval domain = Interval::real_line();
  Expr f = build::var();
  std::optional<Direction> direction;
  std::vector<Expr> p;
  std::optional<std::size_t> n;
};

namespace detail {

inline double json_endpoint(const nlohmann::json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw SpecError("domain endpoints must be numbers or \"inf\"/\"-inf\"");
}

inline nlohmann::json endpoint_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline Expr parse_field(const std::string& text, const std::string& field) {
  try {
    return parse(text);
  } catch (const ParseError& e) {
    throw SpecError(field + ": " + e.what());
  }
}

}  // namespace detail

inline SpecDocument spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SpecError("spec must be a JSON object");
  SpecDocument doc;
  if (!j.contains("domain") || !j["domain"].is_array() || j["domain"].size() != 2) {
    throw SpecError("spec needs \"domain\": [lo, hi]");
  }
  doc.domain = Interval(detail::json_endpoint(j["domain"][0]), detail::json_endpoint(j["domain"][1]));
  if (!j.contains("f") || !j["f"].is_string()) throw SpecError("spec needs \"f\" as a string");
  doc.f = detail::parse_field(j["f"].get<std::string>(), "f");
  if (j.contains("direction")) {
    const std::string d = j["direction"].is_string() ? j["direction"].get<std::string>() : "";
    if (d == "inc") {
      doc.direction = Direction::Increasing;
    } else if (d == "dec") {
      doc.direction = Direction::Decreasing;
    } else {
      throw SpecError("\"direction\" must be \"inc\" or \"dec\"");
    }
  }
  if (j.contains("p")) {
    if (!j["p"].is_array()) throw SpecError("\"p\" must be an array of expressions");
    for (std::size_t i = 0; i < j["p"].size(); ++i) {
      if (!j["p"][i].is_string()) throw SpecError("weights must be expression strings");
      doc.p.push_back(detail::parse_field(j["p"][i].get<std::string>(),
                                          "p[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("n")) {
    if (!j["n"].is_number_integer() || j["n"].get<long long>() < 1) {
      throw SpecError("\"n\" must be a positive integer");
    }
    doc.n = j["n"].get<std::size_t>();
    if (!doc.p.empty() && *doc.n != doc.p.size()) {
      throw SpecError("\"n\" disagrees with the number of weights");
    }
  }
  return doc;
}

inline SpecDocument load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw SpecError(path + ": " + e.what());
  }
  return spec_from_json(j);
}

inline MonotoneFn make_generator(const SpecDocument& doc) {
  if (doc.direction) return MonotoneFn(doc.f, doc.domain, *doc.direction);
  return MonotoneFn::detect(doc.f, doc.domain);
}

inline MeanSpec make_mean(const SpecDocument& doc, SolverConfig solver = {}) {
  if (doc.p.empty()) throw SpecError("spec has no weights \"p\"");
  return MeanSpec(make_generator(doc), WeightSystem(doc.p, doc.domain), solver);
}

inline nlohmann::json to_json(const MonotoneFn& f, const WeightSystem* p = nullptr) {
  nlohmann::json j;
  if (p) j["n"] = p->size();
  j["domain"] = {detail::endpoint_json(f.domain().lo()), detail::endpoint_json(f.domain().hi())};
  j["f"] = to_string(f.expr());
  j["direction"] = f.increasing() ? "inc" : "dec";
  if (p) {
    j["p"] = nlohmann::json::array();
    for (const Expr& w : p->weights()) j["p"].push_back(to_string(w));
  }
  return j;
}

inline nlohmann::json to_json(const MeanSpec& spec) {
  return to_json(spec.generator(), &spec.weights());
}

}  // namespace bajmean

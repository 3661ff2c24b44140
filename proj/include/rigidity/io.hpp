#ifndef RIGIDITY_IO_HPP
#define RIGIDITY_IO_HPP

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rigidity/framework.hpp"

namespace rigidity {

using Json = nlohmann::ordered_json;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path + "'");
  return os.str();
}

namespace detail {

inline void reject_unknown_keys(const Json& obj, const std::set<std::string>& allowed, const std::string& where,
                                std::vector<Violation>& bad) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) bad.push_back({ViolationKind::schema, where + ": unknown key '" + key + "'"});
}

}  // namespace detail

/// Parses the framework schema
///   {"dimension": 2|3,
///    "vertices": [{"id": str, "coords": [num...], "pinned": bool}],
///    "edges": [{"u": str, "v": str, "length": num (optional)}]}
/// rejecting unknown keys, then validates the result. Every problem found is
/// reported in one ValidationError.
inline FrameworkDescription parse_framework_description(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError({{ViolationKind::schema, std::string("malformed JSON: ") + e.what()}});
  }
  std::vector<Violation> bad;
  if (!doc.is_object()) throw ValidationError({{ViolationKind::schema, "top level must be an object"}});
  detail::reject_unknown_keys(doc, {"dimension", "vertices", "edges"}, "top level", bad);

  FrameworkDescription desc;
  if (!doc.contains("dimension") || !doc["dimension"].is_number_integer()) {
    bad.push_back({ViolationKind::schema, "\"dimension\" must be the integer 2 or 3"});
  } else {
    desc.dimension = doc["dimension"].get<int>();
    if (desc.dimension != 2 && desc.dimension != 3)
      bad.push_back({ViolationKind::schema, "\"dimension\" must be 2 or 3, got " + std::to_string(desc.dimension)});
  }

  if (!doc.contains("vertices") || !doc["vertices"].is_array()) {
    bad.push_back({ViolationKind::schema, "\"vertices\" must be an array"});
  } else {
    std::size_t i = 0;
    for (const auto& jv : doc["vertices"]) {
      const std::string where = "vertex " + std::to_string(i++);
      if (!jv.is_object()) {
        bad.push_back({ViolationKind::schema, where + " must be an object"});
        continue;
      }
      detail::reject_unknown_keys(jv, {"id", "coords", "pinned"}, where, bad);
      VertexSpec vs;
      bool ok = true;
      if (!jv.contains("id") || !jv["id"].is_string()) {
        bad.push_back({ViolationKind::schema, where + ": \"id\" must be a string"});
        ok = false;
      } else {
        vs.id = jv["id"].get<std::string>();
      }
      if (!jv.contains("coords") || !jv["coords"].is_array()) {
        bad.push_back({ViolationKind::schema, where + ": \"coords\" must be an array of numbers"});
        ok = false;
      } else {
        for (const auto& c : jv["coords"]) {
          if (!c.is_number()) {
            bad.push_back({ViolationKind::schema, where + ": \"coords\" must be an array of numbers"});
            ok = false;
            break;
          }
          vs.coords.push_back(c.get<double>());
        }
      }
      if (!jv.contains("pinned") || !jv["pinned"].is_boolean()) {
        bad.push_back({ViolationKind::schema, where + ": \"pinned\" must be a boolean"});
        ok = false;
      } else {
        vs.pinned = jv["pinned"].get<bool>();
      }
      if (ok) desc.vertices.push_back(std::move(vs));
    }
  }

  if (!doc.contains("edges") || !doc["edges"].is_array()) {
    bad.push_back({ViolationKind::schema, "\"edges\" must be an array"});
  } else {
    std::size_t k = 0;
    for (const auto& je : doc["edges"]) {
      const std::string where = "edge " + std::to_string(k++);
      if (!je.is_object()) {
        bad.push_back({ViolationKind::schema, where + " must be an object"});
        continue;
      }
      detail::reject_unknown_keys(je, {"u", "v", "length"}, where, bad);
      EdgeSpec es;
      bool ok = true;
      for (const char* key : {"u", "v"}) {
        if (!je.contains(key) || !je[key].is_string()) {
          bad.push_back({ViolationKind::schema, where + ": \"" + key + "\" must be a string"});
          ok = false;
        }
      }
      if (ok) {
        es.u = je["u"].get<std::string>();
        es.v = je["v"].get<std::string>();
      }
      if (je.contains("length")) {
        if (!je["length"].is_number()) {
          bad.push_back({ViolationKind::schema, where + ": \"length\" must be a number"});
          ok = false;
        } else {
          es.length = je["length"].get<double>();
        }
      }
      if (ok) desc.edges.push_back(std::move(es));
    }
  }
  if (!bad.empty()) throw ValidationError(std::move(bad));
  return desc;
}

inline Framework parse_framework_json(const std::string& text) { return build_framework(parse_framework_description(text)); }

inline Framework load_framework(const std::string& path) { return parse_framework_json(read_file(path)); }

inline Json framework_to_json(const Framework& f) {
  const auto desc = describe(f);
  Json doc;
  doc["dimension"] = desc.dimension;
  doc["vertices"] = Json::array();
  for (const auto& v : desc.vertices) doc["vertices"].push_back({{"id", v.id}, {"coords", v.coords}, {"pinned", v.pinned}});
  doc["edges"] = Json::array();
  for (const auto& e : desc.edges) doc["edges"].push_back({{"u", e.u}, {"v", e.v}, {"length", *e.length}});
  return doc;
}

namespace detail {

inline void dump_number(std::string& out, double v) {
  if (!std::isfinite(v)) {
    out += "null";
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

inline void dump_value(std::string& out, const Json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case Json::value_t::number_float:
      dump_number(out, j.get<double>());
      return;
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{";
      out += nl;
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad;
        out += Json(key).dump();
        out += indent > 0 ? ": " : ":";
        dump_value(out, value, indent, depth + 1);
      }
      out += nl;
      out += close;
      out += "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[";
      out += nl;
      bool first = true;
      for (const auto& value : j) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad;
        dump_value(out, value, indent, depth + 1);
      }
      out += nl;
      out += close;
      out += "]";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace detail

/// Serializes with 17 significant digits for every float; non-finite
/// floats become null.
inline std::string dump_json(const Json& j, int indent = 2) {
  std::string out;
  detail::dump_value(out, j, indent, 0);
  return out;
}

}  // namespace rigidity

#endif  // RIGIDITY_IO_HPP

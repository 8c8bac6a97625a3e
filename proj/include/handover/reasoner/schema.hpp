#pragma once

// Validator for the JSON-schema subset used by output structures: type,
// properties, required, additionalProperties (boolean), enum, minimum,
// maximum, items, minItems, maxItems, uniqueItems, minLength.

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

namespace handover::reasoner {

namespace detail {

inline bool type_matches(const nlohmann::ordered_json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "null") return v.is_null();
  if (type == "number") return v.is_number();
  if (type == "integer") {
    if (v.is_number_integer()) return true;
    if (v.is_number_float()) {
      const double d = v.get<double>();
      return std::isfinite(d) && d == std::floor(d);
    }
    return false;
  }
  return false;
}

inline std::string short_dump(const nlohmann::ordered_json& v) {
  std::string s = v.dump();
  if (s.size() > 60) s = s.substr(0, 57) + "...";
  return s;
}

inline void validate_node(const nlohmann::ordered_json& schema, const nlohmann::ordered_json& v,
                          const std::string& path, std::vector<std::string>& out) {
  if (schema.contains("type")) {
    const auto& t = schema.at("type");
    bool ok = false;
    std::string names;
    if (t.is_array()) {
      for (const auto& x : t) {
        ok = ok || type_matches(v, x.get<std::string>());
        names += (names.empty() ? "" : "|") + x.get<std::string>();
      }
    } else {
      names = t.get<std::string>();
      ok = type_matches(v, names);
    }
    if (!ok) {
      out.push_back(path + ": expected " + names + ", got " + short_dump(v));
      return;
    }
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& e : schema.at("enum")) found = found || e == v;
    if (!found) out.push_back(path + ": " + short_dump(v) + " is not one of " + schema.at("enum").dump());
  }
  if (v.is_number()) {
    const double d = v.get<double>();
    if (schema.contains("minimum") && d < schema.at("minimum").get<double>()) {
      out.push_back(path + ": " + short_dump(v) + " is below minimum " + schema.at("minimum").dump());
    }
    if (schema.contains("maximum") && d > schema.at("maximum").get<double>()) {
      out.push_back(path + ": " + short_dump(v) + " exceeds maximum " + schema.at("maximum").dump());
    }
  }
  if (v.is_string() && schema.contains("minLength") &&
      v.get<std::string>().size() < schema.at("minLength").get<std::size_t>()) {
    out.push_back(path + ": string shorter than " + schema.at("minLength").dump());
  }
  if (v.is_object()) {
    if (schema.contains("required")) {
      for (const auto& r : schema.at("required")) {
        if (!v.contains(r.get<std::string>())) {
          out.push_back(path + ": missing required field \"" + r.get<std::string>() + "\"");
        }
      }
    }
    const bool closed = schema.contains("additionalProperties") &&
                        schema.at("additionalProperties").is_boolean() &&
                        !schema.at("additionalProperties").get<bool>();
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (schema.contains("properties") && schema.at("properties").contains(it.key())) {
        validate_node(schema.at("properties").at(it.key()), it.value(), path + "." + it.key(), out);
      } else if (closed) {
        out.push_back(path + ": unexpected field \"" + it.key() + "\"");
      }
    }
  }
  if (v.is_array()) {
    if (schema.contains("minItems") && v.size() < schema.at("minItems").get<std::size_t>()) {
      out.push_back(path + ": fewer than " + schema.at("minItems").dump() + " items");
    }
    if (schema.contains("maxItems") && v.size() > schema.at("maxItems").get<std::size_t>()) {
      out.push_back(path + ": more than " + schema.at("maxItems").dump() + " items");
    }
    if (schema.value("uniqueItems", false)) {
      std::set<std::string> seen;
      for (const auto& x : v) {
        if (!seen.insert(x.dump()).second) out.push_back(path + ": duplicate item " + short_dump(x));
      }
    }
    if (schema.contains("items")) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        validate_node(schema.at("items"), v[i], path + "[" + std::to_string(i) + "]", out);
      }
    }
  }
}

}  // namespace detail

/// Every way `value` violates `schema`; empty when it conforms.
inline std::vector<std::string> validate_schema(const nlohmann::ordered_json& schema,
                                                const nlohmann::ordered_json& value) {
  std::vector<std::string> out;
  detail::validate_node(schema, value, "$", out);
  return out;
}

}  // namespace handover::reasoner

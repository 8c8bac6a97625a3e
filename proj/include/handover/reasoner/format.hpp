#pragma once

// Fixed-precision rendering of supporting information. Every floating-point
// number in an SI document is rounded to 4 decimals (0.1 mm) when the
// document is built and printed with exactly 4 decimals, so prompts are
// byte-stable and parse back to the same values.

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <string>

#include "handover/geometry/summary.hpp"

namespace handover::reasoner {

using json = nlohmann::ordered_json;

inline constexpr int kSiDecimals = 4;

inline double round4(double x) {
  const double r = std::round(x * 1e4) / 1e4;
  return r == 0.0 ? 0.0 : r;  // no "-0.0000"
}

inline json vec_json(const geometry::Vec3& v) {
  return json::array({round4(v.x()), round4(v.y()), round4(v.z())});
}

inline json summary_json(const geometry::GeomSummary& s) {
  json j;
  j["centroid"] = vec_json(s.centroid);
  j["aabb_min"] = vec_json(s.aabb_min);
  j["aabb_max"] = vec_json(s.aabb_max);
  j["dominant_axis"] = vec_json(s.dominant_axis);
  j["dominant_length"] = round4(s.dominant_length);
  j["point_count"] = s.point_count;
  return j;
}

inline geometry::Vec3 vec_from_json(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

namespace detail {

inline void render_fixed(const json& j, int indent, int depth, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + json(it.key()).dump() + ": ";
        render_fixed(it.value(), indent, depth + 1, out);
      }
      out += "\n" + close_pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Short numeric arrays (vectors) stay on one line.
      bool numeric = j.size() <= 4;
      for (const auto& v : j) numeric = numeric && v.is_number();
      if (numeric) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          render_fixed(j[i], indent, depth + 1, out);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        render_fixed(j[i], indent, depth + 1, out);
      }
      out += "\n" + close_pad + "]";
      return;
    }
    case json::value_t::number_float: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.*f", kSiDecimals, round4(j.get<double>()));
      out += buf;
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace detail

/// Pretty-prints `j` with floats at fixed precision. Integers stay integers.
inline std::string render_fixed(const json& j, int indent = 2) {
  std::string out;
  detail::render_fixed(j, indent, 0, out);
  return out;
}

}  // namespace handover::reasoner

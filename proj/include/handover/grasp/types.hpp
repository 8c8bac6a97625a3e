#pragma once

#include <Eigen/Geometry>
#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "handover/errors.hpp"
#include "handover/geometry/types.hpp"

namespace handover::grasp {

using geometry::Vec3;
using Quat = Eigen::Quaterniond;

struct GripperSpec {
  double max_width{0.08};
  double finger_depth{0.05};
  double min_width{0.0};

  void validate() const {
    if (!(min_width >= 0.0 && min_width < max_width)) throw InputError("gripper: need 0 <= min_width < max_width");
    if (!(finger_depth > 0.0)) throw InputError("gripper: finger_depth must be positive");
  }
};

/// Parallel-jaw grasp. The rotation's columns are the closing axis (x), the
/// finger-plane normal (y) and the approach direction (z).
struct GraspCandidate {
  Quat rotation{Quat::Identity()};
  Vec3 translation{Vec3::Zero()};
  double width{0.0};
  std::array<Vec3, 2> contacts{Vec3::Zero(), Vec3::Zero()};
  Vec3 approach{Vec3::UnitZ()};

  bool operator==(const GraspCandidate& o) const {
    return rotation.coeffs() == o.rotation.coeffs() && translation == o.translation && width == o.width &&
           contacts == o.contacts && approach == o.approach;
  }
};

struct HandoverPose {
  Vec3 position{Vec3::Zero()};
  Quat rotation{Quat::Identity()};
};

/// Everything wrong with `g` as an emitted candidate for `gripper`.
inline std::vector<std::string> invariant_violations(const GraspCandidate& g, const GripperSpec& gripper) {
  std::vector<std::string> out;
  if (std::abs(g.rotation.norm() - 1.0) > 1e-9) out.push_back("rotation is not a unit quaternion");
  if (g.width < gripper.min_width || g.width > gripper.max_width) out.push_back("width outside gripper range");
  if (std::abs((g.contacts[0] - g.contacts[1]).norm() - g.width) > 0.002) {
    out.push_back("contact separation differs from width by more than 2 mm");
  }
  const Vec3 axis = (g.contacts[1] - g.contacts[0]).normalized();
  const double off = std::abs(g.approach.normalized().dot(axis));
  if (off > std::sin(5.0 * std::numbers::pi / 180.0)) out.push_back("approach not perpendicular to contact axis");
  return out;
}

// JSON form: quaternion as [w, x, y, z], vectors as [x, y, z], meters.

inline nlohmann::ordered_json vec_to_json(const Vec3& v) { return nlohmann::ordered_json::array({v.x(), v.y(), v.z()}); }

inline Vec3 vec_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw InputError("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline nlohmann::ordered_json to_json(const GraspCandidate& g) {
  nlohmann::ordered_json j;
  j["quaternion"] = {g.rotation.w(), g.rotation.x(), g.rotation.y(), g.rotation.z()};
  j["translation"] = vec_to_json(g.translation);
  j["width"] = g.width;
  j["contacts"] = {vec_to_json(g.contacts[0]), vec_to_json(g.contacts[1])};
  j["approach"] = vec_to_json(g.approach);
  return j;
}

inline GraspCandidate grasp_from_json(const nlohmann::json& j) {
  GraspCandidate g;
  const auto& q = j.at("quaternion");
  if (!q.is_array() || q.size() != 4) throw InputError("quaternion must be [w, x, y, z]");
  g.rotation = Quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(), q[3].get<double>());
  if (!(g.rotation.norm() > 0.0)) throw InputError("zero quaternion");
  g.rotation.normalize();
  g.translation = vec_from(j.at("translation"));
  g.width = j.at("width").get<double>();
  const auto& c = j.at("contacts");
  if (!c.is_array() || c.size() != 2) throw InputError("contacts must hold two points");
  g.contacts = {vec_from(c[0]), vec_from(c[1])};
  g.approach = j.contains("approach") ? vec_from(j.at("approach")) : Vec3(g.rotation.toRotationMatrix().col(2));
  return g;
}

inline constexpr std::string_view kGraspsFormat = "handover-grasps/1";

inline nlohmann::ordered_json grasps_to_json(const std::vector<GraspCandidate>& gs) {
  nlohmann::ordered_json j;
  j["format"] = std::string(kGraspsFormat);
  j["grasps"] = nlohmann::ordered_json::array();
  for (const auto& g : gs) j["grasps"].push_back(to_json(g));
  return j;
}

/// Reads a grasp set: {"format": ..., "grasps": [...]} or a bare array.
inline std::vector<GraspCandidate> load_grasps(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw InputError("cannot read grasp file " + file.string());
  std::vector<GraspCandidate> out;
  try {
    const auto doc = nlohmann::json::parse(in);
    const auto& arr = doc.is_array() ? doc : doc.at("grasps");
    for (const auto& g : arr) out.push_back(grasp_from_json(g));
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed grasp file " + file.string() + ": " + e.what());
  }
  return out;
}

}  // namespace handover::grasp

#pragma once

#include <cmath>

#include "handover/grasp/types.hpp"

namespace handover::grasp {

/// Object rotation at the handover point: the smallest rotation that turns
/// the robot-grasp-to-human-grasp direction onto `base_to_human`. When the
/// two are opposite, the half turn is about up x offset (up = +z), or about
/// +x x offset if the offset is vertical.
inline HandoverPose handover_orientation(const GraspCandidate& robot_grasp, const Vec3& human_grasp_point,
                                         const Vec3& base_to_human, const Vec3& handover_position) {
  if (std::abs(base_to_human.norm() - 1.0) > 1e-6) throw InputError("base_to_human must be a unit vector");
  const Vec3 d = human_grasp_point - robot_grasp.translation;
  if (d.norm() < 1e-9) throw DegenerateGeometryError("human and robot grasp points coincide");
  const Vec3 v = d.normalized();
  const Vec3& b = base_to_human;
  const double c = v.dot(b);

  HandoverPose pose;
  pose.position = handover_position;
  if (c < -1.0 + 1e-9) {
    Vec3 axis = Vec3::UnitZ().cross(v);
    if (axis.norm() < 1e-6) axis = Vec3::UnitX().cross(v);
    pose.rotation = Quat(Eigen::AngleAxisd(std::numbers::pi, axis.normalized()));
    return pose;
  }
  const Vec3 w = v.cross(b);
  pose.rotation = Quat(1.0 + c, w.x(), w.y(), w.z()).normalized();
  return pose;
}

}  // namespace handover::grasp

#pragma once

// Antipodal grasp sampler: a stand-in for a learned grasp planner.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "handover/geometry/normals.hpp"
#include "handover/geometry/spatial_grid.hpp"
#include "handover/grasp/types.hpp"
#include "handover/random.hpp"

namespace handover::grasp {

struct GenerateOptions {
  std::size_t normal_k{15};
  double max_normal_angle_deg{30.0};  // from anti-parallel, and from the contact axis
  double voxel{0.003};                // input thinning; 0 keeps every point
  std::size_t min_points{50};
  int approach_samples{8};
  double finger_thickness{0.01};
};

namespace detail {

/// First point per voxel, in input order.
inline std::vector<std::size_t> voxel_thin(std::span<const Vec3> pts, double voxel) {
  std::vector<std::size_t> keep;
  if (!(voxel > 0.0)) {
    keep.resize(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) keep[i] = i;
    return keep;
  }
  std::unordered_set<std::uint64_t> seen;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    auto cell = [&](double x) { return static_cast<std::uint64_t>(static_cast<std::int64_t>(std::floor(x / voxel)) + (1 << 20)) & 0x1FFFFF; };
    const std::uint64_t key = cell(pts[i].x()) | (cell(pts[i].y()) << 21) | (cell(pts[i].z()) << 42);
    if (seen.insert(key).second) keep.push_back(i);
  }
  return keep;
}

/// Any unit vector perpendicular to `x`, chosen deterministically.
inline Vec3 perpendicular(const Vec3& x) {
  Vec3 ref = Vec3::UnitX();
  if (std::abs(x.y()) <= std::abs(x.x()) && std::abs(x.y()) <= std::abs(x.z())) ref = Vec3::UnitY();
  if (std::abs(x.z()) < std::abs(x.x()) && std::abs(x.z()) < std::abs(x.y())) ref = Vec3::UnitZ();
  return x.cross(ref).normalized();
}

/// Points that would sit inside a finger or the palm for this grasp.
inline std::size_t collisions(std::span<const Vec3> pts, const geometry::SpatialGrid& grid, const Vec3& center,
                              const Vec3& x, const Vec3& approach, double width, const GripperSpec& gripper,
                              double thickness) {
  const Vec3 y = approach.cross(x);
  const double reach = gripper.finger_depth + thickness + width / 2.0 + thickness;
  std::size_t hits = 0;
  grid.for_each_within(center, reach, [&](std::size_t i) {
    const Vec3 d = pts[i] - center;
    const double s = -d.dot(approach);  // distance back toward the palm
    const double lx = std::abs(d.dot(x));
    const double ly = std::abs(d.dot(y));
    if (ly > thickness) return;
    const bool finger = s > 0.002 && s <= gripper.finger_depth && lx > width / 2.0 + 0.002 &&
                        lx <= width / 2.0 + thickness;
    const bool palm = s > gripper.finger_depth && s <= gripper.finger_depth + thickness && lx <= width / 2.0 + thickness;
    if (finger || palm) ++hits;
  });
  return hits;
}

}  // namespace detail

/// Samples up to `count_target` antipodal grasps. Contacts are point pairs
/// whose outward normals are within the angle limit of anti-parallel and of
/// the line joining them, no farther apart than the gripper opens. The
/// approach is the least obstructed of several directions around the
/// closing axis, preferring +z (away from a camera looking down). Same
/// cloud and seed give the same grasps.
inline std::vector<GraspCandidate> generate_grasps(std::span<const Vec3> cloud, const GripperSpec& gripper,
                                                   std::uint64_t seed, std::size_t count_target,
                                                   const GenerateOptions& opt = {}) {
  gripper.validate();
  std::vector<GraspCandidate> out;
  if (cloud.size() < opt.min_points || count_target == 0) return out;

  const auto keep = detail::voxel_thin(cloud, opt.voxel);
  std::vector<Vec3> pts;
  pts.reserve(keep.size());
  for (auto i : keep) pts.push_back(cloud[i]);
  if (pts.size() < 3) return out;
  const auto normals = geometry::estimate_normals(pts, opt.normal_k);
  const geometry::SpatialGrid grid(pts, std::max(gripper.max_width / 4.0, 1e-3));

  const double cos_lim = std::cos(opt.max_normal_angle_deg * std::numbers::pi / 180.0);
  const double min_w = std::max(gripper.min_width, 1e-3);
  std::vector<std::size_t> order(pts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  std::unordered_set<std::uint64_t> used;
  const std::size_t max_tries = std::max<std::size_t>(2000, 40 * count_target);
  std::size_t tries = 0;
  for (std::size_t i : order) {
    if (out.size() >= count_target || tries++ >= max_tries) break;
    const Vec3& p = pts[i];
    const Vec3& ni = normals[i];
    std::size_t best = pts.size();
    double best_score = -1.0;
    for (std::size_t j : grid.radius(p, gripper.max_width)) {
      if (j == i) continue;
      const Vec3 d = pts[j] - p;
      const double w = d.norm();
      if (w < min_w || w > gripper.max_width) continue;
      const Vec3 u = d / w;
      const double ai = -ni.dot(u);
      const double aj = normals[j].dot(u);
      if (ni.dot(normals[j]) > -cos_lim || ai < cos_lim || aj < cos_lim) continue;
      if (ai + aj > best_score) {
        best_score = ai + aj;
        best = j;
      }
    }
    if (best == pts.size()) continue;
    const std::uint64_t key = static_cast<std::uint64_t>(std::min(i, best)) * pts.size() + std::max(i, best);
    if (!used.insert(key).second) continue;

    GraspCandidate g;
    g.contacts = {p, pts[best]};
    g.width = (pts[best] - p).norm();
    g.translation = 0.5 * (p + pts[best]);
    const Vec3 x = (pts[best] - p) / g.width;
    const Vec3 b1 = detail::perpendicular(x);
    const Vec3 b2 = x.cross(b1);
    std::size_t best_hits = static_cast<std::size_t>(-1);
    double best_up = -2.0;
    Vec3 approach = b1;
    for (int k = 0; k < opt.approach_samples; ++k) {
      const double th = 2.0 * std::numbers::pi * k / opt.approach_samples;
      const Vec3 a = (std::cos(th) * b1 + std::sin(th) * b2).normalized();
      if (a.z() < -1e-9) continue;  // from below the table
      const auto hits = detail::collisions(pts, grid, g.translation, x, a, g.width, gripper, opt.finger_thickness);
      if (hits < best_hits || (hits == best_hits && a.z() > best_up + 1e-12)) {
        best_hits = hits;
        best_up = a.z();
        approach = a;
      }
    }
    g.approach = approach;
    Eigen::Matrix3d r;
    r.col(0) = x;
    r.col(1) = approach.cross(x);
    r.col(2) = approach;
    g.rotation = Quat(r).normalized();
    out.push_back(g);
  }
  return out;
}

inline std::vector<GraspCandidate> generate_grasps(const PointCloud& cloud, const GripperSpec& gripper,
                                                   std::uint64_t seed, std::size_t count_target,
                                                   const GenerateOptions& opt = {}) {
  return generate_grasps(std::span<const Vec3>(cloud.points), gripper, seed, count_target, opt);
}

}  // namespace handover::grasp

#pragma once

// Closes a single-view tabletop observation into a rough solid so that
// opposing surfaces exist for antipodal grasps. Two guesses are added:
// vertical walls dropped from the silhouette to the table, and the visible
// surface mirrored about the plane halfway between the object's top and the
// table. Every added point remembers the observed point it came from, so
// part labels carry over.

#include <algorithm>
#include <cmath>
#include <vector>

#include "handover/geometry/mask_ops.hpp"
#include "handover/geometry/types.hpp"

namespace handover::grasp {

using geometry::CameraIntrinsics;
using geometry::DepthImage;
using geometry::Mask2D;
using geometry::PointCloud;
using geometry::Vec3;

struct CompletedCloud {
  std::vector<Vec3> points;
  std::vector<std::size_t> source;  // index of the observed point each one came from
  std::size_t observed{0};          // the first `observed` points are the input cloud
  double table_depth{0.0};          // 0 when no table was visible
};

struct CompletionOptions {
  double wall_step{0.002};
  int table_padding{10};
  double min_height{0.003};  // points closer than this to the table are not mirrored
};

/// Median depth of valid non-object pixels around the object, or 0.
inline double estimate_table_depth(const DepthImage& depth, const Mask2D& object_mask, int padding) {
  const auto box = geometry::crop_to_mask(object_mask, padding);
  std::vector<float> vals;
  for (int v = box.v_min; v <= box.v_max; ++v) {
    for (int u = box.u_min; u <= box.u_max; ++u) {
      if (object_mask.at(u, v)) continue;
      const float d = depth.at(u, v);
      if (d > 0.0f && std::isfinite(d)) vals.push_back(d);
    }
  }
  if (vals.empty()) return 0.0;
  auto mid = vals.begin() + static_cast<std::ptrdiff_t>(vals.size() / 2);
  std::nth_element(vals.begin(), mid, vals.end());
  return *mid;
}

inline CompletedCloud complete_tabletop(const PointCloud& object, const DepthImage& depth, const Mask2D& object_mask,
                                        const CameraIntrinsics& intr, const CompletionOptions& opt = {}) {
  CompletedCloud out;
  out.points = object.points;
  out.observed = object.size();
  for (std::size_t i = 0; i < object.size(); ++i) out.source.push_back(i);
  if (object.empty() || !object.has_pixels()) return out;

  const double table = estimate_table_depth(depth, object_mask, opt.table_padding);
  out.table_depth = table;
  double z_min = object.points.front().z();
  for (const auto& p : object.points) z_min = std::min(z_min, p.z());
  if (!(table > z_min + opt.min_height)) return out;

  // Walls below silhouette pixels.
  const int w = intr.width, h = intr.height;
  for (std::size_t i = 0; i < object.size(); ++i) {
    const int u = static_cast<int>(object.pixels[i] % static_cast<std::uint32_t>(w));
    const int v = static_cast<int>(object.pixels[i] / static_cast<std::uint32_t>(w));
    const bool edge = u == 0 || v == 0 || u == w - 1 || v == h - 1 || !object_mask.at(u - 1, v) ||
                      !object_mask.at(u + 1, v) || !object_mask.at(u, v - 1) || !object_mask.at(u, v + 1);
    if (!edge) continue;
    const Vec3& p = object.points[i];
    for (double z = p.z() + opt.wall_step; z < table; z += opt.wall_step) {
      out.points.emplace_back(p.x(), p.y(), z);
      out.source.push_back(i);
    }
  }
  // Hidden underside.
  for (std::size_t i = 0; i < object.size(); ++i) {
    const Vec3& p = object.points[i];
    if (p.z() > table - opt.min_height) continue;
    out.points.emplace_back(p.x(), p.y(), z_min + table - p.z());
    out.source.push_back(i);
  }
  return out;
}

}  // namespace handover::grasp

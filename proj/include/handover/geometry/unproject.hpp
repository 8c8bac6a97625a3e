#pragma once

#include <cmath>
#include <optional>

#include "handover/geometry/types.hpp"

namespace handover::geometry {

/// Back-projects every masked pixel with positive depth through the pinhole
/// model. Points come out in row-major pixel order and record their pixel.
inline PointCloud unproject(const DepthImage& depth, const CameraIntrinsics& intr,
                            const Mask2D* mask = nullptr) {
  intr.validate();
  if (depth.width != intr.width || depth.height != intr.height) {
    throw InputError("unproject: depth image " + std::to_string(depth.width) + "x" +
                     std::to_string(depth.height) + " does not match intrinsics " +
                     std::to_string(intr.width) + "x" + std::to_string(intr.height));
  }
  if (depth.meters.size() != static_cast<std::size_t>(depth.width) * depth.height) {
    throw InputError("unproject: depth buffer size mismatch");
  }
  if (mask && (mask->width() != intr.width || mask->height() != intr.height)) {
    throw InputError("unproject: mask dimensions do not match intrinsics");
  }

  PointCloud cloud;
  for (int v = 0; v < intr.height; ++v) {
    for (int u = 0; u < intr.width; ++u) {
      const auto pixel = static_cast<std::uint32_t>(v) * static_cast<std::uint32_t>(intr.width) +
                         static_cast<std::uint32_t>(u);
      if (mask && !mask->test(pixel)) continue;
      const double d = depth.meters[pixel];
      if (!(d > 0.0) || !std::isfinite(d)) continue;
      cloud.push_back(Vec3((u - intr.cx) * d / intr.fx, (v - intr.cy) * d / intr.fy, d), pixel);
    }
  }
  return cloud;
}

inline PointCloud unproject(const DepthImage& depth, const CameraIntrinsics& intr,
                            const Mask2D& mask) {
  return unproject(depth, intr, &mask);
}

/// Projects a camera-frame point to the nearest pixel; nullopt behind the camera.
inline std::optional<std::pair<int, int>> project(const Vec3& p, const CameraIntrinsics& intr) {
  if (!(p.z() > 0.0)) return std::nullopt;
  const double u = p.x() * intr.fx / p.z() + intr.cx;
  const double v = p.y() * intr.fy / p.z() + intr.cy;
  return std::pair{static_cast<int>(std::lround(u)), static_cast<int>(std::lround(v))};
}

}  // namespace handover::geometry

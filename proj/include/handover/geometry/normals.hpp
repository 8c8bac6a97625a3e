#pragma once

#include <Eigen/Eigenvalues>

#include <optional>
#include <vector>

#include "handover/geometry/spatial_grid.hpp"
#include "handover/geometry/summary.hpp"

namespace handover::geometry {

namespace detail {

// Orientation reference is ambiguous when the normal is this close to
// perpendicular with the outward direction (cosine).
inline constexpr double kAmbiguousCos = 0.1;

inline int orientation_sign(const Vec3& n, const Vec3& outward) {
  const double len = outward.norm();
  if (!(len > 0.0)) return 0;
  const double c = n.dot(outward) / len;
  if (c > kAmbiguousCos) return 1;
  if (c < -kAmbiguousCos) return -1;
  return 0;
}

}  // namespace detail

/// Per-point unit normals from local PCA over the k nearest neighbors.
///
/// Orientation points away from the object interior. The interior reference
/// is the dominant-axis line through the centroid when the cloud is
/// elongated (so thin tools orient across their width), then the centroid
/// itself, then the viewpoint; a normal still ambiguous after that gets a
/// positive largest component.
inline std::vector<Vec3> estimate_normals(std::span<const Vec3> points, std::size_t k,
                                          const Vec3& viewpoint = Vec3::Zero()) {
  std::vector<Vec3> normals(points.size(), Vec3::UnitZ());
  if (points.size() < 3) return normals;

  const Vec3 centroid = centroid_of(points);
  std::optional<Vec3> axis;
  try {
    axis = summarize(points).dominant_axis;
  } catch (const DegenerateGeometryError&) {
  }

  // Cell size from the bounding box so each cell holds a handful of points.
  Vec3 lo = points[0], hi = points[0];
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double diag = (hi - lo).norm();
  const double cell = std::max(diag / std::cbrt(static_cast<double>(points.size())), 1e-6);
  SpatialGrid grid(points, cell);

  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto nbrs = grid.nearest(points[i], k);
    Vec3 mean = Vec3::Zero();
    for (auto j : nbrs) mean += points[j];
    mean /= static_cast<double>(nbrs.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (auto j : nbrs) {
      const Vec3 d = points[j] - mean;
      cov.noalias() += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    Vec3 n = solver.eigenvectors().col(0).normalized();

    const Vec3& p = points[i];
    int sign = 0;
    if (axis) {
      const Vec3 rel = p - centroid;
      sign = detail::orientation_sign(n, rel - rel.dot(*axis) * *axis);
    }
    if (sign == 0) sign = detail::orientation_sign(n, p - centroid);
    if (sign == 0) sign = detail::orientation_sign(n, viewpoint - p);
    if (sign == 0) sign = canonical_axis_sign(n).dot(n) > 0.0 ? 1 : -1;
    normals[i] = sign > 0 ? n : Vec3(-n);
  }
  return normals;
}

}  // namespace handover::geometry

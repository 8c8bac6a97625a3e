#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>

#include "handover/geometry/types.hpp"

namespace handover::geometry {

/// Geometric descriptor handed to the reasoner for an object or a part.
struct GeomSummary {
  Vec3 centroid{Vec3::Zero()};
  Vec3 aabb_min{Vec3::Zero()};
  Vec3 aabb_max{Vec3::Zero()};
  Vec3 dominant_axis{Vec3::UnitX()};
  double dominant_length{0.0};
  std::size_t point_count{0};

  friend bool operator==(const GeomSummary&, const GeomSummary&) = default;
};

/// Relative gap below which the top two covariance eigenvalues count as tied.
inline constexpr double kDegenerateEigenGap = 1e-9;

/// Flips `axis` so its largest-magnitude component is positive; ties go to
/// the earliest coordinate.
inline Vec3 canonical_axis_sign(Vec3 axis) {
  int best = 0;
  const double mag = axis.cwiseAbs().maxCoeff();
  for (int i = 0; i < 3; ++i) {
    if (std::abs(axis[i]) >= mag - 1e-12) {
      best = i;
      break;
    }
  }
  if (axis[best] < 0.0) axis = -axis;
  return axis;
}

inline GeomSummary summarize(std::span<const Vec3> points) {
  if (points.size() < 3) {
    throw DegenerateGeometryError("summarize: need at least 3 points, got " +
                                  std::to_string(points.size()));
  }
  GeomSummary s;
  s.point_count = points.size();
  s.aabb_min = Vec3::Constant(std::numeric_limits<double>::infinity());
  s.aabb_max = Vec3::Constant(-std::numeric_limits<double>::infinity());
  Vec3 sum = Vec3::Zero();
  for (const auto& p : points) {
    if (!all_finite(p)) throw InputError("summarize: non-finite coordinate");
    sum += p;
    s.aabb_min = s.aabb_min.cwiseMin(p);
    s.aabb_max = s.aabb_max.cwiseMax(p);
  }
  const double n = static_cast<double>(points.size());
  s.centroid = sum / n;

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : points) {
    const Vec3 d = p - s.centroid;
    cov.noalias() += d * d.transpose();
  }
  cov /= n;

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw DegenerateGeometryError("summarize: eigendecomposition failed");
  }
  // Eigenvalues come sorted ascending.
  const double top = solver.eigenvalues()[2];
  const double second = solver.eigenvalues()[1];
  if (!(top > 0.0)) throw DegenerateGeometryError("summarize: all points coincide");
  if (top - second <= kDegenerateEigenGap * top) {
    throw DegenerateGeometryError("summarize: no unique dominant axis");
  }
  s.dominant_axis = canonical_axis_sign(solver.eigenvectors().col(2).normalized());

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& p : points) {
    const double t = p.dot(s.dominant_axis);
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  s.dominant_length = hi - lo;
  return s;
}

inline GeomSummary summarize(const PointCloud& cloud) { return summarize(cloud.points); }

inline std::optional<GeomSummary> try_summarize(std::span<const Vec3> points) {
  try {
    return summarize(points);
  } catch (const DegenerateGeometryError&) {
    return std::nullopt;
  }
}

inline std::optional<GeomSummary> try_summarize(const PointCloud& cloud) { return try_summarize(cloud.points); }

inline Vec3 centroid_of(std::span<const Vec3> points) {
  Vec3 sum = Vec3::Zero();
  for (const auto& p : points) sum += p;
  return points.empty() ? sum : Vec3(sum / static_cast<double>(points.size()));
}

}  // namespace handover::geometry

#pragma once

#include <numeric>
#include <vector>

#include "handover/geometry/spatial_grid.hpp"
#include "handover/geometry/types.hpp"

namespace handover::geometry {

struct Cluster {
  std::vector<std::size_t> member_indices;  // ascending
  bool is_noise{false};

  std::size_t size() const noexcept { return member_indices.size(); }
  friend bool operator==(const Cluster&, const Cluster&) = default;
};

/// Density-based clustering.
///
/// A point's neighborhood is every point within `eps` (inclusive), itself
/// included; a point is core when its neighborhood holds at least `min_pts`
/// points. Clusters are the connected components of core points, numbered by
/// their lowest core index. A non-core point joins the cluster of its
/// lowest-indexed core neighbor, otherwise it is noise. Noise, when present,
/// is returned as a final cluster flagged `is_noise`.
inline std::vector<Cluster> dbscan(std::span<const Vec3> points, double eps, std::size_t min_pts) {
  if (!(eps > 0.0)) throw InputError("dbscan: eps must be positive");
  if (min_pts < 1) throw InputError("dbscan: min_pts must be at least 1");
  const std::size_t n = points.size();
  if (n == 0) return {};

  SpatialGrid grid(points, eps);
  std::vector<char> core(n, 0);
  for (std::size_t i = 0; i < n; ++i) core[i] = grid.count_within(points[i], eps) >= min_pts;

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i]) continue;
    grid.for_each_within(points[i], eps, [&](std::size_t j) {
      if (j <= i || !core[j]) return;
      auto a = find(i);
      auto b = find(j);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    });
  }

  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> cluster_of_root(n, kUnset);
  std::vector<std::size_t> label(n, kUnset);
  std::size_t clusters = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i]) continue;
    auto r = find(i);
    if (cluster_of_root[r] == kUnset) cluster_of_root[r] = clusters++;
    label[i] = cluster_of_root[r];
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    std::size_t best = kUnset;
    grid.for_each_within(points[i], eps, [&](std::size_t j) {
      if (core[j] && j < best) best = j;
    });
    if (best != kUnset) label[i] = label[best];
  }

  std::vector<Cluster> out(clusters);
  Cluster noise{{}, true};
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] == kUnset) {
      noise.member_indices.push_back(i);
    } else {
      out[label[i]].member_indices.push_back(i);
    }
  }
  if (!noise.member_indices.empty()) out.push_back(std::move(noise));
  return out;
}

inline std::vector<Cluster> dbscan(const PointCloud& cloud, double eps, std::size_t min_pts) {
  return dbscan(std::span<const Vec3>(cloud.points), eps, min_pts);
}

}  // namespace handover::geometry

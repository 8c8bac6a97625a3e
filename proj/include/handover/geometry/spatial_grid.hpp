#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "handover/geometry/types.hpp"

namespace handover::geometry {

/// Uniform hash grid over a fixed point set, for exact radius and k-nearest
/// queries. Holds a view; the points must outlive the grid.
class SpatialGrid {
 public:
  SpatialGrid(std::span<const Vec3> points, double cell_size) : points_(points), cell_(cell_size) {
    if (!(cell_size > 0.0)) throw InputError("SpatialGrid: cell size must be positive");
    cells_.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) cells_[key(cell_of(points[i]))].push_back(i);
  }

  std::size_t size() const noexcept { return points_.size(); }

  /// Indices of all points q with |q - p| <= radius, ascending.
  std::vector<std::size_t> radius(const Vec3& p, double r) const {
    std::vector<std::size_t> out;
    for_each_within(p, r, [&](std::size_t i) { out.push_back(i); });
    std::sort(out.begin(), out.end());
    return out;
  }

  std::size_t count_within(const Vec3& p, double r) const {
    std::size_t n = 0;
    for_each_within(p, r, [&](std::size_t) { ++n; });
    return n;
  }

  template <typename Fn>
  void for_each_within(const Vec3& p, double r, Fn&& fn) const {
    const double r2 = r * r;
    const auto c = cell_of(p);
    const auto reach = static_cast<std::int64_t>(std::ceil(r / cell_));
    for (std::int64_t dx = -reach; dx <= reach; ++dx) {
      for (std::int64_t dy = -reach; dy <= reach; ++dy) {
        for (std::int64_t dz = -reach; dz <= reach; ++dz) {
          auto it = cells_.find(key({c[0] + dx, c[1] + dy, c[2] + dz}));
          if (it == cells_.end()) continue;
          for (auto i : it->second) {
            if ((points_[i] - p).squaredNorm() <= r2) fn(i);
          }
        }
      }
    }
  }

  /// The k nearest points to p (including p itself if it is in the set),
  /// nearest first; ties broken by index.
  std::vector<std::size_t> nearest(const Vec3& p, std::size_t k) const {
    k = std::min(k, points_.size());
    if (k == 0) return {};
    double r = cell_;
    std::vector<std::size_t> found;
    for (;;) {
      found = radius(p, r);
      if (found.size() >= k || found.size() == points_.size()) break;
      r *= 2.0;
    }
    auto closer = [&](std::size_t a, std::size_t b) {
      const double da = (points_[a] - p).squaredNorm();
      const double db = (points_[b] - p).squaredNorm();
      return da < db || (da == db && a < b);
    };
    std::partial_sort(found.begin(), found.begin() + static_cast<std::ptrdiff_t>(k), found.end(),
                      closer);
    found.resize(k);
    return found;
  }

 private:
  using Cell = std::array<std::int64_t, 3>;

  Cell cell_of(const Vec3& p) const {
    return {static_cast<std::int64_t>(std::floor(p.x() / cell_)),
            static_cast<std::int64_t>(std::floor(p.y() / cell_)),
            static_cast<std::int64_t>(std::floor(p.z() / cell_))};
  }
  static std::uint64_t key(const Cell& c) {
    // 21 bits per axis covers ±10^6 cells, far beyond any tabletop scene.
    auto pack = [](std::int64_t v) { return static_cast<std::uint64_t>(v + (1 << 20)) & 0x1FFFFF; };
    return pack(c[0]) | (pack(c[1]) << 21) | (pack(c[2]) << 42);
  }

  std::span<const Vec3> points_;
  double cell_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

}  // namespace handover::geometry

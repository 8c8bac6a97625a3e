#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "handover/errors.hpp"

namespace handover::geometry {

using Vec3 = Eigen::Vector3d;

/// Pinhole camera model. Pixel (u, v) has u along columns, v along rows.
struct CameraIntrinsics {
  double fx{0.0};
  double fy{0.0};
  double cx{0.0};
  double cy{0.0};
  int width{0};
  int height{0};

  void validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) throw InputError("intrinsics: focal lengths must be positive");
    if (width <= 0 || height <= 0) throw InputError("intrinsics: image size must be positive");
    if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
      throw InputError("intrinsics: principal point outside the image");
    }
  }

  friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;
};

/// Single-part binary slice of a label image. Row-major, one byte per pixel.
class Mask2D {
 public:
  Mask2D() = default;
  Mask2D(int width, int height)
      : width_(width), height_(height), bits_(checked_area(width, height), 0) {}
  Mask2D(int width, int height, std::vector<std::uint8_t> bits)
      : width_(width), height_(height), bits_(std::move(bits)) {
    if (bits_.size() != checked_area(width, height)) {
      throw InputError("mask: bitmap size does not match width x height");
    }
    for (auto& b : bits_) b = b ? 1 : 0;
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t area() const noexcept { return bits_.size(); }

  bool at(int u, int v) const { return bits_[index(u, v)] != 0; }
  void set(int u, int v, bool on = true) { bits_[index(u, v)] = on ? 1 : 0; }
  bool test(std::size_t pixel) const { return bits_[pixel] != 0; }
  void set_pixel(std::size_t pixel, bool on = true) { bits_[pixel] = on ? 1 : 0; }

  std::size_t count() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
  }
  bool empty() const noexcept { return count() == 0; }
  bool same_shape(const Mask2D& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }

  Mask2D& operator&=(const Mask2D& o) { return combine(o, [](auto a, auto b) { return a & b; }); }
  Mask2D& operator|=(const Mask2D& o) { return combine(o, [](auto a, auto b) { return a | b; }); }
  /// Removes every pixel of `o` from this mask.
  Mask2D& subtract(const Mask2D& o) {
    return combine(o, [](auto a, auto b) { return static_cast<std::uint8_t>(a & (b ^ 1)); });
  }

  friend Mask2D operator&(Mask2D a, const Mask2D& b) { return a &= b; }
  friend Mask2D operator|(Mask2D a, const Mask2D& b) { return a |= b; }
  friend bool operator==(const Mask2D&, const Mask2D&) = default;

 private:
  static std::size_t checked_area(int w, int h) {
    if (w < 0 || h < 0) throw InputError("mask: negative dimensions");
    return static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  }
  std::size_t index(int u, int v) const {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(u);
  }
  template <typename Op>
  Mask2D& combine(const Mask2D& o, Op op) {
    if (!same_shape(o)) throw InputError("mask: dimension mismatch");
    for (std::size_t i = 0; i < bits_.size(); ++i) {
      bits_[i] = static_cast<std::uint8_t>(op(bits_[i], o.bits_[i]));
    }
    return *this;
  }

  int width_{0};
  int height_{0};
  std::vector<std::uint8_t> bits_;
};

inline std::size_t intersection_count(const Mask2D& a, const Mask2D& b) {
  if (!a.same_shape(b)) throw InputError("mask: dimension mismatch");
  std::size_t n = 0;
  auto ab = a.bits();
  auto bb = b.bits();
  for (std::size_t i = 0; i < ab.size(); ++i) n += static_cast<std::size_t>(ab[i] & bb[i]);
  return n;
}

/// Depth image in meters; 0 marks an invalid reading.
struct DepthImage {
  int width{0};
  int height{0};
  std::vector<float> meters;

  float at(int u, int v) const {
    return meters[static_cast<std::size_t>(v) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(u)];
  }
};

/// Ordered 3D points (meters) with optional source-pixel indices (v * width + u).
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<std::uint32_t> pixels;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
  bool has_pixels() const noexcept { return !pixels.empty() && pixels.size() == points.size(); }

  void push_back(const Vec3& p) { points.push_back(p); }
  void push_back(const Vec3& p, std::uint32_t pixel) {
    points.push_back(p);
    pixels.push_back(pixel);
  }

  PointCloud subset(std::span<const std::size_t> indices) const {
    PointCloud out;
    out.points.reserve(indices.size());
    const bool px = has_pixels();
    if (px) out.pixels.reserve(indices.size());
    for (auto i : indices) {
      out.points.push_back(points[i]);
      if (px) out.pixels.push_back(pixels[i]);
    }
    return out;
  }

  friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

/// Inclusive pixel rectangle.
struct Region {
  int u_min{0};
  int v_min{0};
  int u_max{-1};
  int v_max{-1};

  int width() const noexcept { return u_max - u_min + 1; }
  int height() const noexcept { return v_max - v_min + 1; }
  friend bool operator==(const Region&, const Region&) = default;
};

inline bool all_finite(const Vec3& p) {
  return std::isfinite(p.x()) && std::isfinite(p.y()) && std::isfinite(p.z());
}

}  // namespace handover::geometry

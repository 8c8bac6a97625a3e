#pragma once

#include <algorithm>

#include "handover/geometry/types.hpp"

namespace handover::geometry {

/// |part ∩ object| / |part|.
inline double containment_ratio(const Mask2D& part, const Mask2D& object) {
  if (!part.same_shape(object)) throw InputError("containment_ratio: dimension mismatch");
  const auto n = part.count();
  if (n == 0) throw InputError("containment_ratio: empty part mask");
  return static_cast<double>(intersection_count(part, object)) / static_cast<double>(n);
}

/// |a ∩ b| / min(|a|, |b|); symmetric.
inline double mask_overlap(const Mask2D& a, const Mask2D& b) {
  if (!a.same_shape(b)) throw InputError("mask_overlap: dimension mismatch");
  const auto na = a.count();
  const auto nb = b.count();
  if (na == 0 || nb == 0) throw InputError("mask_overlap: empty mask");
  return static_cast<double>(intersection_count(a, b)) / static_cast<double>(std::min(na, nb));
}

/// Tight bounding box of the mask, dilated by `padding` and clipped to the image.
inline Region crop_to_mask(const Mask2D& object, int padding) {
  if (padding < 0) throw InputError("crop_to_mask: negative padding");
  Region box{object.width(), object.height(), -1, -1};
  for (int v = 0; v < object.height(); ++v) {
    for (int u = 0; u < object.width(); ++u) {
      if (!object.at(u, v)) continue;
      box.u_min = std::min(box.u_min, u);
      box.v_min = std::min(box.v_min, v);
      box.u_max = std::max(box.u_max, u);
      box.v_max = std::max(box.v_max, v);
    }
  }
  if (box.u_max < 0) throw InputError("crop_to_mask: empty object mask");
  box.u_min = std::max(0, box.u_min - padding);
  box.v_min = std::max(0, box.v_min - padding);
  box.u_max = std::min(object.width() - 1, box.u_max + padding);
  box.v_max = std::min(object.height() - 1, box.v_max + padding);
  return box;
}

/// Mask with exactly the given source pixels set.
inline Mask2D mask_from_pixels(int width, int height, std::span<const std::uint32_t> pixels) {
  Mask2D m(width, height);
  for (auto p : pixels) m.set_pixel(p);
  return m;
}

}  // namespace handover::geometry

#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "handover/dataset/taxonomy.hpp"
#include "handover/geometry/summary.hpp"
#include "handover/geometry/types.hpp"

namespace handover::partseg {

using geometry::GeomSummary;
using geometry::Mask2D;
using geometry::PointCloud;
using geometry::Vec3;

/// A candidate part mask from a segmentation backend.
struct PartHypothesis {
  std::string label;
  Mask2D mask;
  std::optional<double> score;

  friend bool operator==(const PartHypothesis&, const PartHypothesis&) = default;
};

struct PartsegConfig {
  double containment_tol{0.05};  // fraction of a mask allowed outside the object
  double overlap_thresh{0.5};
  double eps_floor{0.005};  // DBSCAN eps = max(eps_floor, eps_scale * dominant length)
  double eps_scale{0.02};
  std::size_t min_pts{10};
  double significance{0.05};  // unlabeled cluster share of object points
  int crop_padding{10};
};

struct Part {
  std::string label;  // taxonomy part, merged "a+b", or "new_part_<k>"
  Mask2D mask;
  std::vector<std::size_t> indices;  // into the object cloud, ascending
  PointCloud cloud;
  std::optional<GeomSummary> summary;

  friend bool operator==(const Part&, const Part&) = default;
};

struct SegmentationResult {
  std::string object_class;
  Mask2D object_mask;
  PointCloud object_cloud;
  GeomSummary object_summary;
  std::vector<Part> parts;
  double unassigned_fraction{1.0};
  std::vector<std::string> unidentified;  // expected parts nothing could be found for

  const Part* find(std::string_view label) const {
    for (const auto& p : parts) {
      if (p.label == label) return &p;
    }
    return nullptr;
  }
  /// The part whose label is `part` or a merged label containing it.
  const Part* find_covering(std::string_view part) const {
    for (const auto& p : parts) {
      if (dataset::label_covers(p.label, part)) return &p;
    }
    return nullptr;
  }
  /// Part index owning each object point, or -1.
  std::vector<int> owners() const {
    std::vector<int> own(object_cloud.size(), -1);
    for (std::size_t k = 0; k < parts.size(); ++k) {
      for (auto i : parts[k].indices) own[i] = static_cast<int>(k);
    }
    return own;
  }
  std::size_t assigned_count() const {
    std::size_t n = 0;
    for (const auto& p : parts) n += p.indices.size();
    return n;
  }

  friend bool operator==(const SegmentationResult&, const SegmentationResult&) = default;
};

/// Rebuilds part clouds, summaries and the unassigned fraction from indices.
inline void refresh(SegmentationResult& r) {
  for (auto& p : r.parts) {
    std::sort(p.indices.begin(), p.indices.end());
    p.cloud = r.object_cloud.subset(p.indices);
    p.summary = geometry::try_summarize(p.cloud);
  }
  const auto n = r.object_cloud.size();
  r.unassigned_fraction = n == 0 ? 0.0 : static_cast<double>(n - r.assigned_count()) / static_cast<double>(n);
}

/// Ordering key for labels: taxonomy position of the first component, with
/// unknown labels after every known one.
inline std::size_t label_rank(std::string_view object_class, std::string_view label) {
  const auto first = dataset::label_components(label).front();
  return dataset::taxonomy().part_index(object_class, first).value_or(1000);
}

inline nlohmann::ordered_json parts_snapshot(const SegmentationResult& r) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& p : r.parts) {
    arr.push_back({{"label", p.label}, {"mask_pixels", p.mask.count()}, {"points", p.indices.size()}});
  }
  return arr;
}

}  // namespace handover::partseg

#pragma once

// The refinement stages: mask refinement (containment, contradictions),
// fusion with depth, recovery of missing parts, and labeling of leftover
// regions.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "handover/geometry/dbscan.hpp"
#include "handover/geometry/mask_ops.hpp"
#include "handover/partseg/types.hpp"
#include "handover/reasoner/knowledge.hpp"
#include "handover/reasoner/ops.hpp"

namespace handover::partseg {

using ojson = nlohmann::ordered_json;

/// Optional event log filled by the stages; becomes part of the decision trace.
struct StageLog {
  ojson events = ojson::array();
  void add(ojson e) { events.push_back(std::move(e)); }
};

inline void log_event(StageLog* log, ojson e) {
  if (log) log->add(std::move(e));
}

inline std::vector<Vec3> points_in_mask(const PointCloud& cloud, const Mask2D& mask) {
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (mask.test(cloud.pixels[i])) out.push_back(cloud.points[i]);
  }
  return out;
}

inline bool is_new_part_label(std::string_view label) { return label.rfind("new_part_", 0) == 0; }

/// True if every component of `label` is a part of the class (or the label
/// names a part discovered earlier).
inline bool label_in_taxonomy(std::string_view object_class, std::string_view label) {
  if (is_new_part_label(label)) return true;
  for (const auto& c : dataset::label_components(label)) {
    if (!dataset::taxonomy().has_part(object_class, c)) return false;
  }
  return true;
}

/// Object geometry the stages hand to the reasoner.
struct ObjectContext {
  std::string object_class;
  const Mask2D* object_mask{nullptr};
  const PointCloud* object_cloud{nullptr};
  GeomSummary object_summary;
};

/// Keeps masks that stay inside the object (within tolerance), clips them,
/// merges duplicate labels and resolves contradicting overlaps.
inline std::vector<PartHypothesis> refine_masks(const ObjectContext& ctx, std::vector<PartHypothesis> hyps,
                                                reasoner::Session& session, const PartsegConfig& cfg,
                                                const reasoner::CompatibilityTable& compat, StageLog* log = nullptr) {
  const Mask2D& object = *ctx.object_mask;
  if (object.empty()) throw InputError("refine_masks: empty object mask");

  std::vector<PartHypothesis> kept;
  for (auto& h : hyps) {
    if (h.mask.empty()) continue;
    if (!label_in_taxonomy(ctx.object_class, h.label)) {
      log_event(log, {{"event", "discard"}, {"label", h.label}, {"reason", "label not in class taxonomy"}});
      continue;
    }
    const double ratio = geometry::containment_ratio(h.mask, object);
    if (ratio < 1.0 - cfg.containment_tol) {
      log_event(log, {{"event", "discard"}, {"label", h.label}, {"reason", "outside object mask"},
                      {"containment", reasoner::round4(ratio)}});
      continue;
    }
    if (ratio < 1.0) {
      h.mask &= object;
      log_event(log, {{"event", "clip"}, {"label", h.label}, {"containment", reasoner::round4(ratio)}});
    }
    kept.push_back(std::move(h));
  }

  std::vector<PartHypothesis> merged;
  for (auto& h : kept) {
    auto it = std::find_if(merged.begin(), merged.end(), [&](const PartHypothesis& m) { return m.label == h.label; });
    if (it == merged.end()) {
      merged.push_back(std::move(h));
      continue;
    }
    it->mask |= h.mask;
    if (h.score && (!it->score || *h.score > *it->score)) it->score = h.score;
    log_event(log, {{"event", "merge_duplicate"}, {"label", h.label}});
  }

  // Resolve until no incompatible pair overlaps above threshold. Every
  // resolution removes pixels, so this terminates.
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < merged.size(); ++i) {
      for (std::size_t j = i + 1; j < merged.size(); ++j) {
        auto& a = merged[i];
        auto& b = merged[j];
        if (a.mask.empty() || b.mask.empty()) continue;
        if (compat.compatible(ctx.object_class, a.label, b.label)) continue;
        const double ov = geometry::mask_overlap(a.mask, b.mask);
        if (ov < cfg.overlap_thresh) continue;
        const Mask2D shared = a.mask & b.mask;
        reasoner::ContradictionInput in;
        in.object_class = ctx.object_class;
        in.object = reasoner::describe(ctx.object_summary);
        in.label_a = a.label;
        in.shape_a = reasoner::describe(points_in_mask(*ctx.object_cloud, a.mask));
        in.label_b = b.label;
        in.shape_b = reasoner::describe(points_in_mask(*ctx.object_cloud, b.mask));
        in.overlap_pixels = shared.count();
        in.overlap = reasoner::describe(points_in_mask(*ctx.object_cloud, shared));
        const std::string winner = reasoner::resolve_contradiction(in, session);
        auto& loser = winner == a.label ? b : a;
        loser.mask.subtract(shared);
        log_event(log, {{"event", "contradiction"}, {"labels", {a.label, b.label}}, {"overlap", reasoner::round4(ov)},
                        {"winner", winner}, {"pixels_moved", shared.count()}});
        changed = true;
      }
    }
  }
  std::vector<PartHypothesis> out;
  for (auto& h : merged) {
    if (h.mask.empty()) {
      log_event(log, {{"event", "discard"}, {"label", h.label}, {"reason", "lost every pixel to a contradiction"}});
      continue;
    }
    out.push_back(std::move(h));
  }
  return out;
}

inline void sort_parts(SegmentationResult& r) {
  std::stable_sort(r.parts.begin(), r.parts.end(), [&](const Part& a, const Part& b) {
    return label_rank(r.object_class, a.label) < label_rank(r.object_class, b.label);
  });
}

/// Lifts masks to 3D: each object point goes to the highest-priority part
/// whose mask contains its pixel (taxonomy order, then input order).
inline SegmentationResult fuse(const ObjectContext& ctx, const std::vector<PartHypothesis>& hyps) {
  SegmentationResult r;
  r.object_class = ctx.object_class;
  r.object_mask = *ctx.object_mask;
  r.object_cloud = *ctx.object_cloud;
  r.object_summary = ctx.object_summary;
  for (const auto& h : hyps) r.parts.push_back({h.label, h.mask, {}, {}, {}});
  sort_parts(r);
  for (std::size_t i = 0; i < r.object_cloud.size(); ++i) {
    for (auto& p : r.parts) {
      if (p.mask.test(r.object_cloud.pixels[i])) {
        p.indices.push_back(i);
        break;
      }
    }
  }
  refresh(r);
  return r;
}

inline double cluster_eps(const SegmentationResult& r, const PartsegConfig& cfg) {
  return std::max(cfg.eps_floor, cfg.eps_scale * r.object_summary.dominant_length);
}

inline std::vector<std::size_t> unassigned_indices(const SegmentationResult& r) {
  const auto own = r.owners();
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < own.size(); ++i) {
    if (own[i] < 0) out.push_back(i);
  }
  return out;
}

/// Non-noise DBSCAN clusters of the unassigned points, as object indices.
inline std::vector<std::vector<std::size_t>> residual_clusters(const SegmentationResult& r, const PartsegConfig& cfg) {
  const auto residual = unassigned_indices(r);
  std::vector<Vec3> pts;
  pts.reserve(residual.size());
  for (auto i : residual) pts.push_back(r.object_cloud.points[i]);
  std::vector<std::vector<std::size_t>> out;
  for (const auto& c : geometry::dbscan(pts, cluster_eps(r, cfg), cfg.min_pts)) {
    if (c.is_noise) continue;
    std::vector<std::size_t> idx;
    for (auto m : c.member_indices) idx.push_back(residual[m]);
    out.push_back(std::move(idx));
  }
  return out;
}

/// Adds object points to the part labeled `label`, creating it if needed.
inline void add_points(SegmentationResult& r, const std::string& label, const std::vector<std::size_t>& idx) {
  auto it = std::find_if(r.parts.begin(), r.parts.end(), [&](const Part& p) { return p.label == label; });
  if (it == r.parts.end()) {
    r.parts.push_back({label, Mask2D(r.object_mask.width(), r.object_mask.height()), {}, {}, {}});
    it = r.parts.end() - 1;
  }
  for (auto i : idx) {
    it->indices.push_back(i);
    it->mask.set_pixel(r.object_cloud.pixels[i]);
  }
  sort_parts(r);
  refresh(r);
}

inline std::vector<Vec3> gather(const PointCloud& cloud, const std::vector<std::size_t>& idx) {
  std::vector<Vec3> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(cloud.points[i]);
  return out;
}

/// Normalized position of `p` along the object's dominant axis, 0..1.
inline double axis_position(const SegmentationResult& r, const Vec3& p) {
  const Vec3& a = r.object_summary.dominant_axis;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& q : r.object_cloud.points) {
    lo = std::min(lo, q.dot(a));
    hi = std::max(hi, q.dot(a));
  }
  return hi > lo ? std::clamp((p.dot(a) - lo) / (hi - lo), 0.0, 1.0) : 0.5;
}

/// True if the points, projected on `axis`, leave no gap of `eps` or more.
inline bool axis_contiguous(const std::vector<Vec3>& pts, const Vec3& axis, double eps) {
  std::vector<double> t;
  t.reserve(pts.size());
  for (const auto& p : pts) t.push_back(p.dot(axis));
  std::sort(t.begin(), t.end());
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t[i] - t[i - 1] >= eps) return false;
  }
  return true;
}

inline bool taxonomy_adjacent(std::string_view object_class, const std::vector<std::string>& parts) {
  std::vector<std::size_t> idx;
  for (const auto& p : parts) {
    auto i = dataset::taxonomy().part_index(object_class, p);
    if (!i) return false;
    idx.push_back(*i);
  }
  std::sort(idx.begin(), idx.end());
  for (std::size_t i = 1; i < idx.size(); ++i) {
    if (idx[i] != idx[i - 1] + 1) return false;
  }
  return true;
}

/// Finds expected parts that no label covers and tries to recover them from
/// the unlabeled points.
inline void detect_missing(SegmentationResult& r, const std::vector<std::string>& expected, reasoner::Session& session,
                           const PartsegConfig& cfg, StageLog* log = nullptr) {
  if (r.object_cloud.empty()) throw InputError("detect_missing: empty object cloud");
  std::vector<std::string> missing;
  for (const auto& e : expected) {
    if (!r.find_covering(e) && std::find(missing.begin(), missing.end(), e) == missing.end()) missing.push_back(e);
  }
  std::stable_sort(missing.begin(), missing.end(), [&](const std::string& a, const std::string& b) {
    return label_rank(r.object_class, a) < label_rank(r.object_class, b);
  });
  r.unidentified.clear();
  if (missing.empty()) return;

  const auto clusters = residual_clusters(r, cfg);
  const double eps = cluster_eps(r, cfg);
  if (clusters.empty()) {
    r.unidentified = missing;
    log_event(log, {{"event", "unidentified"}, {"parts", missing}});
    return;
  }

  std::vector<std::pair<std::string, const std::vector<std::size_t>*>> labeled;
  if (clusters.size() == 1 && missing.size() >= 2 && taxonomy_adjacent(r.object_class, missing) &&
      axis_contiguous(gather(r.object_cloud, clusters[0]), r.object_summary.dominant_axis, eps)) {
    labeled.emplace_back(dataset::merged_label(r.object_class, missing), &clusters[0]);
    log_event(log, {{"event", "merged_label"}, {"label", labeled.back().first}, {"points", clusters[0].size()}});
  } else {
    reasoner::AssignmentInput in;
    in.object_class = r.object_class;
    in.object = reasoner::describe(r.object_summary);
    for (const auto& p : r.parts) {
      if (p.cloud.empty()) continue;
      in.known_parts.push_back({p.label, -1, reasoner::describe(p.cloud.points),
                                axis_position(r, geometry::centroid_of(p.cloud.points))});
    }
    in.missing_parts = missing;
    for (std::size_t k = 0; k < clusters.size(); ++k) {
      const auto pts = gather(r.object_cloud, clusters[k]);
      in.clusters.push_back({"", static_cast<int>(k), reasoner::describe(pts), axis_position(r, geometry::centroid_of(pts))});
    }
    const auto assignment = reasoner::assign_cluster_labels(in, session);
    for (const auto& [id, label] : assignment.labels) {
      labeled.emplace_back(label, &clusters[static_cast<std::size_t>(id)]);
      log_event(log, {{"event", "assign_cluster"}, {"cluster_id", id}, {"label", label},
                      {"points", clusters[static_cast<std::size_t>(id)].size()}});
    }
  }
  for (const auto& [label, idx] : labeled) add_points(r, label, *idx);

  for (const auto& m : missing) {
    if (!r.find_covering(m)) r.unidentified.push_back(m);
  }
  if (!r.unidentified.empty()) log_event(log, {{"event", "unidentified"}, {"parts", r.unidentified}});
}

inline double min_distance(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : a) {
    for (const auto& q : b) best = std::min(best, (p - q).squaredNorm());
  }
  return std::sqrt(best);
}

/// Gives every significant unlabeled cluster a label: an existing part it
/// extends, or a new part.
inline void label_unlabeled(SegmentationResult& r, reasoner::Session& session, const PartsegConfig& cfg,
                            StageLog* log = nullptr) {
  if (r.object_cloud.empty()) return;
  const auto clusters = residual_clusters(r, cfg);
  const double min_size = cfg.significance * static_cast<double>(r.object_cloud.size());
  for (const auto& cluster : clusters) {
    if (static_cast<double>(cluster.size()) < min_size) continue;
    const auto pts = gather(r.object_cloud, cluster);
    reasoner::UnlabeledInput in;
    in.object_class = r.object_class;
    in.object = reasoner::describe(r.object_summary);
    in.cluster = reasoner::describe(pts);
    in.adjacency_tolerance = cluster_eps(r, cfg);
    int new_parts = 0;
    for (const auto& p : r.parts) {
      new_parts += is_new_part_label(p.label) ? 1 : 0;
      if (p.cloud.empty()) continue;
      reasoner::NeighborPart n;
      n.label = p.label;
      n.shape = reasoner::describe(p.cloud.points);
      n.min_distance = min_distance(pts, p.cloud.points);
      const Vec3 c = *in.cluster.centroid;
      if (n.shape.summary) {
        const Vec3 d = c - n.shape.summary->centroid;
        const Vec3& a = n.shape.summary->dominant_axis;
        n.axis_offset = (d - d.dot(a) * a).norm();
      } else {
        n.axis_offset = (c - *n.shape.centroid).norm();
      }
      in.parts.push_back(std::move(n));
    }
    in.new_label = "new_part_" + std::to_string(new_parts + 1);
    const std::string label = reasoner::classify_unlabeled(in, session);
    log_event(log, {{"event", "unlabeled_region"}, {"points", cluster.size()}, {"label", label},
                    {"new_part", r.find(label) == nullptr}});
    add_points(r, label, cluster);
  }
}

}  // namespace handover::partseg

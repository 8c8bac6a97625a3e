#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "handover/grasp/completion.hpp"
#include "handover/grasp/types.hpp"
#include "handover/partseg/types.hpp"
#include "handover/random.hpp"
#include "handover/reasoner/ops.hpp"

namespace handover::grasp {

inline constexpr std::string_view kOffObject = "off-object";
inline constexpr std::string_view kUnlabeled = "unlabeled";
inline constexpr double kContactRadius = 0.005;

/// Points with a part index each (-1 = unlabeled) into `names`.
struct LabeledCloud {
  std::vector<Vec3> points;
  std::vector<int> labels;
  std::vector<std::string> names;

  /// Points whose label is `part` or a merged label containing it.
  std::vector<Vec3> part_points(std::string_view part) const {
    std::vector<Vec3> out;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (labels[i] >= 0 && dataset::label_covers(names[static_cast<std::size_t>(labels[i])], part)) {
        out.push_back(points[i]);
      }
    }
    return out;
  }

  std::optional<Vec3> centroid(int label) const {
    Vec3 s = Vec3::Zero();
    std::size_t n = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (labels[i] == label) {
        s += points[i];
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return s / static_cast<double>(n);
  }
};

/// The observed object cloud labeled by segmentation ownership.
inline LabeledCloud labeled_cloud(const partseg::SegmentationResult& seg) {
  LabeledCloud lc;
  lc.points = seg.object_cloud.points;
  lc.labels = seg.owners();
  for (const auto& p : seg.parts) lc.names.push_back(p.label);
  return lc;
}

/// Labeled cloud whose per-point labels come from pixel masks (first match
/// wins), e.g. ground-truth annotations.
inline LabeledCloud labeled_cloud(const PointCloud& cloud, const std::vector<std::pair<std::string, const Mask2D*>>& masks) {
  LabeledCloud lc;
  lc.points = cloud.points;
  lc.labels.assign(cloud.size(), -1);
  for (const auto& [name, m] : masks) lc.names.push_back(name);
  if (!cloud.has_pixels()) return lc;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (std::size_t k = 0; k < masks.size(); ++k) {
      if (masks[k].second->test(cloud.pixels[i])) {
        lc.labels[i] = static_cast<int>(k);
        break;
      }
    }
  }
  return lc;
}

/// Carries observed labels onto a completed cloud.
inline LabeledCloud complete_labels(const LabeledCloud& observed, const CompletedCloud& completed) {
  LabeledCloud lc;
  lc.points = completed.points;
  lc.names = observed.names;
  lc.labels.reserve(completed.points.size());
  for (auto s : completed.source) lc.labels.push_back(observed.labels.at(s));
  return lc;
}

namespace detail {

inline std::string vote(const LabeledCloud& lc, std::span<const Vec3> probes, const Vec3& tie_ref, double radius) {
  std::map<int, std::size_t> votes;
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < lc.points.size(); ++i) {
    for (const auto& p : probes) {
      if ((lc.points[i] - p).squaredNorm() <= r2) {
        ++votes[lc.labels[i]];
        break;
      }
    }
  }
  if (votes.empty()) return std::string(kOffObject);
  std::size_t top = 0;
  for (const auto& [label, n] : votes) {
    if (label >= 0) top = std::max(top, n);
  }
  if (top == 0) return std::string(kUnlabeled);
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& [label, n] : votes) {
    if (label < 0 || n != top) continue;
    const auto c = lc.centroid(label);
    const double d = c ? (*c - tie_ref).norm() : std::numeric_limits<double>::infinity();
    if (best < 0 || d < best_d) {
      best = label;
      best_d = d;
    }
  }
  return lc.names[static_cast<std::size_t>(best)];
}

}  // namespace detail

/// Part holding most labeled points within 5 mm of either contact; a tie
/// goes to the part whose centroid is nearer the grasp center.
inline std::string grasp_part(const GraspCandidate& g, const LabeledCloud& lc, double radius = kContactRadius) {
  return detail::vote(lc, g.contacts, g.translation, radius);
}

inline std::string contact_part(const Vec3& contact, const LabeledCloud& lc, double radius = kContactRadius) {
  return detail::vote(lc, std::span<const Vec3>(&contact, 1), contact, radius);
}

inline std::string grasp_part(const GraspCandidate& g, const partseg::SegmentationResult& seg) {
  if (seg.object_cloud.empty()) throw InputError("grasp_part: empty segmentation");
  return grasp_part(g, labeled_cloud(seg));
}

/// Smallest distance from either contact to `points` (infinity if empty).
inline double clearance(const GraspCandidate& g, std::span<const Vec3> points) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : points) {
    best = std::min({best, (p - g.contacts[0]).squaredNorm(), (p - g.contacts[1]).squaredNorm()});
  }
  return std::sqrt(best);
}

struct SelectionContext {
  std::string object_class;
  std::string task_text;
  std::vector<GraspCandidate> candidates;
  geometry::GeomSummary object_summary;
  std::vector<std::pair<std::string, std::optional<geometry::GeomSummary>>> parts;
  std::optional<std::string> human_grasp_part;
  bool include_geometry{true};
  bool include_human_part{true};
  double contact_tolerance{0.005};
};

inline SelectionContext make_context(const partseg::SegmentationResult& seg, std::string task_text,
                                     std::vector<GraspCandidate> candidates, std::optional<std::string> human_part) {
  SelectionContext ctx;
  ctx.object_class = seg.object_class;
  ctx.task_text = std::move(task_text);
  ctx.candidates = std::move(candidates);
  ctx.object_summary = seg.object_summary;
  for (const auto& p : seg.parts) ctx.parts.emplace_back(p.label, p.summary);
  ctx.human_grasp_part = std::move(human_part);
  return ctx;
}

/// The grasp-choice query input for `ctx`, with contact parts and clearance
/// measured on `cloud`.
inline reasoner::GraspChoiceInput choice_input(const SelectionContext& ctx, const LabeledCloud& cloud) {
  reasoner::GraspChoiceInput in;
  in.object_class = ctx.object_class;
  in.task_text = ctx.task_text;
  in.object = reasoner::describe(ctx.object_summary);
  for (const auto& [label, s] : ctx.parts) {
    reasoner::ShapeInfo info;
    if (s) info = reasoner::describe(*s);
    in.parts.emplace_back(label, info);
  }
  in.include_geometry = ctx.include_geometry;
  in.contact_tolerance = ctx.contact_tolerance;
  if (ctx.include_human_part) in.human_part = ctx.human_grasp_part;
  std::vector<Vec3> human_pts;
  if (in.human_part) human_pts = cloud.part_points(*in.human_part);
  for (const auto& g : ctx.candidates) {
    reasoner::CandidateView v;
    v.translation = g.translation;
    v.width = g.width;
    v.approach = g.approach;
    v.contacts = g.contacts;
    v.contact_parts = {contact_part(g.contacts[0], cloud), contact_part(g.contacts[1], cloud)};
    if (!human_pts.empty()) v.clearance = clearance(g, human_pts);
    in.candidates.push_back(std::move(v));
  }
  return in;
}

/// Index of the candidate the reasoner picks.
inline std::size_t select(const SelectionContext& ctx, const LabeledCloud& cloud, reasoner::Session& session) {
  if (ctx.candidates.empty()) throw InputError("select: no candidates");
  return reasoner::choose_grasp(choice_input(ctx, cloud), session);
}

inline std::size_t select(const SelectionContext& ctx, const partseg::SegmentationResult& seg,
                          reasoner::Session& session) {
  return select(ctx, labeled_cloud(seg), session);
}

/// Rerank by clearance from the human part: the candidate whose nearer
/// contact is farthest from it. When every candidate touches the part
/// (clearance within `contact_tolerance`), the one farthest from the part
/// centroid, or a random one when `random_tie` is given.
inline std::size_t heuristic_select(const std::vector<GraspCandidate>& candidates, std::span<const Vec3> human_points,
                                    double contact_tolerance = 0.005, Rng* random_tie = nullptr) {
  if (candidates.empty()) throw InputError("heuristic_select: no candidates");
  if (human_points.empty()) throw InputError("heuristic_select: empty human part cloud");
  std::size_t best = 0;
  double best_c = -1.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double c = clearance(candidates[i], human_points);
    if (c > best_c) {
      best_c = c;
      best = i;
    }
  }
  if (best_c > contact_tolerance) return best;
  if (random_tie) return random_tie->index(candidates.size());
  const Vec3 centroid = geometry::centroid_of(human_points);
  best = 0;
  double best_d = -1.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double d = (candidates[i].translation - centroid).norm();
    if (d > best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

}  // namespace handover::grasp

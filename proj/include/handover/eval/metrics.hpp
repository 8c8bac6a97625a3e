#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "handover/dataset/loader.hpp"
#include "handover/dataset/tasks.hpp"
#include "handover/grasp/select.hpp"
#include "handover/reasoner/ops.hpp"

namespace handover::eval {

using geometry::Mask2D;

namespace detail {
inline void check_shape(const Mask2D& a, const Mask2D& b) {
  if (!a.same_shape(b)) throw InputError("mask metrics: dimension mismatch");
}
}  // namespace detail

/// Intersection over union; two empty masks score 1.
inline double iou(const Mask2D& pred, const Mask2D& gt) {
  detail::check_shape(pred, gt);
  const auto inter = geometry::intersection_count(pred, gt);
  const auto uni = pred.count() + gt.count() - inter;
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

/// Dice / F1 over pixels; two empty masks score 1.
inline double f1(const Mask2D& pred, const Mask2D& gt) {
  detail::check_shape(pred, gt);
  const auto inter = geometry::intersection_count(pred, gt);
  const auto total = pred.count() + gt.count();
  return total == 0 ? 1.0 : 2.0 * static_cast<double>(inter) / static_cast<double>(total);
}

struct LabeledMask {
  std::string label;
  Mask2D mask;
};

struct PartScore {
  std::string part;
  std::string matched_label;  // empty when nothing carried the part's label
  double iou{0.0};
  double f1{0.0};
  bool detected{false};
};

struct SegMetrics {
  double detection_rate{0.0};  // percent
  double f1{0.0};
  double iou{0.0};  // percent
  std::vector<PartScore> parts;
};

/// Scores predictions against gt parts. A prediction counts for every gt
/// part its label names; a merged label is compared with the union of its
/// components' gt masks. Several predictions for one part: the best IoU.
inline SegMetrics score_parts(const std::vector<LabeledMask>& predicted, const std::vector<dataset::NamedMask>& gt,
                              double det_iou_thresh = 0.5) {
  if (gt.empty()) throw InputError("segmentation metrics need at least one gt part");
  SegMetrics m;
  for (const auto& g : gt) {
    PartScore s;
    s.part = g.name;
    for (const auto& p : predicted) {
      if (!dataset::label_covers(p.label, g.name)) continue;
      Mask2D target(g.mask.width(), g.mask.height());
      for (const auto& other : gt) {
        if (dataset::label_covers(p.label, other.name)) target |= other.mask;
      }
      const double i = iou(p.mask, target);
      if (s.matched_label.empty() || i > s.iou) {
        s.matched_label = p.label;
        s.iou = i;
        s.f1 = f1(p.mask, target);
      }
    }
    s.detected = !s.matched_label.empty() && s.iou >= det_iou_thresh;
    m.parts.push_back(std::move(s));
  }
  double det = 0.0;
  for (const auto& s : m.parts) {
    det += s.detected ? 1.0 : 0.0;
    m.f1 += s.f1;
    m.iou += s.iou;
  }
  const double n = static_cast<double>(m.parts.size());
  m.detection_rate = 100.0 * det / n;
  m.f1 /= n;
  m.iou = 100.0 * m.iou / n;
  return m;
}

inline std::vector<LabeledMask> predicted_masks(const partseg::SegmentationResult& r) {
  std::vector<LabeledMask> out;
  for (const auto& p : r.parts) out.push_back({p.label, p.mask});
  return out;
}

/// Raw proposals as a baseline prediction: one mask per label (union of its
/// proposals), labels outside the class taxonomy dropped.
inline std::vector<LabeledMask> baseline_masks(const std::string& object_class,
                                               const std::vector<partseg::PartHypothesis>& proposals) {
  std::vector<LabeledMask> out;
  for (const auto& h : proposals) {
    if (!dataset::taxonomy().has_part(object_class, h.label)) continue;
    auto it = std::find_if(out.begin(), out.end(), [&](const LabeledMask& m) { return m.label == h.label; });
    if (it == out.end()) {
      out.push_back({h.label, h.mask});
    } else {
      it->mask |= h.mask;
    }
  }
  return out;
}

inline SegMetrics segmentation_metrics(const partseg::SegmentationResult& r, const std::vector<dataset::NamedMask>& gt,
                                       double det_iou_thresh = 0.5) {
  return score_parts(predicted_masks(r), gt, det_iou_thresh);
}

inline double detection_rate(const partseg::SegmentationResult& r, const std::vector<dataset::NamedMask>& gt,
                             double det_iou_thresh = 0.5) {
  return segmentation_metrics(r, gt, det_iou_thresh).detection_rate;
}

/// A grasp does not interfere when both contacts keep at least `margin`
/// from the human part.
inline bool grasp_success(const grasp::GraspCandidate& g, std::span<const geometry::Vec3> human_part, double margin = 0.01) {
  if (human_part.empty()) throw InputError("grasp_success: empty human part cloud");
  return grasp::clearance(g, human_part) >= margin;
}

struct HrAccuracy {
  double human{0.0};  // percent
  double robot{0.0};
  std::size_t count{0};
};

inline HrAccuracy hr_accuracy(const std::vector<reasoner::TaskPlan>& plans,
                              const std::vector<dataset::ReferenceParts>& truth) {
  if (plans.empty()) throw InputError("hr_accuracy: no predictions");
  if (plans.size() != truth.size()) throw InputError("hr_accuracy: every prediction needs ground truth");
  HrAccuracy a;
  a.count = plans.size();
  for (std::size_t i = 0; i < plans.size(); ++i) {
    if (plans[i].human_grasp_part == truth[i].human_part) a.human += 1.0;
    if (plans[i].robot_grasp_region.part.value_or("") == truth[i].robot_part) a.robot += 1.0;
  }
  a.human = 100.0 * a.human / static_cast<double>(a.count);
  a.robot = 100.0 * a.robot / static_cast<double>(a.count);
  return a;
}

}  // namespace handover::eval

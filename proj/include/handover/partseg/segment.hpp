#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "handover/dataset/loader.hpp"
#include "handover/geometry/mask_ops.hpp"
#include "handover/geometry/unproject.hpp"
#include "handover/partseg/backend.hpp"
#include "handover/partseg/stages.hpp"

namespace handover::partseg {

struct SegmentInputs {
  std::string object_class;
  std::filesystem::path rgb_path;
  std::optional<std::filesystem::path> proposals_path;
  geometry::DepthImage depth;
  geometry::CameraIntrinsics intrinsics;
  Mask2D object_mask;

  static SegmentInputs from_entry(const dataset::DatasetEntry& e) {
    return {e.object_class, e.rgb_path, e.proposals_path, e.load_depth(), e.intrinsics, e.object_mask};
  }
};

/// Intermediate products kept for evaluation and the decision trace.
struct SegmentationTrace {
  geometry::Region crop;
  std::vector<PartHypothesis> proposals;  // raw backend output
  std::vector<PartHypothesis> refined;
  ojson stages = ojson::array();  // per-stage events and part snapshots
};

inline void record_stage(SegmentationTrace* trace, const std::string& name, const SegmentationResult& r,
                         StageLog& log) {
  if (!trace) return;
  ojson s;
  s["stage"] = name;
  s["events"] = std::move(log.events);
  s["parts"] = parts_snapshot(r);
  s["unassigned_fraction"] = reasoner::round4(r.unassigned_fraction);
  if (!r.unidentified.empty()) s["unidentified"] = r.unidentified;
  trace->stages.push_back(std::move(s));
  log.events = ojson::array();
}

/// Crop, propose, refine, fuse to 3D, recover missing parts, label leftovers.
/// Errors carry the name of the stage they came from.
inline SegmentationResult segment(const SegmentInputs& in, const std::vector<std::string>& expected_parts,
                                  SegmentationBackend& backend, reasoner::Session& session,
                                  const PartsegConfig& cfg = {},
                                  const reasoner::CompatibilityTable& compat = reasoner::default_compatibility(),
                                  SegmentationTrace* trace = nullptr) {
  PointCloud object_cloud;
  GeomSummary object_summary;
  geometry::Region crop;
  with_stage("load", [&] {
    if (!in.object_mask.same_shape(Mask2D(in.intrinsics.width, in.intrinsics.height))) {
      throw InputError("object mask does not match the image size");
    }
    if (in.object_mask.empty()) throw InputError("empty object mask");
    object_cloud = geometry::unproject(in.depth, in.intrinsics, in.object_mask);
    object_summary = geometry::summarize(object_cloud);
    crop = geometry::crop_to_mask(in.object_mask, cfg.crop_padding);
  });
  const ObjectContext ctx{in.object_class, &in.object_mask, &object_cloud, object_summary};

  BackendRequest req{in.rgb_path, crop, in.intrinsics.width, in.intrinsics.height, in.proposals_path};
  auto proposals = with_stage("propose", [&] { return backend.propose(req); });
  if (trace) {
    trace->crop = crop;
    trace->proposals = proposals;
  }

  StageLog log;
  auto refined = with_stage("refine", [&] { return refine_masks(ctx, proposals, session, cfg, compat, &log); });
  if (trace) trace->refined = refined;
  SegmentationResult r = with_stage("fuse", [&] { return fuse(ctx, refined); });
  record_stage(trace, "refine", r, log);

  with_stage("detect_missing", [&] { detect_missing(r, expected_parts, session, cfg, &log); });
  record_stage(trace, "detect_missing", r, log);

  with_stage("label_unlabeled", [&] { label_unlabeled(r, session, cfg, &log); });
  record_stage(trace, "label_unlabeled", r, log);
  return r;
}

/// Runs refine, detect_missing and label_unlabeled again on a finished
/// result, treating its parts as the proposals.
inline SegmentationResult rerun_stages(const SegmentationResult& prev, const std::vector<std::string>& expected_parts,
                                       reasoner::Session& session, const PartsegConfig& cfg = {},
                                       const reasoner::CompatibilityTable& compat = reasoner::default_compatibility()) {
  const ObjectContext ctx{prev.object_class, &prev.object_mask, &prev.object_cloud, prev.object_summary};
  std::vector<PartHypothesis> hyps;
  for (const auto& p : prev.parts) hyps.push_back({p.label, p.mask, std::nullopt});
  auto refined = refine_masks(ctx, hyps, session, cfg, compat);
  SegmentationResult r = fuse(ctx, refined);
  detect_missing(r, expected_parts, session, cfg);
  label_unlabeled(r, session, cfg);
  return r;
}

}  // namespace handover::partseg

#pragma once

// End-to-end run for one observation and one task: task reasoning, part
// segmentation, grasp generation with regeneration, selection and the
// handover pose. Every step lands in a JSON decision trace.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "handover/config.hpp"
#include "handover/dataset/loader.hpp"
#include "handover/grasp.hpp"
#include "handover/partseg.hpp"
#include "handover/reasoner.hpp"

namespace handover::pipeline {

using ojson = nlohmann::ordered_json;

enum class Ablation { kNone, kNoGeometry, kNoHumanPart };

inline std::string_view to_string(Ablation a) {
  switch (a) {
    case Ablation::kNone: return "none";
    case Ablation::kNoGeometry: return "nG";
    case Ablation::kNoHumanPart: return "nH";
  }
  return "none";
}

inline Ablation ablation_from_string(std::string_view s) {
  if (s == "none" || s.empty()) return Ablation::kNone;
  if (s == "nG") return Ablation::kNoGeometry;
  if (s == "nH") return Ablation::kNoHumanPart;
  throw InputError("unknown ablation '" + std::string(s) + "' (expected none, nG or nH)");
}

enum class Method { kOurs, kHeuristic, kPlannerFirst };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::kOurs: return "ours";
    case Method::kHeuristic: return "heuristic";
    case Method::kPlannerFirst: return "planner-first";
  }
  return "ours";
}

inline Method method_from_string(std::string_view s) {
  if (s == "ours") return Method::kOurs;
  if (s == "heuristic") return Method::kHeuristic;
  if (s == "planner-first") return Method::kPlannerFirst;
  throw InputError("unknown method '" + std::string(s) + "'");
}

/// Generation stream for one observation; the same for every task on it.
inline std::uint64_t scene_seed(const PipelineConfig& cfg, const dataset::DatasetEntry& e) {
  std::uint64_t key = 0;
  for (char c : fnv1a_hex(e.key())) key = key * 31 + static_cast<unsigned char>(c);
  return mix_seed(cfg.seed, key);
}

/// Observation segmented and closed into a solid, with labels on every point.
struct PreparedScene {
  partseg::SegmentationResult segmentation;
  partseg::SegmentationTrace seg_trace;
  grasp::CompletedCloud completed;
  grasp::LabeledCloud labels;  // predicted parts on the completed cloud
};

inline PreparedScene prepare_scene(const dataset::DatasetEntry& entry, const std::vector<std::string>& expected_parts,
                                   partseg::SegmentationBackend& backend, reasoner::Session& session,
                                   const PipelineConfig& cfg) {
  PreparedScene s;
  const auto in = partseg::SegmentInputs::from_entry(entry);
  s.segmentation = partseg::segment(in, expected_parts, backend, session, cfg.partseg,
                                    reasoner::default_compatibility(), &s.seg_trace);
  s.completed = grasp::complete_tabletop(s.segmentation.object_cloud, in.depth, in.object_mask, entry.intrinsics);
  s.labels = grasp::complete_labels(grasp::labeled_cloud(s.segmentation), s.completed);
  return s;
}

struct GraspRound {
  int round{0};
  std::uint64_t seed{0};
  std::size_t candidate_count{0};
  std::vector<std::size_t> subset;  // indices into that round's candidates
  double spread{0.0};               // largest pairwise distance in the subset
  bool passed{false};
};

struct GraspProposal {
  std::vector<grasp::GraspCandidate> candidates;  // last round
  std::vector<grasp::GraspCandidate> subset;
  std::vector<GraspRound> rounds;
  double threshold{0.0};
  bool passed{false};
};

/// Candidates for a round, given that round's seed.
using CandidateSource = std::function<std::vector<grasp::GraspCandidate>(std::uint64_t seed)>;

/// One generation plus up to `cfg.regenerations` more, each reseeded, until
/// the FPS subset passes the diversity gate.
inline GraspProposal propose_grasps(const CandidateSource& source, double dominant_length, std::uint64_t seed,
                                    const PipelineConfig& cfg) {
  GraspProposal p;
  p.threshold = dominant_length / 3.0;
  for (int r = 0; r <= cfg.regenerations; ++r) {
    GraspRound round;
    round.round = r;
    round.seed = mix_seed(seed, static_cast<std::uint64_t>(r));
    p.candidates = source(round.seed);
    p.subset.clear();
    round.candidate_count = p.candidates.size();
    if (!p.candidates.empty()) {
      round.subset = grasp::fps_indices(p.candidates, cfg.fps_k, round.seed);
      for (auto i : round.subset) p.subset.push_back(p.candidates[i]);
      for (std::size_t a = 0; a < p.subset.size(); ++a) {
        for (std::size_t b = a + 1; b < p.subset.size(); ++b) {
          round.spread = std::max(round.spread, (p.subset[a].translation - p.subset[b].translation).norm());
        }
      }
      round.passed = grasp::diversity_gate(p.subset, dominant_length);
    }
    p.rounds.push_back(round);
    if (round.passed) {
      p.passed = true;
      break;
    }
  }
  return p;
}

inline CandidateSource generator_source(const std::vector<geometry::Vec3>& cloud, const PipelineConfig& cfg) {
  return [&cloud, &cfg](std::uint64_t seed) {
    return grasp::generate_grasps(std::span<const geometry::Vec3>(cloud), cfg.gripper, seed, cfg.candidate_count);
  };
}

/// An external planner's output: every round reads the file again.
inline CandidateSource file_source(std::filesystem::path file) {
  return [file = std::move(file)](std::uint64_t) { return grasp::load_grasps(file); };
}

inline ojson rounds_json(const GraspProposal& p) {
  ojson arr = ojson::array();
  for (const auto& r : p.rounds) {
    arr.push_back({{"round", r.round},
                   {"seed", r.seed},
                   {"candidates", r.candidate_count},
                   {"subset", r.subset},
                   {"max_pair_distance", reasoner::round4(r.spread)},
                   {"threshold", reasoner::round4(p.threshold)},
                   {"diversity_gate", r.passed ? "pass" : "fail"}});
  }
  return arr;
}

struct SelectionResult {
  std::size_t index{0};  // into the subset
  std::string note;
};

/// Picks from `subset` with the given method. The heuristic and the
/// reasoner measure the human part on `labels`.
inline SelectionResult choose(Method method, Ablation ablation, const partseg::SegmentationResult& seg,
                              const grasp::LabeledCloud& labels, const std::string& task_text,
                              const std::optional<std::string>& human_part, const GraspProposal& proposal,
                              reasoner::Session& session, const PipelineConfig& cfg) {
  SelectionResult out;
  switch (method) {
    case Method::kPlannerFirst: {
      // The planner's own top grasp, before any downselection.
      const auto& first = proposal.candidates.front();
      for (std::size_t i = 0; i < proposal.subset.size(); ++i) {
        if (proposal.subset[i] == first) return {i, ""};
      }
      return {proposal.subset.size(), "planner's first grasp"};
    }
    case Method::kHeuristic: {
      const auto pts = human_part ? labels.part_points(*human_part) : std::vector<geometry::Vec3>{};
      if (pts.empty()) return {0, "human part not segmented; first candidate"};
      Rng tie(mix_seed(cfg.seed, 0x7469));
      return {grasp::heuristic_select(proposal.subset, pts, cfg.contact_tolerance, cfg.random_tie ? &tie : nullptr), ""};
    }
    case Method::kOurs: {
      auto ctx = grasp::make_context(seg, task_text, proposal.subset, human_part);
      ctx.include_geometry = ablation != Ablation::kNoGeometry;
      ctx.include_human_part = ablation != Ablation::kNoHumanPart;
      ctx.contact_tolerance = cfg.contact_tolerance;
      return {grasp::select(ctx, labels, session), ""};
    }
  }
  return out;
}

struct PipelineOptions {
  Method method{Method::kOurs};
  Ablation ablation{Ablation::kNone};
  std::optional<std::filesystem::path> grasps_file;
};

struct PipelineResult {
  reasoner::TaskPlan plan;
  grasp::GraspCandidate grasp;
  std::string grasp_part;
  grasp::HandoverPose pose;
};

inline ojson segmentation_json(const PreparedScene& s) {
  ojson j;
  const auto& c = s.seg_trace.crop;
  j["crop"] = {c.u_min, c.v_min, c.u_max, c.v_max};
  j["proposals"] = ojson::array();
  for (const auto& h : s.seg_trace.proposals) j["proposals"].push_back({{"label", h.label}, {"pixels", h.mask.count()}});
  j["stages"] = s.seg_trace.stages;
  j["parts"] = ojson::array();
  for (const auto& p : s.segmentation.parts) {
    ojson part{{"label", p.label}, {"points", p.indices.size()}};
    if (p.summary) part["geometry"] = reasoner::summary_json(*p.summary);
    j["parts"].push_back(std::move(part));
  }
  j["unidentified"] = s.segmentation.unidentified;
  j["completed_points"] = s.completed.points.size();
  j["table_depth"] = reasoner::round4(s.completed.table_depth);
  return j;
}

/// Runs everything for `entry` and `task_text`. `trace` is filled as the
/// run goes, so it is complete up to the point of any failure.
inline PipelineResult run_pipeline(const dataset::DatasetEntry& entry, const std::string& task_text,
                                   const PipelineConfig& cfg, reasoner::Reasoner& reasoner,
                                   partseg::SegmentationBackend& backend, const PipelineOptions& opt, ojson& trace) {
  reasoner::Transcript transcript;
  reasoner::Session session(reasoner, &transcript);
  trace = ojson::object();
  trace["format"] = "handover-trace/1";
  trace["config_fingerprint"] = fingerprint(cfg);
  trace["entry"] = entry.key();
  trace["task"] = task_text;
  trace["method"] = std::string(to_string(opt.method));
  trace["ablation"] = std::string(to_string(opt.ablation));
  struct Flush {
    ojson& t;
    reasoner::Transcript& tr;
    ~Flush() { t["reasoner_queries"] = tr.to_json(); }
  } flush{trace, transcript};

  PipelineResult res;
  res.plan = with_stage("task_reasoning",
                        [&] { return reasoner::task_reasoning({entry.object_class, task_text}, session); });
  trace["task_plan"] = reasoner::to_json(res.plan);

  auto scene = prepare_scene(entry, res.plan.relevant_parts, backend, session, cfg);
  trace["segmentation"] = segmentation_json(scene);

  const double dominant = scene.segmentation.object_summary.dominant_length;
  const auto source = opt.grasps_file ? file_source(*opt.grasps_file) : generator_source(scene.completed.points, cfg);
  auto proposal = with_stage("generate", [&] { return propose_grasps(source, dominant, scene_seed(cfg, entry), cfg); });
  trace["grasp_rounds"] = rounds_json(proposal);
  if (!proposal.passed) {
    throw SelectionError("no diverse grasp set after " + std::to_string(proposal.rounds.size()) +
                         " generation rounds");
  }

  const std::optional<std::string> human = res.plan.human_grasp_part;
  auto pick = with_stage("select", [&] {
    return choose(opt.method, opt.ablation, scene.segmentation, scene.labels, task_text, human, proposal, session, cfg);
  });
  res.grasp = pick.index < proposal.subset.size() ? proposal.subset[pick.index] : proposal.candidates.front();
  res.grasp_part = grasp::grasp_part(res.grasp, scene.labels);
  ojson sel;
  sel["subset"] = ojson::array();
  for (const auto& g : proposal.subset) {
    auto gj = grasp::to_json(g);
    gj["grasp_part"] = grasp::grasp_part(g, scene.labels);
    sel["subset"].push_back(std::move(gj));
  }
  if (pick.index < proposal.subset.size()) {
    sel["chosen_index"] = pick.index;
  } else {
    sel["chosen_index"] = nullptr;
  }
  if (!pick.note.empty()) sel["note"] = pick.note;
  sel["grasp"] = grasp::to_json(res.grasp);
  sel["grasp_part"] = res.grasp_part;
  trace["selection"] = std::move(sel);

  auto human_pts = scene.labels.part_points(res.plan.human_grasp_part);
  const bool have_human = !human_pts.empty();
  const geometry::Vec3 human_point =
      have_human ? geometry::centroid_of(human_pts) : scene.segmentation.object_summary.centroid;
  res.pose = with_stage("handover", [&] {
    return grasp::handover_orientation(res.grasp, human_point, cfg.base_to_human, cfg.handover_position);
  });
  trace["handover"] = {{"human_grasp_point", reasoner::vec_json(human_point)},
                       {"human_grasp_point_source", have_human ? "human part centroid" : "object centroid"},
                       {"position", reasoner::vec_json(res.pose.position)},
                       {"quaternion",
                        {res.pose.rotation.w(), res.pose.rotation.x(), res.pose.rotation.y(), res.pose.rotation.z()}}};
  return res;
}

}  // namespace handover::pipeline

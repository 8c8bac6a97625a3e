#pragma once

#include <atomic>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "handover/eval/metrics.hpp"
#include "handover/pipeline.hpp"

namespace handover::eval {

using ojson = nlohmann::ordered_json;

inline constexpr std::string_view kReportFormat = "handover-report/1";

inline const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> m = {"ours", "heuristic", "planner-first", "ours-nG", "ours-nH"};
  return m;
}

inline std::pair<pipeline::Method, pipeline::Ablation> parse_method(std::string_view s) {
  using pipeline::Ablation;
  using pipeline::Method;
  if (s == "ours") return {Method::kOurs, Ablation::kNone};
  if (s == "ours-nG") return {Method::kOurs, Ablation::kNoGeometry};
  if (s == "ours-nH") return {Method::kOurs, Ablation::kNoHumanPart};
  if (s == "heuristic") return {Method::kHeuristic, Ablation::kNone};
  if (s == "planner-first") return {Method::kPlannerFirst, Ablation::kNone};
  throw InputError("unknown method '" + std::string(s) + "'");
}

/// Result column for a task: the two conventional groups pooled, each
/// unconventional pair on its own.
inline std::string task_group(const dataset::TaskSpec& t) {
  switch (t.conventionality) {
    case dataset::Conventionality::kConventionalEasy: return "easy";
    case dataset::Conventionality::kConventionalComplex: return "complex";
    case dataset::Conventionality::kUnconventional: return t.object_class + "/" + t.task_text;
  }
  return "other";
}

inline std::vector<std::string> group_order() {
  std::vector<std::string> g = {"easy", "complex"};
  for (const auto& t : dataset::task_pairs()) {
    if (t.conventionality == dataset::Conventionality::kUnconventional) g.push_back(task_group(t));
  }
  return g;
}

struct GraspEvalRecord {
  std::string entry;
  std::string object_class;
  std::string task;
  std::string group;
  std::string method;
  std::optional<grasp::GraspCandidate> grasp;
  std::string grasp_part;
  std::string human_part;  // ground truth
  bool success{false};
  std::string note;
};

struct TaskOutcome {
  dataset::TaskSpec spec;
  reasoner::TaskPlan plan;
  dataset::ReferenceParts truth;
};

struct Failure {
  std::string entry;
  std::string stage;
  std::string error;
};

struct EntryOutcome {
  std::string key;
  std::string object_class;
  std::optional<SegMetrics> ours;
  std::optional<SegMetrics> baseline;
  std::vector<TaskOutcome> tasks;
  std::vector<GraspEvalRecord> records;
  std::vector<Failure> failures;
};

struct BenchmarkOptions {
  std::vector<std::string> methods{"ours", "heuristic", "planner-first"};
  unsigned jobs{1};
};

namespace detail {

inline std::vector<TaskOutcome> entry_tasks(const dataset::DatasetEntry& e) {
  std::vector<TaskOutcome> out;
  auto conv = [&](const std::string& task) {
    auto p = dataset::find_task_pair(e.object_class, task);
    return p ? p->conventionality : dataset::Conventionality::kConventionalEasy;
  };
  if (!e.tasks.empty()) {
    for (const auto& t : e.tasks) {
      out.push_back({{e.object_class, t.task_text, conv(t.task_text)}, {}, {t.human_part, t.robot_part}});
    }
    return out;
  }
  for (const auto& t : dataset::task_pairs()) {
    if (t.object_class != e.object_class) continue;
    out.push_back({t, {}, *dataset::reference_grasp_parts(t.object_class, t.task_text)});
  }
  return out;
}

inline Failure failure_from(const std::string& key, const Error& e, const std::string& fallback_stage) {
  return {key, e.stage().empty() ? fallback_stage : e.stage(), e.message()};
}

}  // namespace detail

/// Everything measured on one observation. Failures are recorded, never thrown.
inline EntryOutcome evaluate_entry(const dataset::DatasetEntry& entry, const PipelineConfig& cfg,
                                   const BenchmarkOptions& opt, reasoner::Reasoner& reasoner,
                                   partseg::SegmentationBackend& backend) {
  EntryOutcome out;
  out.key = entry.key();
  out.object_class = entry.object_class;
  reasoner::Session session(reasoner);
  auto fail = [&](const Error& e, const std::string& stage) { out.failures.push_back(detail::failure_from(out.key, e, stage)); };
  auto fail_std = [&](const std::exception& e, const std::string& stage) { out.failures.push_back({out.key, stage, e.what()}); };

  // Plans first: their relevant parts drive segmentation.
  std::vector<std::string> expected;
  for (auto& t : detail::entry_tasks(entry)) {
    try {
      t.plan = reasoner::task_reasoning(t.spec, session);
      for (const auto& p : t.plan.relevant_parts) {
        if (std::find(expected.begin(), expected.end(), p) == expected.end()) expected.push_back(p);
      }
      out.tasks.push_back(std::move(t));
    } catch (const Error& e) {
      fail(e, "task_reasoning");
    }
  }
  if (expected.empty()) expected = *dataset::taxonomy().parts(entry.object_class);
  const auto& order = *dataset::taxonomy().parts(entry.object_class);
  std::stable_sort(expected.begin(), expected.end(), [&](const std::string& a, const std::string& b) {
    return std::find(order.begin(), order.end(), a) < std::find(order.begin(), order.end(), b);
  });

  pipeline::PreparedScene scene;
  try {
    scene = pipeline::prepare_scene(entry, expected, backend, session, cfg);
  } catch (const Error& e) {
    fail(e, "segment");
    return out;
  } catch (const std::exception& e) {
    fail_std(e, "segment");
    return out;
  }
  if (!entry.gt_parts.empty()) {
    out.ours = segmentation_metrics(scene.segmentation, entry.gt_parts, cfg.det_iou_thresh);
    out.baseline = score_parts(baseline_masks(entry.object_class, scene.seg_trace.proposals), entry.gt_parts,
                               cfg.det_iou_thresh);
  }
  if (opt.methods.empty() || out.tasks.empty()) return out;

  // Ground-truth labels on the completed cloud decide interference.
  std::vector<std::pair<std::string, const Mask2D*>> gt_masks;
  const auto hard = dataset::hard_label_view(entry);
  for (const auto& m : hard) gt_masks.emplace_back(m.name, &m.mask);
  const auto gt_labels =
      grasp::complete_labels(grasp::labeled_cloud(scene.segmentation.object_cloud, gt_masks), scene.completed);

  pipeline::GraspProposal proposal;
  try {
    proposal = pipeline::propose_grasps(pipeline::generator_source(scene.completed.points, cfg),
                                        scene.segmentation.object_summary.dominant_length,
                                        pipeline::scene_seed(cfg, entry), cfg);
  } catch (const Error& e) {
    fail(e, "generate");
  }

  for (const auto& t : out.tasks) {
    const auto human_pts = gt_labels.part_points(t.truth.human_part);
    for (const auto& name : opt.methods) {
      GraspEvalRecord rec;
      rec.entry = out.key;
      rec.object_class = entry.object_class;
      rec.task = t.spec.task_text;
      rec.group = task_group(t.spec);
      rec.method = name;
      rec.human_part = t.truth.human_part;
      if (!proposal.passed) {
        rec.note = "no diverse grasp set";
        out.records.push_back(std::move(rec));
        continue;
      }
      try {
        const auto [method, ablation] = parse_method(name);
        const auto pick = pipeline::choose(method, ablation, scene.segmentation, scene.labels, t.spec.task_text,
                                           t.plan.human_grasp_part, proposal, session, cfg);
        rec.grasp = pick.index < proposal.subset.size() ? proposal.subset[pick.index] : proposal.candidates.front();
        rec.note = pick.note;
        rec.grasp_part = grasp::grasp_part(*rec.grasp, gt_labels);
        if (human_pts.empty()) {
          rec.note = "ground-truth human part not visible";
        } else {
          rec.success = grasp_success(*rec.grasp, human_pts, cfg.margin);
        }
      } catch (const Error& e) {
        rec.note = e.what();
        fail(e, "select");
      }
      out.records.push_back(std::move(rec));
    }
  }
  if (!proposal.passed) {
    out.failures.push_back({out.key, "generate",
                            "no diverse grasp set after " + std::to_string(proposal.rounds.size()) + " rounds"});
  }
  return out;
}

struct BenchmarkReport {
  std::string fingerprint;
  std::uint64_t seed{0};
  std::vector<std::string> methods;
  std::vector<EntryOutcome> entries;  // dataset order
};

/// Evaluates every entry, `jobs` at a time; results keep dataset order.
inline BenchmarkReport run_benchmark(const std::vector<dataset::DatasetEntry>& entries, const PipelineConfig& cfg,
                                     const BenchmarkOptions& opt, reasoner::Reasoner& reasoner,
                                     partseg::SegmentationBackend& backend) {
  for (const auto& m : opt.methods) parse_method(m);
  BenchmarkReport rep;
  rep.fingerprint = fingerprint(cfg);
  rep.seed = cfg.seed;
  rep.methods = opt.methods;
  rep.entries.resize(entries.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < entries.size(); i = next++) {
      try {
        rep.entries[i] = evaluate_entry(entries[i], cfg, opt, reasoner, backend);
      } catch (const std::exception& e) {
        rep.entries[i] = EntryOutcome{};
        rep.entries[i].key = entries[i].key();
        rep.entries[i].object_class = entries[i].object_class;
        rep.entries[i].failures.push_back({entries[i].key(), "evaluate", e.what()});
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(opt.jobs, static_cast<unsigned>(entries.size())));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return rep;
}

}  // namespace handover::eval

#pragma once

// Typed reasoning operations. Each builds a TD/SI/OS query, asks the
// session's reasoner and converts the validated answer back to C++ types.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "handover/dataset/tasks.hpp"
#include "handover/dataset/taxonomy.hpp"
#include "handover/geometry/summary.hpp"
#include "handover/reasoner/query.hpp"

namespace handover::reasoner {

using geometry::GeomSummary;
using geometry::Vec3;

/// Geometry of a point set as far as it is defined: a full summary when the
/// points allow one, else just the centroid, else only the count.
struct ShapeInfo {
  std::size_t point_count{0};
  std::optional<Vec3> centroid;
  std::optional<GeomSummary> summary;
};

inline ShapeInfo describe(std::span<const Vec3> points) {
  ShapeInfo s;
  s.point_count = points.size();
  if (points.empty()) return s;
  s.centroid = geometry::centroid_of(points);
  s.summary = geometry::try_summarize(points);
  return s;
}

inline ShapeInfo describe(const GeomSummary& summary) {
  return {summary.point_count, summary.centroid, summary};
}

inline json shape_json(const ShapeInfo& s) {
  if (s.summary) return summary_json(*s.summary);
  json j;
  if (s.centroid) j["centroid"] = vec_json(*s.centroid);
  j["point_count"] = s.point_count;
  return j;
}

inline std::optional<Vec3> json_centroid(const json& shape) {
  if (!shape.is_object() || !shape.contains("centroid")) return std::nullopt;
  return vec_from_json(shape.at("centroid"));
}

inline json string_enum(const std::vector<std::string>& values) {
  return {{"type", "string"}, {"enum", values}};
}

// ---------------------------------------------------------------------------
// Task reasoning

struct RobotRegion {
  std::string description;
  std::optional<std::string> part;
};

struct TaskPlan {
  std::string post_task_description;
  std::vector<std::string> relevant_parts;
  std::string human_grasp_part;
  RobotRegion robot_grasp_region;
  std::string confidence{"high"};
};

inline json to_json(const TaskPlan& p) {
  json j;
  j["post_task_description"] = p.post_task_description;
  j["relevant_parts"] = p.relevant_parts;
  j["human_grasp_part"] = p.human_grasp_part;
  j["robot_grasp_region"] = {{"description", p.robot_grasp_region.description}};
  if (p.robot_grasp_region.part) j["robot_grasp_region"]["part"] = *p.robot_grasp_region.part;
  j["confidence"] = p.confidence;
  return j;
}

inline TaskPlan task_plan_from_json(const json& j) {
  TaskPlan p;
  p.post_task_description = j.at("post_task_description").get<std::string>();
  p.relevant_parts = j.at("relevant_parts").get<std::vector<std::string>>();
  p.human_grasp_part = j.at("human_grasp_part").get<std::string>();
  const auto& r = j.at("robot_grasp_region");
  p.robot_grasp_region.description = r.at("description").get<std::string>();
  if (r.contains("part")) p.robot_grasp_region.part = r.at("part").get<std::string>();
  p.confidence = j.value("confidence", std::string("high"));
  return p;
}

inline ReasonerQuery task_plan_query(const dataset::TaskSpec& spec) {
  ReasonerQuery q;
  q.kind = QueryKind::kTaskPlan;
  q.task_description = fill_template(resources::kTaskPlanTemplate,
                                     {{"object_class", spec.object_class}, {"task", spec.task_text}});
  const auto* parts = dataset::taxonomy().parts(spec.object_class);
  q.supporting_info["object_class"] = spec.object_class;
  q.supporting_info["task"] = spec.task_text;
  q.supporting_info["scene"] = "tabletop";
  q.supporting_info["parts"] = parts ? *parts : std::vector<std::string>{};

  const json part = parts ? string_enum(*parts) : json{{"type", "string"}, {"minLength", 1}};
  json props;
  // Description first: the plan is better when the use is spelled out before
  // the parts are chosen.
  props["post_task_description"] = {{"type", "string"}, {"minLength", 1}};
  props["relevant_parts"] = {{"type", "array"}, {"items", part}, {"minItems", 1}, {"uniqueItems", true}};
  props["human_grasp_part"] = part;
  props["robot_grasp_region"] = {{"type", "object"},
                                 {"properties", {{"description", {{"type", "string"}}}, {"part", part}}},
                                 {"required", {"description"}}};
  props["confidence"] = string_enum({"high", "low"});
  q.output_schema = {{"type", "object"},
                     {"properties", props},
                     {"required", {"post_task_description", "relevant_parts", "human_grasp_part", "robot_grasp_region"}}};
  return q;
}

inline TaskPlan task_reasoning(const dataset::TaskSpec& spec, Session& session) {
  if (spec.task_text.empty()) throw InputError("task_reasoning: empty task text");
  return task_plan_from_json(session.ask(task_plan_query(spec)));
}

// ---------------------------------------------------------------------------
// Contradicting labels on overlapping masks

struct ContradictionInput {
  std::string object_class;
  ShapeInfo object;
  std::string label_a;
  ShapeInfo shape_a;
  std::string label_b;
  ShapeInfo shape_b;
  std::size_t overlap_pixels{0};
  ShapeInfo overlap;
};

inline ReasonerQuery contradiction_query(const ContradictionInput& in) {
  ReasonerQuery q;
  q.kind = QueryKind::kPartLabel;
  q.task_description = fill_template(resources::kPartLabelTemplate, {{"object_class", in.object_class},
                                                                     {"label_a", in.label_a},
                                                                     {"label_b", in.label_b}});
  auto& si = q.supporting_info;
  si["object_class"] = in.object_class;
  si["scene"] = "tabletop";
  si["object"] = shape_json(in.object);
  si["candidates"] = json::array({{{"label", in.label_a}, {"geometry", shape_json(in.shape_a)}},
                                  {{"label", in.label_b}, {"geometry", shape_json(in.shape_b)}}});
  si["overlap_region"] = {{"pixel_count", in.overlap_pixels}, {"geometry", shape_json(in.overlap)}};
  std::vector<std::string> labels{in.label_a};
  if (in.label_b != in.label_a) labels.push_back(in.label_b);
  q.output_schema = {{"type", "object"}, {"properties", {{"label", string_enum(labels)}}}, {"required", {"label"}}};
  return q;
}

/// Which of the two labels the overlapping region belongs to.
inline std::string resolve_contradiction(const ContradictionInput& in, Session& session) {
  if (in.label_a == in.label_b) return in.label_a;
  return session.ask(contradiction_query(in)).at("label").get<std::string>();
}

// ---------------------------------------------------------------------------
// Residual clusters to missing parts

struct LocatedShape {
  std::string label;  // part label, or empty for clusters
  int cluster_id{-1};
  ShapeInfo shape;
  double axis_position{0.0};  // centroid along the object's dominant axis, 0..1
};

struct AssignmentInput {
  std::string object_class;
  ShapeInfo object;
  std::vector<LocatedShape> known_parts;
  std::vector<std::string> missing_parts;  // taxonomy order
  std::vector<LocatedShape> clusters;
};

struct PartAssignment {
  std::vector<std::pair<int, std::string>> labels;  // (cluster id, label), cluster order
};

inline ReasonerQuery assignment_query(const AssignmentInput& in) {
  ReasonerQuery q;
  q.kind = QueryKind::kPartAssignment;
  std::string missing;
  for (const auto& m : in.missing_parts) missing += (missing.empty() ? "" : ", ") + m;
  q.task_description = fill_template(resources::kPartAssignmentTemplate,
                                     {{"object_class", in.object_class}, {"missing_parts", missing}});
  auto& si = q.supporting_info;
  si["object_class"] = in.object_class;
  si["scene"] = "tabletop";
  const auto* order = dataset::taxonomy().parts(in.object_class);
  si["part_order"] = order ? *order : std::vector<std::string>{};
  si["object"] = shape_json(in.object);
  si["known_parts"] = json::array();
  for (const auto& p : in.known_parts) {
    si["known_parts"].push_back({{"label", p.label}, {"axis_position", round4(p.axis_position)}, {"geometry", shape_json(p.shape)}});
  }
  si["missing_parts"] = in.missing_parts;
  si["clusters"] = json::array();
  std::vector<int> ids;
  for (const auto& c : in.clusters) {
    ids.push_back(c.cluster_id);
    si["clusters"].push_back({{"cluster_id", c.cluster_id}, {"axis_position", round4(c.axis_position)}, {"geometry", shape_json(c.shape)}});
  }
  json item = {{"type", "object"},
               {"properties", {{"cluster_id", {{"type", "integer"}, {"enum", ids}}}, {"label", {{"type", "string"}, {"minLength", 1}}}}},
               {"required", {"cluster_id", "label"}}};
  q.output_schema = {{"type", "object"},
                     {"properties", {{"assignments", {{"type", "array"}, {"items", item}, {"minItems", ids.size()}, {"maxItems", ids.size()}}}}},
                     {"required", {"assignments"}}};
  return q;
}

inline PartAssignment assign_cluster_labels(const AssignmentInput& in, Session& session) {
  PartAssignment out;
  if (in.clusters.empty()) return out;
  if (in.missing_parts.empty()) throw InputError("assign_cluster_labels: no missing parts");
  const json r = session.ask(assignment_query(in));
  // Report in the order the clusters were given.
  for (const auto& c : in.clusters) {
    for (const auto& a : r.at("assignments")) {
      if (a.at("cluster_id").get<int>() == c.cluster_id) out.labels.emplace_back(c.cluster_id, a.at("label").get<std::string>());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Unlabeled region: extension of an existing part, or a new one

struct NeighborPart {
  std::string label;
  ShapeInfo shape;
  double min_distance{0.0};  // closest pair of points, cluster to part
  double axis_offset{0.0};   // cluster centroid to the part's dominant-axis line
};

struct UnlabeledInput {
  std::string object_class;
  ShapeInfo object;
  ShapeInfo cluster;
  std::vector<NeighborPart> parts;
  double adjacency_tolerance{0.005};
  std::string new_label;
};

inline ReasonerQuery unlabeled_query(const UnlabeledInput& in) {
  ReasonerQuery q;
  q.kind = QueryKind::kUnlabeledPart;
  q.task_description = fill_template(resources::kUnlabeledPartTemplate, {{"object_class", in.object_class}});
  auto& si = q.supporting_info;
  si["object_class"] = in.object_class;
  si["scene"] = "tabletop";
  si["object"] = shape_json(in.object);
  si["region"] = shape_json(in.cluster);
  si["adjacency_tolerance"] = round4(in.adjacency_tolerance);
  si["parts"] = json::array();
  std::vector<std::string> labels;
  for (const auto& p : in.parts) {
    labels.push_back(p.label);
    si["parts"].push_back({{"label", p.label},
                           {"min_distance_to_region", round4(p.min_distance)},
                           {"region_offset_from_part_axis", round4(p.axis_offset)},
                           {"geometry", shape_json(p.shape)}});
  }
  si["new_part_label"] = in.new_label;
  labels.push_back(in.new_label);
  q.output_schema = {{"type", "object"}, {"properties", {{"label", string_enum(labels)}}}, {"required", {"label"}}};
  return q;
}

inline std::string classify_unlabeled(const UnlabeledInput& in, Session& session) {
  if (in.cluster.point_count == 0) throw InputError("classify_unlabeled: empty cluster");
  return session.ask(unlabeled_query(in)).at("label").get<std::string>();
}

// ---------------------------------------------------------------------------
// Grasp choice

struct CandidateView {
  Vec3 translation{Vec3::Zero()};
  double width{0.0};
  Vec3 approach{Vec3::UnitZ()};
  std::array<Vec3, 2> contacts{Vec3::Zero(), Vec3::Zero()};
  std::array<std::string, 2> contact_parts;
  std::optional<double> clearance;  // min contact distance to the human part
};

struct GraspChoiceInput {
  std::string object_class;
  std::string task_text;
  ShapeInfo object;
  std::vector<std::pair<std::string, ShapeInfo>> parts;
  std::optional<std::string> human_part;
  std::vector<CandidateView> candidates;
  bool include_geometry{true};
  double contact_tolerance{0.005};
};

inline ReasonerQuery grasp_choice_query(const GraspChoiceInput& in) {
  ReasonerQuery q;
  q.kind = QueryKind::kGraspChoice;
  const std::string human_sentence =
      in.human_part ? "The person will hold the " + *in.human_part + ", so it must stay free."
                    : "Consider which part the person will need to hold.";
  q.task_description = fill_template(resources::kGraspChoiceTemplate, {{"object_class", in.object_class},
                                                                      {"task", in.task_text},
                                                                      {"human_part_sentence", human_sentence}});
  auto& si = q.supporting_info;
  si["object_class"] = in.object_class;
  si["task"] = in.task_text;
  si["scene"] = "tabletop";
  if (in.include_geometry) si["object"] = shape_json(in.object);
  si["parts"] = json::array();
  for (const auto& [label, shape] : in.parts) {
    json p{{"label", label}};
    if (in.include_geometry) {
      p["geometry"] = shape_json(shape);
    } else if (shape.centroid) {
      p["centroid"] = vec_json(*shape.centroid);
    }
    si["parts"].push_back(std::move(p));
  }
  if (in.human_part) si["human_grasp_part"] = *in.human_part;
  if (in.include_geometry) si["contact_tolerance"] = round4(in.contact_tolerance);
  si["candidates"] = json::array();
  for (std::size_t i = 0; i < in.candidates.size(); ++i) {
    const auto& c = in.candidates[i];
    json g;
    g["index"] = i;
    g["translation"] = vec_json(c.translation);
    g["width"] = round4(c.width);
    g["approach"] = vec_json(c.approach);
    g["contacts"] = json::array({vec_json(c.contacts[0]), vec_json(c.contacts[1])});
    if (in.include_geometry) {
      g["contact_parts"] = json::array({c.contact_parts[0], c.contact_parts[1]});
      if (in.human_part && c.clearance) g["clearance_to_human_part"] = round4(*c.clearance);
    }
    si["candidates"].push_back(std::move(g));
  }
  const auto max_index = in.candidates.empty() ? 0 : in.candidates.size() - 1;
  q.output_schema = {{"type", "object"},
                     {"properties", {{"grasp_index", {{"type", "integer"}, {"minimum", 0}, {"maximum", max_index}}}}},
                     {"required", {"grasp_index"}}};
  return q;
}

inline std::size_t choose_grasp(const GraspChoiceInput& in, Session& session) {
  if (in.candidates.empty()) throw InputError("choose_grasp: no candidates");
  if (in.candidates.size() == 1) return 0;
  return session.ask(grasp_choice_query(in)).at("grasp_index").get<std::size_t>();
}

}  // namespace handover::reasoner

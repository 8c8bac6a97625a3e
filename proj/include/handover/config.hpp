#pragma once

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "handover/errors.hpp"
#include "handover/grasp/types.hpp"
#include "handover/partseg/types.hpp"
#include "handover/reasoner/format.hpp"

namespace handover {

/// 64-bit FNV-1a, as 16 hex digits.
inline std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct PipelineConfig {
  std::string reasoner{"rule"};   // rule | remote
  std::string backend{"fixture"};  // fixture | external
  std::string backend_command;     // for the external backend
  partseg::PartsegConfig partseg;
  grasp::GripperSpec gripper;
  std::size_t candidate_count{100};
  std::size_t fps_k{5};
  int regenerations{3};
  double det_iou_thresh{0.5};
  double margin{0.01};
  double contact_tolerance{0.005};
  bool random_tie{false};
  std::uint64_t seed{0};
  geometry::Vec3 handover_position{0.5, 0.0, 0.3};
  geometry::Vec3 base_to_human{1.0, 0.0, 0.0};

  void validate() const {
    auto need = [](bool ok, const char* what) {
      if (!ok) throw InputError(std::string("config: ") + what);
    };
    need(reasoner == "rule" || reasoner == "remote", "reasoner must be rule or remote");
    need(backend == "fixture" || backend == "external", "backend must be fixture or external");
    need(backend != "external" || !backend_command.empty(), "external backend needs a command");
    const auto& p = partseg;
    need(p.containment_tol >= 0.0 && p.containment_tol < 1.0, "containment_tol must be in [0, 1)");
    need(p.overlap_thresh > 0.0 && p.overlap_thresh <= 1.0, "overlap_thresh must be in (0, 1]");
    need(p.eps_floor > 0.0 && p.eps_scale >= 0.0, "eps rule needs eps_floor > 0 and eps_scale >= 0");
    need(p.min_pts >= 1, "min_pts must be at least 1");
    need(p.significance >= 0.0 && p.significance <= 1.0, "significance must be in [0, 1]");
    need(p.crop_padding >= 0, "padding must be non-negative");
    gripper.validate();
    need(candidate_count >= 1, "candidate_count must be at least 1");
    need(fps_k >= 1, "k must be at least 1");
    need(regenerations >= 0, "regenerations must be non-negative");
    need(det_iou_thresh > 0.0 && det_iou_thresh <= 1.0, "det_iou_thresh must be in (0, 1]");
    need(margin >= 0.0, "margin must be non-negative");
    need(contact_tolerance >= 0.0, "contact_tolerance must be non-negative");
    need(std::abs(base_to_human.norm() - 1.0) <= 1e-6, "base_to_human must be a unit vector");
  }
};

inline nlohmann::ordered_json to_json(const PipelineConfig& c) {
  nlohmann::ordered_json j;
  j["reasoner"] = c.reasoner;
  j["backend"] = c.backend;
  j["backend_command"] = c.backend_command;
  j["partseg"] = {{"containment_tol", c.partseg.containment_tol},
                  {"overlap_thresh", c.partseg.overlap_thresh},
                  {"eps_floor", c.partseg.eps_floor},
                  {"eps_scale", c.partseg.eps_scale},
                  {"min_pts", c.partseg.min_pts},
                  {"significance", c.partseg.significance},
                  {"padding", c.partseg.crop_padding}};
  j["gripper"] = {{"max_width", c.gripper.max_width},
                  {"finger_depth", c.gripper.finger_depth},
                  {"min_width", c.gripper.min_width}};
  j["candidate_count"] = c.candidate_count;
  j["k"] = c.fps_k;
  j["regenerations"] = c.regenerations;
  j["det_iou_thresh"] = c.det_iou_thresh;
  j["margin"] = c.margin;
  j["contact_tolerance"] = c.contact_tolerance;
  j["random_tie"] = c.random_tie;
  j["seed"] = c.seed;
  j["handover_position"] = reasoner::vec_json(c.handover_position);
  j["base_to_human"] = reasoner::vec_json(c.base_to_human);
  return j;
}

/// Overlays the keys present in `j` onto `base`; unknown keys are errors.
inline PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig c = {}) {
  static const char* known[] = {"reasoner", "backend", "backend_command", "partseg", "gripper",
                                "candidate_count", "k", "regenerations", "det_iou_thresh", "margin",
                                "contact_tolerance", "random_tie", "seed", "handover_position", "base_to_human"};
  if (!j.is_object()) throw InputError("config must be a JSON object");
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (std::find(std::begin(known), std::end(known), it.key()) == std::end(known)) {
        throw InputError("config: unknown key '" + it.key() + "'");
      }
    }
    auto get = [&](const nlohmann::json& o, const char* key, auto& field) {
      if (o.contains(key)) field = o.at(key).get<std::decay_t<decltype(field)>>();
    };
    get(j, "reasoner", c.reasoner);
    get(j, "backend", c.backend);
    get(j, "backend_command", c.backend_command);
    if (j.contains("partseg")) {
      const auto& p = j.at("partseg");
      get(p, "containment_tol", c.partseg.containment_tol);
      get(p, "overlap_thresh", c.partseg.overlap_thresh);
      get(p, "eps_floor", c.partseg.eps_floor);
      get(p, "eps_scale", c.partseg.eps_scale);
      get(p, "min_pts", c.partseg.min_pts);
      get(p, "significance", c.partseg.significance);
      get(p, "padding", c.partseg.crop_padding);
    }
    if (j.contains("gripper")) {
      const auto& g = j.at("gripper");
      get(g, "max_width", c.gripper.max_width);
      get(g, "finger_depth", c.gripper.finger_depth);
      get(g, "min_width", c.gripper.min_width);
    }
    get(j, "candidate_count", c.candidate_count);
    get(j, "k", c.fps_k);
    get(j, "regenerations", c.regenerations);
    get(j, "det_iou_thresh", c.det_iou_thresh);
    get(j, "margin", c.margin);
    get(j, "contact_tolerance", c.contact_tolerance);
    get(j, "random_tie", c.random_tie);
    get(j, "seed", c.seed);
    if (j.contains("handover_position")) c.handover_position = grasp::vec_from(j.at("handover_position"));
    if (j.contains("base_to_human")) c.base_to_human = grasp::vec_from(j.at("base_to_human"));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline PipelineConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw InputError("cannot read config " + file.string());
  try {
    return config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("malformed config " + file.string() + ": " + e.what());
  }
}

/// Hash of the canonical JSON form; recorded in every output.
inline std::string fingerprint(const PipelineConfig& c) { return fnv1a_hex(to_json(c).dump()); }

}  // namespace handover

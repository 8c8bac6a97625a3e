#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "handover/dataset/taxonomy.hpp"
#include "handover/geometry/png_io.hpp"
#include "handover/geometry/types.hpp"

namespace handover::dataset {

namespace fs = std::filesystem;
using geometry::CameraIntrinsics;
using geometry::Mask2D;

inline constexpr std::string_view kManifestName = "dataset.json";
inline constexpr std::string_view kManifestFormat = "handover-dataset/1";

struct NamedMask {
  std::string name;
  Mask2D mask;

  friend bool operator==(const NamedMask&, const NamedMask&) = default;
};

/// Ground-truth grasp parts for one post-handover task on an entry.
struct GroundTruthTask {
  std::string task_text;
  std::string human_part;
  std::string robot_part;

  friend bool operator==(const GroundTruthTask&, const GroundTruthTask&) = default;
};

struct DatasetEntry {
  std::string object_class;
  std::string instance_id;
  std::string pose_id;
  fs::path rgb_path;
  fs::path depth_path;
  std::optional<fs::path> proposals_path;  // fixture backend output, if shipped
  CameraIntrinsics intrinsics;
  Mask2D object_mask;
  std::vector<NamedMask> gt_parts;  // taxonomy order, clipped to the object mask
  std::size_t overlap_pixels{0};    // pixels claimed by two or more gt parts
  std::vector<GroundTruthTask> tasks;

  std::string key() const { return object_class + "/" + instance_id + "/" + pose_id; }

  const Mask2D* gt_mask(std::string_view part) const {
    for (const auto& m : gt_parts) {
      if (m.name == part) return &m.mask;
    }
    return nullptr;
  }

  geometry::DepthImage load_depth() const {
    auto d = geometry::read_depth_png(depth_path);
    if (d.width != intrinsics.width || d.height != intrinsics.height) {
      throw LoadError(key() + ": depth dimensions changed since load");
    }
    return d;
  }

  friend bool operator==(const DatasetEntry&, const DatasetEntry&) = default;
};

/// Disjoint view of the gt masks: a pixel claimed by several parts keeps the
/// one that comes first in taxonomy order.
inline std::vector<NamedMask> hard_label_view(const DatasetEntry& entry) {
  std::vector<NamedMask> out;
  Mask2D taken(entry.object_mask.width(), entry.object_mask.height());
  for (const auto& part : entry.gt_parts) {
    Mask2D m = part.mask;
    m.subtract(taken);
    taken |= part.mask;
    out.push_back({part.name, std::move(m)});
  }
  return out;
}

namespace detail {

inline CameraIntrinsics parse_intrinsics(const nlohmann::json& j) {
  CameraIntrinsics k;
  k.fx = j.at("fx").get<double>();
  k.fy = j.at("fy").get<double>();
  k.cx = j.at("cx").get<double>();
  k.cy = j.at("cy").get<double>();
  k.width = j.at("width").get<int>();
  k.height = j.at("height").get<int>();
  k.validate();
  return k;
}

inline Mask2D load_mask_checked(const fs::path& p, const CameraIntrinsics& k) {
  auto m = geometry::read_mask_png(p);
  if (m.width() != k.width || m.height() != k.height) {
    throw InputError("mask " + p.filename().string() + " is " + std::to_string(m.width()) + "x" +
                     std::to_string(m.height()) + ", intrinsics say " + std::to_string(k.width) +
                     "x" + std::to_string(k.height));
  }
  return m;
}

inline DatasetEntry parse_entry(const nlohmann::json& j, const fs::path& root) {
  DatasetEntry e;
  e.object_class = j.at("object_class").get<std::string>();
  e.instance_id = j.at("instance_id").get<std::string>();
  e.pose_id = j.at("pose_id").get<std::string>();
  const auto& tax = taxonomy();
  if (!tax.has_class(e.object_class)) throw InputError("unknown object class '" + e.object_class + "'");
  e.intrinsics = parse_intrinsics(j.at("intrinsics"));

  e.rgb_path = root / j.at("rgb").get<std::string>();
  if (!fs::exists(e.rgb_path)) throw InputError("missing rgb file " + e.rgb_path.string());
  if (e.rgb_path.extension() == ".png") {
    auto h = geometry::png_header(e.rgb_path);
    if (h.width != e.intrinsics.width || h.height != e.intrinsics.height) {
      throw InputError("rgb dimensions do not match intrinsics");
    }
  }
  e.depth_path = root / j.at("depth").get<std::string>();
  if (!fs::exists(e.depth_path)) throw InputError("missing depth file " + e.depth_path.string());
  {
    auto h = geometry::png_header(e.depth_path);
    if (h.width != e.intrinsics.width || h.height != e.intrinsics.height) {
      throw InputError("depth dimensions do not match intrinsics");
    }
    if (h.bit_depth != 16 || h.color_type != 0) {
      throw InputError("depth must be a 16-bit single-channel PNG");
    }
  }
  e.object_mask = load_mask_checked(root / j.at("object_mask").get<std::string>(), e.intrinsics);

  const auto& class_parts = *tax.parts(e.object_class);
  if (j.contains("parts")) {
    const auto& parts = j.at("parts");
    for (auto it = parts.begin(); it != parts.end(); ++it) {
      if (!tax.has_part(e.object_class, it.key())) {
        throw InputError("part '" + it.key() + "' does not belong to class '" + e.object_class + "'");
      }
    }
    for (const auto& name : class_parts) {
      if (!parts.contains(name)) continue;
      auto m = load_mask_checked(root / parts.at(name).get<std::string>(), e.intrinsics);
      m &= e.object_mask;
      e.gt_parts.push_back({name, std::move(m)});
    }
  }
  if (e.gt_parts.size() > 1) {
    Mask2D seen(e.intrinsics.width, e.intrinsics.height);
    Mask2D twice(e.intrinsics.width, e.intrinsics.height);
    for (const auto& p : e.gt_parts) {
      twice |= (seen & p.mask);
      seen |= p.mask;
    }
    e.overlap_pixels = twice.count();
  }
  if (j.contains("proposals")) {
    e.proposals_path = root / j.at("proposals").get<std::string>();
    if (!fs::exists(*e.proposals_path)) {
      throw InputError("missing proposals file " + e.proposals_path->string());
    }
  }
  if (j.contains("tasks")) {
    for (const auto& t : j.at("tasks")) {
      GroundTruthTask g{t.at("task").get<std::string>(), t.at("human_part").get<std::string>(),
                        t.at("robot_part").get<std::string>()};
      if (!tax.has_part(e.object_class, g.human_part) || !tax.has_part(e.object_class, g.robot_part)) {
        throw InputError("task '" + g.task_text + "' names a part outside the class taxonomy");
      }
      e.tasks.push_back(std::move(g));
    }
  }
  return e;
}

}  // namespace detail

/// Loads every manifest row under `root` (a directory holding dataset.json,
/// or the manifest file itself). Errors name the offending entry.
inline std::vector<DatasetEntry> load_dataset(const fs::path& root_or_manifest) {
  fs::path manifest = root_or_manifest;
  if (fs::is_directory(manifest)) manifest /= kManifestName;
  if (!fs::exists(manifest)) throw LoadError("no manifest at " + manifest.string());
  const fs::path root = manifest.parent_path();

  nlohmann::json doc;
  try {
    std::ifstream in(manifest);
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("malformed manifest " + manifest.string() + ": " + e.what());
  }
  if (doc.contains("format") && doc.at("format") != kManifestFormat) {
    throw LoadError("unsupported manifest format " + doc.at("format").dump());
  }

  std::vector<DatasetEntry> entries;
  if (!doc.contains("entries")) return entries;
  std::size_t index = 0;
  for (const auto& row : doc.at("entries")) {
    std::string label = "entry " + std::to_string(index);
    if (row.contains("object_class") && row.contains("instance_id") && row.contains("pose_id")) {
      label += " (" + row.at("object_class").get<std::string>() + "/" +
               row.at("instance_id").get<std::string>() + "/" +
               row.at("pose_id").get<std::string>() + ")";
    }
    try {
      entries.push_back(detail::parse_entry(row, root));
    } catch (const LoadError& e) {
      throw LoadError(label + ": " + e.message());
    } catch (const Error& e) {
      throw LoadError(label + ": " + e.message());
    } catch (const nlohmann::json::exception& e) {
      throw LoadError(label + ": " + e.what());
    }
    ++index;
  }
  return entries;
}

}  // namespace handover::dataset

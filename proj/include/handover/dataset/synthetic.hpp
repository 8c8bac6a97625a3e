#pragma once

// Synthetic RGB-D fixtures built from boxes and cylinders with known part
// labels. Used by tests and by `handover synth`; never mixed with real data.

#include <Eigen/Geometry>
#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "handover/dataset/loader.hpp"
#include "handover/dataset/tasks.hpp"
#include "handover/dataset/taxonomy.hpp"
#include "handover/geometry/png_io.hpp"
#include "handover/geometry/types.hpp"
#include "handover/random.hpp"

namespace handover::dataset::synthetic {

using geometry::CameraIntrinsics;
using geometry::DepthImage;
using geometry::Mask2D;
using geometry::PointCloud;
using geometry::Vec3;

enum class PrimitiveKind { kBox, kCylinder };

/// Solid primitive in camera coordinates. Boxes are centered in their local
/// frame; cylinders run along local x. `half_extents` is (hx, hy, hz) for a
/// box and (half_length, radius, radius) for a cylinder.
struct Primitive {
  PrimitiveKind kind{PrimitiveKind::kBox};
  std::string part;
  Eigen::Isometry3d pose{Eigen::Isometry3d::Identity()};  // local -> camera
  Vec3 half_extents{Vec3::Zero()};
};

struct Scene {
  std::string object_class;
  CameraIntrinsics intrinsics;
  double table_depth{0.6};
  std::vector<Primitive> primitives;
};

struct RenderedScene {
  DepthImage depth;
  Mask2D object_mask;
  std::vector<NamedMask> gt_parts;  // taxonomy order, disjoint
  geometry::PngImage rgb;
};

struct SceneOptions {
  int width{400};
  int height{300};
  double focal{350.0};
  double table_depth{0.6};
  double scale_min{0.9};
  double scale_max{1.1};
  double max_offset{0.03};

  CameraIntrinsics intrinsics() const {
    return {focal, focal, width / 2.0, height / 2.0, width, height};
  }
};

/// Ray parameter of the first intersection with t > 0, if any.
inline std::optional<double> intersect(const Primitive& prim, const Vec3& origin, const Vec3& dir) {
  const Eigen::Isometry3d inv = prim.pose.inverse();
  const Vec3 o = inv * origin;
  const Vec3 d = inv.linear() * dir;
  constexpr double kTiny = 1e-12;

  if (prim.kind == PrimitiveKind::kBox) {
    double tmin = -std::numeric_limits<double>::infinity();
    double tmax = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
      const double h = prim.half_extents[i];
      if (std::abs(d[i]) < kTiny) {
        if (std::abs(o[i]) > h) return std::nullopt;
        continue;
      }
      double t1 = (-h - o[i]) / d[i];
      double t2 = (h - o[i]) / d[i];
      if (t1 > t2) std::swap(t1, t2);
      tmin = std::max(tmin, t1);
      tmax = std::min(tmax, t2);
    }
    if (tmax < tmin || tmax <= 0.0) return std::nullopt;
    return tmin > 0.0 ? tmin : tmax;
  }

  const double half_len = prim.half_extents.x();
  const double r = prim.half_extents.y();
  std::optional<double> best;
  auto consider = [&](double t) {
    if (t > 0.0 && (!best || t < *best)) best = t;
  };
  const double a = d.y() * d.y() + d.z() * d.z();
  if (a > kTiny) {
    const double b = 2.0 * (o.y() * d.y() + o.z() * d.z());
    const double c = o.y() * o.y() + o.z() * o.z() - r * r;
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (double t : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)}) {
        if (std::abs(o.x() + t * d.x()) <= half_len) consider(t);
      }
    }
  }
  if (std::abs(d.x()) > kTiny) {
    for (double cap : {-half_len, half_len}) {
      const double t = (cap - o.x()) / d.x();
      const double y = o.y() + t * d.y();
      const double z = o.z() + t * d.z();
      if (y * y + z * z <= r * r) consider(t);
    }
  }
  return best;
}

/// Ray-casts the scene. Depth is quantized to whole millimeters so the
/// in-memory result matches what a 16-bit depth PNG round-trips to.
inline RenderedScene render(const Scene& scene) {
  const auto& k = scene.intrinsics;
  k.validate();
  RenderedScene out;
  out.depth = DepthImage{k.width, k.height, std::vector<float>(static_cast<std::size_t>(k.width) * k.height)};
  out.object_mask = Mask2D(k.width, k.height);
  out.rgb = geometry::PngImage{k.width, k.height, 3, 8, {}};
  out.rgb.samples.resize(static_cast<std::size_t>(k.width) * k.height * 3);

  const auto* parts = taxonomy().parts(scene.object_class);
  if (!parts) throw InputError("synthetic: unknown class '" + scene.object_class + "'");
  std::vector<Mask2D> part_masks(parts->size(), Mask2D(k.width, k.height));

  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      const Vec3 dir((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
      double best = scene.table_depth;
      const Primitive* hit = nullptr;
      for (const auto& prim : scene.primitives) {
        if (auto t = intersect(prim, Vec3::Zero(), dir); t && *t < best) {
          best = *t;
          hit = &prim;
        }
      }
      const std::size_t px = static_cast<std::size_t>(v) * k.width + u;
      const double mm = std::round(best * 1000.0);
      out.depth.meters[px] = static_cast<float>(mm / 1000.0);
      std::array<std::uint16_t, 3> color{150, 150, 140};
      if (hit) {
        out.object_mask.set_pixel(px);
        auto idx = taxonomy().part_index(scene.object_class, hit->part);
        if (!idx) throw InputError("synthetic: part '" + hit->part + "' not in taxonomy");
        part_masks[*idx].set_pixel(px);
        const auto shade = static_cast<std::uint16_t>(60 + 50 * (*idx % 4));
        color = {shade, static_cast<std::uint16_t>(200 - 40 * *idx), static_cast<std::uint16_t>(40 + 30 * *idx)};
      }
      for (int c = 0; c < 3; ++c) out.rgb.samples[px * 3 + c] = color[c];
    }
  }
  for (std::size_t i = 0; i < parts->size(); ++i) {
    if (!part_masks[i].empty()) out.gt_parts.push_back({(*parts)[i], std::move(part_masks[i])});
  }
  return out;
}

namespace detail {

// Primitive in the object frame: x along the object, y across, z up from
// the table. `vertical` cylinders stand on their axis.
struct PartSpec {
  std::string part;
  PrimitiveKind kind;
  Vec3 center;
  Vec3 half;
  bool vertical{false};
};

inline std::vector<PartSpec> object_template(std::string_view cls) {
  using K = PrimitiveKind;
  if (cls == "hammer") {
    return {{"handle", K::kBox, {0.0, 0.0, 0.0125}, {0.10, 0.0125, 0.0125}},
            {"head", K::kBox, {0.115, 0.0, 0.015}, {0.015, 0.05, 0.015}}};
  }
  if (cls == "knife") {
    return {{"handle", K::kBox, {-0.06, 0.0, 0.009}, {0.05, 0.01, 0.009}},
            {"blade", K::kBox, {0.065, 0.0, 0.0015}, {0.075, 0.0125, 0.0015}}};
  }
  if (cls == "screwdriver") {
    return {{"handle", K::kCylinder, {-0.05, 0.0, 0.015}, {0.05, 0.015, 0.015}},
            {"shaft", K::kCylinder, {0.045, 0.0, 0.015}, {0.045, 0.003, 0.003}},
            {"tip", K::kCylinder, {0.1, 0.0, 0.015}, {0.01, 0.003, 0.003}}};
  }
  if (cls == "pan") {
    return {{"body", K::kCylinder, {0.0, 0.0, 0.02}, {0.02, 0.11, 0.11}, true},
            {"handle", K::kBox, {0.2, 0.0, 0.03}, {0.09, 0.012, 0.008}}};
  }
  if (cls == "spoon") {
    return {{"handle", K::kBox, {-0.03, 0.0, 0.004}, {0.07, 0.006, 0.004}},
            {"bowl", K::kBox, {0.065, 0.0, 0.006}, {0.025, 0.018, 0.006}}};
  }
  if (cls == "mug") {
    return {{"body", K::kCylinder, {0.0, 0.0, 0.04}, {0.045, 0.04, 0.04}},
            {"rim", K::kCylinder, {0.05, 0.0, 0.04}, {0.005, 0.042, 0.042}},
            {"handle", K::kBox, {-0.005, 0.055, 0.04}, {0.025, 0.015, 0.006}}};
  }
  if (cls == "bottle") {
    return {{"body", K::kCylinder, {-0.03, 0.0, 0.035}, {0.07, 0.035, 0.035}},
            {"neck", K::kCylinder, {0.06, 0.0, 0.035}, {0.02, 0.014, 0.014}},
            {"cap", K::kCylinder, {0.09, 0.0, 0.035}, {0.01, 0.016, 0.016}}};
  }
  if (cls == "plier") {
    return {{"handles", K::kBox, {-0.05, 0.0, 0.008}, {0.06, 0.02, 0.008}},
            {"pivot", K::kCylinder, {0.02, 0.0, 0.01}, {0.01, 0.012, 0.012}, true},
            {"jaws", K::kBox, {0.062, 0.0, 0.007}, {0.03, 0.01, 0.007}}};
  }
  if (cls == "scissor") {
    return {{"handles", K::kBox, {-0.06, 0.0, 0.006}, {0.05, 0.03, 0.006}},
            {"pivot", K::kCylinder, {0.0, 0.0, 0.008}, {0.008, 0.01, 0.01}, true},
            {"blades", K::kBox, {0.07, 0.0, 0.004}, {0.06, 0.012, 0.004}}};
  }
  if (cls == "spraying bottle") {
    return {{"body", K::kBox, {0.0, 0.0, 0.04}, {0.07, 0.045, 0.04}},
            {"trigger", K::kBox, {0.08, 0.0, 0.03}, {0.01, 0.012, 0.02}},
            {"nozzle", K::kBox, {0.1, 0.0, 0.06}, {0.015, 0.012, 0.012}}};
  }
  if (cls == "stapler") {
    return {{"base", K::kBox, {0.0, 0.0, 0.0075}, {0.08, 0.02, 0.0075}},
            {"upper arm", K::kBox, {0.01, 0.0, 0.025}, {0.065, 0.018, 0.01}}};
  }
  if (cls == "toothbrush") {
    return {{"handle", K::kBox, {-0.02, 0.0, 0.006}, {0.075, 0.007, 0.006}},
            {"brush head", K::kBox, {0.07, 0.0, 0.012}, {0.015, 0.007, 0.012}}};
  }
  throw InputError("synthetic: no template for class '" + std::string(cls) + "'");
}

}  // namespace detail

/// Places one instance of `object_class` on the table with a random scale,
/// yaw and offset drawn from `rng`.
inline Scene make_scene(std::string_view object_class, Rng& rng, const SceneOptions& opt = {}) {
  auto specs = detail::object_template(object_class);
  const double scale = rng.uniform(opt.scale_min, opt.scale_max);
  const double yaw = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double ox = rng.uniform(-opt.max_offset, opt.max_offset);
  const double oy = rng.uniform(-opt.max_offset, opt.max_offset);

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : specs) {
    const double reach = s.vertical ? s.half.y() : s.half.x();
    lo = std::min(lo, s.center.x() - reach);
    hi = std::max(hi, s.center.x() + reach);
  }
  const double mid = 0.5 * (lo + hi);

  const Eigen::Isometry3d object_to_camera =
      Eigen::Translation3d(ox, oy, opt.table_depth) *
      Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(std::numbers::pi, Vec3::UnitX());

  Scene scene{std::string(object_class), opt.intrinsics(), opt.table_depth, {}};
  for (const auto& s : specs) {
    Primitive p;
    p.kind = s.kind;
    p.part = s.part;
    p.half_extents = s.half * scale;
    Vec3 c = s.center;
    c.x() -= mid;
    Eigen::Isometry3d local = Eigen::Isometry3d::Identity();
    local.translate(c * scale);
    if (s.vertical) local.rotate(Eigen::AngleAxisd(-std::numbers::pi / 2.0, Vec3::UnitY()));
    p.pose = object_to_camera * local;
    scene.primitives.push_back(std::move(p));
  }
  return scene;
}

// ---------------------------------------------------------------------------
// Full-surface samplers (closed shapes), for grasp-generation audits.

inline PointCloud sample_box_surface(const Vec3& size, double spacing,
                                     const Eigen::Isometry3d& pose = Eigen::Isometry3d::Identity()) {
  const Vec3 h = size / 2.0;
  auto steps = [&](double len) { return std::max(1, static_cast<int>(std::ceil(len / spacing))); };
  const int nx = steps(size.x()), ny = steps(size.y()), nz = steps(size.z());
  auto coord = [](double half, int i, int n) { return -half + 2.0 * half * i / n; };
  PointCloud cloud;
  auto add = [&](double x, double y, double z) { cloud.push_back(pose * Vec3(x, y, z)); };
  for (double sx : {-1.0, 1.0}) {
    for (int j = 0; j <= ny; ++j)
      for (int k = 0; k <= nz; ++k) add(sx * h.x(), coord(h.y(), j, ny), coord(h.z(), k, nz));
  }
  for (double sy : {-1.0, 1.0}) {
    for (int i = 1; i < nx; ++i)
      for (int k = 0; k <= nz; ++k) add(coord(h.x(), i, nx), sy * h.y(), coord(h.z(), k, nz));
  }
  for (double sz : {-1.0, 1.0}) {
    for (int i = 1; i < nx; ++i)
      for (int j = 1; j < ny; ++j) add(coord(h.x(), i, nx), coord(h.y(), j, ny), sz * h.z());
  }
  return cloud;
}

/// Closed cylinder along local x.
inline PointCloud sample_cylinder_surface(double radius, double length, double spacing,
                                          const Eigen::Isometry3d& pose = Eigen::Isometry3d::Identity()) {
  PointCloud cloud;
  const int nx = std::max(1, static_cast<int>(std::ceil(length / spacing)));
  const int nt = std::max(6, static_cast<int>(std::ceil(2.0 * std::numbers::pi * radius / spacing)));
  for (int i = 0; i <= nx; ++i) {
    const double x = -length / 2.0 + length * i / nx;
    for (int t = 0; t < nt; ++t) {
      const double a = 2.0 * std::numbers::pi * t / nt;
      cloud.push_back(pose * Vec3(x, radius * std::cos(a), radius * std::sin(a)));
    }
  }
  const int rings = static_cast<int>(std::floor(radius / spacing));
  for (double sx : {-1.0, 1.0}) {
    cloud.push_back(pose * Vec3(sx * length / 2.0, 0.0, 0.0));
    for (int r = 1; r <= rings; ++r) {
      const double rr = radius * r / (rings + 1);
      const int n = std::max(6, static_cast<int>(std::ceil(2.0 * std::numbers::pi * rr / spacing)));
      for (int t = 0; t < n; ++t) {
        const double a = 2.0 * std::numbers::pi * t / n;
        cloud.push_back(pose * Vec3(sx * length / 2.0, rr * std::cos(a), rr * std::sin(a)));
      }
    }
  }
  return cloud;
}

/// Fibonacci-lattice sphere.
inline PointCloud sample_sphere_surface(double radius, std::size_t n, const Vec3& center = Vec3::Zero()) {
  PointCloud cloud;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t i = 0; i < n; ++i) {
    const double y = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    const double r = std::sqrt(1.0 - y * y);
    const double a = golden * static_cast<double>(i);
    cloud.push_back(center + radius * Vec3(r * std::cos(a), y, r * std::sin(a)));
  }
  return cloud;
}

/// One-sided flat rectangle at depth z.
inline PointCloud sample_plane_patch(double sx, double sy, double spacing, double z) {
  PointCloud cloud;
  const int nx = static_cast<int>(std::ceil(sx / spacing));
  const int ny = static_cast<int>(std::ceil(sy / spacing));
  for (int i = 0; i <= nx; ++i)
    for (int j = 0; j <= ny; ++j) cloud.push_back(Vec3(-sx / 2 + sx * i / nx, -sy / 2 + sy * j / ny, z));
  return cloud;
}

// ---------------------------------------------------------------------------
// Fixture datasets on disk.

/// What the stored part proposals look like, standing in for a segmentation
/// network's output.
enum class BackendProfile {
  kPerfect,     // every visible gt part
  kHandleOnly,  // the handle-like part only (first taxonomy part otherwise)
  kNone,        // zero masks
  kNoisy,       // random drops, spill, erosion, mislabels and stray blobs
};

inline std::string_view to_string(BackendProfile p) {
  switch (p) {
    case BackendProfile::kPerfect: return "perfect";
    case BackendProfile::kHandleOnly: return "handle-only";
    case BackendProfile::kNone: return "none";
    case BackendProfile::kNoisy: return "noisy";
  }
  return "?";
}

inline BackendProfile backend_profile_from_string(std::string_view s) {
  if (s == "perfect") return BackendProfile::kPerfect;
  if (s == "handle-only") return BackendProfile::kHandleOnly;
  if (s == "none") return BackendProfile::kNone;
  if (s == "noisy") return BackendProfile::kNoisy;
  throw InputError("unknown backend profile '" + std::string(s) + "'");
}

struct Proposal {
  std::string label;
  Mask2D mask;
  std::optional<double> score;
};

inline Mask2D dilate(const Mask2D& m, int steps) {
  Mask2D cur = m;
  for (int s = 0; s < steps; ++s) {
    Mask2D next = cur;
    for (int v = 0; v < m.height(); ++v) {
      for (int u = 0; u < m.width(); ++u) {
        if (cur.at(u, v)) continue;
        if ((u > 0 && cur.at(u - 1, v)) || (u + 1 < m.width() && cur.at(u + 1, v)) ||
            (v > 0 && cur.at(u, v - 1)) || (v + 1 < m.height() && cur.at(u, v + 1))) {
          next.set(u, v);
        }
      }
    }
    cur = std::move(next);
  }
  return cur;
}

inline Mask2D erode(const Mask2D& m, int steps) {
  Mask2D inv(m.width(), m.height());
  for (std::size_t i = 0; i < m.area(); ++i) inv.set_pixel(i, !m.test(i));
  inv = dilate(inv, steps);
  Mask2D out(m.width(), m.height());
  for (std::size_t i = 0; i < m.area(); ++i) out.set_pixel(i, !inv.test(i));
  return out;
}

/// Proposals a segmentation backend with the given profile would return.
inline std::vector<Proposal> make_proposals(const RenderedScene& scene, std::string_view object_class,
                                            BackendProfile profile, Rng& rng) {
  std::vector<Proposal> out;
  switch (profile) {
    case BackendProfile::kNone:
      break;
    case BackendProfile::kPerfect:
      for (const auto& p : scene.gt_parts) out.push_back({p.name, p.mask, 0.9});
      break;
    case BackendProfile::kHandleOnly: {
      const NamedMask* pick = nullptr;
      for (const auto& p : scene.gt_parts) {
        if (p.name.find("handle") != std::string::npos) {
          pick = &p;
          break;
        }
      }
      if (!pick && !scene.gt_parts.empty()) pick = &scene.gt_parts.front();
      if (pick) out.push_back({pick->name, pick->mask, 0.8});
      break;
    }
    case BackendProfile::kNoisy: {
      for (const auto& p : scene.gt_parts) {
        if (rng.chance(0.25)) continue;
        Mask2D m = p.mask;
        if (rng.chance(0.3)) m = dilate(m, 2);
        if (rng.chance(0.2)) m = erode(m, 1);
        if (!m.empty()) out.push_back({p.name, std::move(m), rng.uniform(0.3, 0.95)});
      }
      if (scene.gt_parts.size() >= 2 && rng.chance(0.3)) {
        const auto& a = scene.gt_parts[rng.index(scene.gt_parts.size())];
        const auto* parts = taxonomy().parts(object_class);
        std::string wrong = (*parts)[rng.index(parts->size())];
        if (wrong != a.name) out.push_back({wrong, a.mask, rng.uniform(0.2, 0.6)});
      }
      if (rng.chance(0.2)) {
        Mask2D blob(scene.object_mask.width(), scene.object_mask.height());
        for (int v = 2; v < 12; ++v)
          for (int u = 2; u < 14; ++u) blob.set(u, v);
        const auto* parts = taxonomy().parts(object_class);
        out.push_back({(*parts)[rng.index(parts->size())], std::move(blob), 0.1});
      }
      break;
    }
  }
  return out;
}

inline void write_proposals(const std::filesystem::path& file, const std::vector<Proposal>& props) {
  namespace fs = std::filesystem;
  nlohmann::ordered_json doc;
  doc["format"] = "handover-proposals/1";
  doc["proposals"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < props.size(); ++i) {
    std::string label = props[i].label;
    for (auto& c : label) {
      if (c == ' ') c = '_';
    }
    const std::string name = "proposal_" + std::to_string(i) + "_" + label + ".png";
    geometry::write_mask_png(file.parent_path() / name, props[i].mask);
    nlohmann::ordered_json row;
    row["label"] = props[i].label;
    row["mask"] = name;
    if (props[i].score) row["score"] = *props[i].score;
    doc["proposals"].push_back(std::move(row));
  }
  std::ofstream(file) << doc.dump(2) << '\n';
}

struct FixtureOptions {
  std::vector<std::string> classes{"hammer"};
  int instances{1};
  int poses{1};
  BackendProfile profile{BackendProfile::kPerfect};
  std::uint64_t seed{1};
  SceneOptions scene{};
};

/// Renders and writes a manifest-backed dataset. Returns the manifest path.
inline std::filesystem::path write_fixture_dataset(const std::filesystem::path& root,
                                                   const FixtureOptions& opt) {
  namespace fs = std::filesystem;
  fs::create_directories(root);
  nlohmann::ordered_json manifest;
  manifest["format"] = std::string(kManifestFormat);
  manifest["entries"] = nlohmann::ordered_json::array();

  std::uint64_t stream = 0;
  for (const auto& cls : opt.classes) {
    std::string dir_name = cls;
    for (auto& c : dir_name) {
      if (c == ' ') c = '_';
    }
    for (int inst = 0; inst < opt.instances; ++inst) {
      for (int pose = 0; pose < opt.poses; ++pose) {
        Rng rng(mix_seed(opt.seed, stream++));
        const Scene scene = make_scene(cls, rng, opt.scene);
        const RenderedScene r = render(scene);

        char inst_id[32];
        std::snprintf(inst_id, sizeof inst_id, "%s_%02d", dir_name.c_str(), inst);
        const std::string pose_id = "p" + std::to_string(pose);
        const fs::path rel = fs::path(dir_name) / inst_id / pose_id;
        fs::create_directories(root / rel);

        geometry::write_png(root / rel / "rgb.png", r.rgb);
        geometry::write_depth_png(root / rel / "depth.png", r.depth);
        geometry::write_mask_png(root / rel / "object_mask.png", r.object_mask);

        nlohmann::ordered_json e;
        e["object_class"] = cls;
        e["instance_id"] = inst_id;
        e["pose_id"] = pose_id;
        e["rgb"] = (rel / "rgb.png").generic_string();
        e["depth"] = (rel / "depth.png").generic_string();
        e["object_mask"] = (rel / "object_mask.png").generic_string();
        const auto& k = scene.intrinsics;
        e["intrinsics"] = {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx},
                           {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
        nlohmann::ordered_json parts = nlohmann::ordered_json::object();
        for (const auto& p : r.gt_parts) {
          std::string file = "part_" + p.name + ".png";
          for (auto& c : file) {
            if (c == ' ') c = '_';
          }
          geometry::write_mask_png(root / rel / file, p.mask);
          parts[p.name] = (rel / file).generic_string();
        }
        e["parts"] = std::move(parts);

        auto props = make_proposals(r, cls, opt.profile, rng);
        write_proposals(root / rel / "proposals.json", props);
        e["proposals"] = (rel / "proposals.json").generic_string();

        nlohmann::ordered_json tasks = nlohmann::ordered_json::array();
        for (const auto& t : task_pairs()) {
          if (t.object_class != cls) continue;
          auto ref = reference_grasp_parts(t.object_class, t.task_text);
          tasks.push_back({{"task", t.task_text}, {"human_part", ref->human_part}, {"robot_part", ref->robot_part}});
        }
        e["tasks"] = std::move(tasks);
        manifest["entries"].push_back(std::move(e));
      }
    }
  }
  const fs::path file = root / kManifestName;
  std::ofstream(file) << manifest.dump(2) << '\n';
  return file;
}

}  // namespace handover::dataset::synthetic

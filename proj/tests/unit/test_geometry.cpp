#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <numbers>
#include <random>

#include "handover/dataset/loader.hpp"
#include "handover/dataset/tasks.hpp"
#include "handover/geometry.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace handover;
using namespace handover::geometry;

namespace {

CameraIntrinsics cam640() { return {600, 600, 320, 240, 640, 480}; }

DepthImage flat_depth(int w, int h, float d) { return {w, h, std::vector<float>(static_cast<std::size_t>(w) * h, d)}; }

Mask2D box_mask(int w, int h, int u0, int v0, int u1, int v1) {
  Mask2D m(w, h);
  for (int v = v0; v <= v1; ++v)
    for (int u = u0; u <= u1; ++u) m.set(u, v);
  return m;
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("unproject through the principal point lands on the optical axis") {
  auto d = flat_depth(640, 480, 0.0f);
  d.meters[240 * 640 + 320] = 0.5f;
  auto c = unproject(d, cam640());
  REQUIRE(c.size() == 1);
  CHECK(c.points[0].isApprox(Vec3(0, 0, 0.5)));
  CHECK(c.pixels[0] == 240u * 640u + 320u);
}

TEST_CASE("unproject off-axis pixel follows the pinhole formula") {
  CameraIntrinsics k{600, 600, 320, 240, 1000, 480};
  auto d = flat_depth(1000, 480, 0.0f);
  d.meters[240 * 1000 + 920] = 0.6f;
  auto c = unproject(d, k);
  REQUIRE(c.size() == 1);
  // (920 - 320) * 0.6 / 600 = 0.6
  CHECK(c.points[0].x() == doctest::Approx(0.6).epsilon(1e-6));
  CHECK(c.points[0].y() == doctest::Approx(0.0));
  CHECK(c.points[0].z() == doctest::Approx(0.6).epsilon(1e-6));
}

TEST_CASE("unproject skips zero depth and honours the mask") {
  CHECK(unproject(flat_depth(640, 480, 0.0f), cam640()).empty());
  auto m = box_mask(640, 480, 10, 10, 19, 19);
  CHECK(unproject(flat_depth(640, 480, 0.7f), cam640(), m).size() == 100);
  CHECK_THROWS_AS(unproject(flat_depth(320, 240, 0.7f), cam640()), InputError);
  CHECK_THROWS_AS(unproject(flat_depth(640, 480, 0.7f), cam640(), Mask2D(10, 10)), InputError);
}

TEST_CASE("unproject then project recovers every source pixel") {
  std::mt19937 gen(3);
  std::uniform_real_distribution<float> depth(0.3f, 2.0f);
  auto d = flat_depth(640, 480, 0.0f);
  for (auto& x : d.meters) x = gen() % 3 == 0 ? 0.0f : depth(gen);
  const auto k = cam640();
  const auto c = unproject(d, k);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto px = project(c.points[i], k);
    REQUIRE(px);
    CHECK(static_cast<std::uint32_t>(px->second * 640 + px->first) == c.pixels[i]);
  }
}

TEST_CASE("summarize a segment along x") {
  std::vector<Vec3> pts;
  for (int i = 0; i < 100; ++i) pts.emplace_back(i / 99.0, 0, 0);
  // A collinear set has a unique top eigenvector.
  auto s = summarize(pts);
  CHECK(s.dominant_axis.isApprox(Vec3::UnitX(), 1e-9));
  CHECK(s.dominant_length == doctest::Approx(1.0));
  CHECK(s.centroid.isApprox(Vec3(0.5, 0, 0)));
  CHECK(s.point_count == 100);
}

TEST_CASE("summarize rejects too few or coincident points") {
  std::vector<Vec3> two{{0, 0, 0}, {2, 0, 0}};
  CHECK_THROWS_AS(summarize(two), DegenerateGeometryError);
  std::vector<Vec3> same(5, Vec3(1, 1, 1));
  CHECK_THROWS_AS(summarize(same), DegenerateGeometryError);
  // Square corners: the top two eigenvalues tie.
  std::vector<Vec3> square{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}};
  CHECK_THROWS_AS(summarize(square), DegenerateGeometryError);
}

TEST_CASE("summarize anisotropic gaussian agrees with power iteration") {
  std::mt19937 gen(11);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<Vec3> pts;
  for (int i = 0; i < 2000; ++i) pts.emplace_back(0.3 * n(gen), 0.05 * n(gen), 0.05 * n(gen));
  const auto s = summarize(pts);
  const auto ref = oracle::principal_axis(pts);
  CHECK(std::abs(s.dominant_axis.dot(ref)) > std::cos(2.0 * std::numbers::pi / 180.0));
  CHECK(std::abs(s.dominant_axis.dot(Vec3::UnitX())) > std::cos(2.0 * std::numbers::pi / 180.0));
}

TEST_CASE("summarize invariants: bounds, sign convention, permutation and rotation") {
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec3> pts;
    for (int i = 0; i < 200; ++i) pts.emplace_back(0.4 * u(gen), 0.1 * u(gen), 0.02 * u(gen));
    const auto s = summarize(pts);
    CHECK((s.aabb_min.array() <= s.aabb_max.array()).all());
    CHECK(s.dominant_axis.norm() == doctest::Approx(1.0).epsilon(1e-9));
    Eigen::Index big;
    s.dominant_axis.cwiseAbs().maxCoeff(&big);
    CHECK(s.dominant_axis[big] > 0);

    auto shuffled = pts;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    const auto s2 = summarize(shuffled);
    CHECK(s2.dominant_axis.isApprox(s.dominant_axis, 1e-6));
    CHECK(s2.dominant_length == doctest::Approx(s.dominant_length).epsilon(1e-9));

    const Eigen::Matrix3d r = Eigen::AngleAxisd(u(gen) * 3, Vec3(u(gen), u(gen), u(gen)).normalized()).toRotationMatrix();
    std::vector<Vec3> rotated;
    for (const auto& p : pts) rotated.push_back(r * p);
    const auto s3 = summarize(rotated);
    CHECK(std::abs(s3.dominant_axis.dot(r * s.dominant_axis)) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(s3.dominant_length == doctest::Approx(s.dominant_length).epsilon(1e-6));
  }
}

TEST_CASE("dbscan examples") {
  std::mt19937 gen(2);
  std::normal_distribution<double> n(0.0, 0.01);
  std::vector<Vec3> pts;
  for (int i = 0; i < 50; ++i) pts.emplace_back(n(gen), n(gen), n(gen));
  for (int i = 0; i < 50; ++i) pts.emplace_back(1.0 + n(gen), n(gen), n(gen));
  auto c = dbscan(std::span<const Vec3>(pts), 0.1, 5);
  REQUIRE(c.size() == 2);
  CHECK_FALSE(c[0].is_noise);
  CHECK_FALSE(c[1].is_noise);
  CHECK(c[0].size() == 50);

  std::vector<Vec3> tight(12, Vec3::Zero());
  for (int i = 0; i < 12; ++i) tight[i].x() = 0.001 * i;
  auto one = dbscan(std::span<const Vec3>(tight), 0.1, 5);
  REQUIRE(one.size() == 1);
  CHECK(one[0].size() == 12);

  std::vector<Vec3> single{Vec3::Zero()};
  auto noise = dbscan(std::span<const Vec3>(single), 0.1, 3);
  REQUIRE(noise.size() == 1);
  CHECK(noise[0].is_noise);

  CHECK(dbscan(std::span<const Vec3>(), 0.1, 3).empty());
  CHECK_THROWS_AS(dbscan(std::span<const Vec3>(single), 0.0, 3), InputError);
}

TEST_CASE("dbscan matches the quadratic reference") {
  std::mt19937 gen(9);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 20 + gen() % 300;
    std::vector<Vec3> pts;
    for (std::size_t i = 0; i < n; ++i) pts.emplace_back(u(gen), u(gen), 0.2 * u(gen));
    const double eps = 0.03 + 0.1 * u(gen);
    const std::size_t min_pts = 1 + gen() % 8;
    const auto got = dbscan(std::span<const Vec3>(pts), eps, min_pts);
    const auto want = oracle::dbscan(pts, eps, min_pts);
    std::vector<int> label(n, -2);
    int id = 0;
    for (const auto& c : got) {
      for (auto i : c.member_indices) label[i] = c.is_noise ? -1 : id;
      if (!c.is_noise) ++id;
    }
    CHECK(label == want);
  }
}

TEST_CASE("mask ratios") {
  auto obj = box_mask(64, 64, 0, 0, 31, 63);
  auto inside = box_mask(64, 64, 5, 5, 14, 14);
  CHECK(containment_ratio(inside, obj) == 1.0);
  CHECK(containment_ratio(box_mask(64, 64, 40, 0, 49, 9), obj) == 0.0);
  // 200 px, the left 100 inside
  CHECK(containment_ratio(box_mask(64, 64, 22, 0, 41, 9), obj) == doctest::Approx(0.5));
  CHECK_THROWS_AS(containment_ratio(Mask2D(64, 64), obj), InputError);
  CHECK(containment_ratio(obj, obj) == 1.0);

  CHECK(mask_overlap(inside, inside) == 1.0);
  CHECK(mask_overlap(inside, box_mask(64, 64, 40, 40, 49, 49)) == 0.0);
  Mask2D a(64, 64), b(64, 64);
  for (int i = 0; i < 100; ++i) a.set_pixel(static_cast<std::size_t>(i));
  for (int i = 50; i < 350; ++i) b.set_pixel(static_cast<std::size_t>(i));
  CHECK(mask_overlap(a, b) == doctest::Approx(0.5));
  CHECK(mask_overlap(b, a) == mask_overlap(a, b));
}

TEST_CASE("crop_to_mask pads and clips") {
  auto m = box_mask(64, 64, 10, 10, 20, 20);
  CHECK(crop_to_mask(m, 5) == Region{5, 5, 25, 25});
  CHECK(crop_to_mask(m, 0) == Region{10, 10, 20, 20});
  CHECK(crop_to_mask(box_mask(64, 64, 0, 0, 3, 3), 10) == Region{0, 0, 13, 13});
  CHECK_THROWS_AS(crop_to_mask(Mask2D(64, 64), 2), InputError);
}

TEST_CASE("png round trips for masks and millimetre depth") {
  const auto dir = testing_support::scratch_dir("png");
  auto m = box_mask(30, 20, 3, 4, 10, 12);
  write_mask_png(dir / "m.png", m);
  CHECK(read_mask_png(dir / "m.png") == m);
  DepthImage d = flat_depth(30, 20, 0.0f);
  d.meters[5] = 0.123f;
  d.meters[7] = 1.5f;
  write_depth_png(dir / "d.png", d);
  auto back = read_depth_png(dir / "d.png");
  CHECK(back.meters[5] == doctest::Approx(0.123).epsilon(1e-6));
  CHECK(back.meters[7] == doctest::Approx(1.5));
  CHECK(back.meters[0] == 0.0f);
}

}  // TEST_SUITE geometry

TEST_SUITE("dataset") {

TEST_CASE("taxonomy has the twelve classes") {
  const auto& t = dataset::taxonomy();
  CHECK(t.size() == 12);
  CHECK(*t.parts("hammer") == std::vector<std::string>{"handle", "head"});
  CHECK(*t.parts("screwdriver") == std::vector<std::string>{"handle", "shaft", "tip"});
  CHECK(*t.parts("spraying bottle") == std::vector<std::string>{"nozzle", "trigger", "body"});
  CHECK(*t.parts("stapler") == std::vector<std::string>{"base", "upper arm"});
  CHECK(t.parts("laptop") == nullptr);
  CHECK(dataset::merged_label("screwdriver", {"tip", "shaft"}) == "shaft+tip");
  CHECK(dataset::label_covers("shaft+tip", "tip"));
  CHECK_FALSE(dataset::label_covers("shaft+tip", "handle"));
}

TEST_CASE("task pairs") {
  const auto& p = dataset::task_pairs();
  CHECK(p.size() == 16);
  int unconventional = 0;
  for (const auto& t : p) unconventional += t.conventionality == dataset::Conventionality::kUnconventional;
  CHECK(unconventional == 4);
  using C = dataset::Conventionality;
  CHECK(dataset::find_task_pair("screwdriver", "play xylophone")->conventionality == C::kUnconventional);
  CHECK(dataset::find_task_pair("stapler", "staple")->conventionality == C::kConventionalComplex);
  CHECK(dataset::find_task_pair("hammer", "hammer")->conventionality == C::kConventionalEasy);
}

TEST_CASE("loading a fixture dataset") {
  auto entries = testing_support::fixture("hammer_perfect", {.classes = {"hammer"}, .instances = 2, .poses = 2});
  REQUIRE(entries.size() == 4);
  CHECK(entries[0].key() == "hammer/hammer_00/p0");
  CHECK(entries[3].key() == "hammer/hammer_01/p1");
  for (const auto& e : entries) {
    REQUIRE(e.gt_parts.size() == 2);
    for (const auto& p : e.gt_parts) {
      CHECK(geometry::intersection_count(p.mask, e.object_mask) == p.mask.count());
    }
    // Hard-label view is disjoint.
    auto hard = dataset::hard_label_view(e);
    CHECK(geometry::intersection_count(hard[0].mask, hard[1].mask) == 0);
  }
  auto again = dataset::load_dataset(testing_support::fixture_root("hammer_perfect"));
  CHECK(again == entries);
}

TEST_CASE("load errors name the entry") {
  const auto dir = testing_support::scratch_dir("bad_manifest");
  {
    std::ofstream(dir / "dataset.json") << R"({"format":"handover-dataset/1","entries":[]})";
  }
  CHECK(dataset::load_dataset(dir).empty());

  dataset::synthetic::write_fixture_dataset(dir, {.classes = {"mug"}});
  auto doc = nlohmann::json::parse(std::ifstream(dir / "dataset.json"));
  doc["entries"][0]["parts"]["blade"] = doc["entries"][0]["parts"]["body"];
  std::ofstream(dir / "dataset.json") << doc.dump();
  try {
    dataset::load_dataset(dir);
    FAIL("expected a load error");
  } catch (const LoadError& e) {
    CHECK(std::string(e.what()).find("mug/mug_00/p0") != std::string::npos);
    CHECK(std::string(e.what()).find("blade") != std::string::npos);
  }

  doc["entries"][0]["parts"].erase("blade");
  doc["entries"][0]["depth"] = "nowhere.png";
  std::ofstream(dir / "dataset.json") << doc.dump();
  CHECK_THROWS_AS(dataset::load_dataset(dir), LoadError);
  CHECK_THROWS_AS(dataset::load_dataset(dir / "missing"), LoadError);
}

}  // TEST_SUITE dataset

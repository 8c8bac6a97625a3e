#include <doctest.h>

#include "handover/partseg.hpp"
#include "handover/reasoner/rule_based.hpp"
#include "support/fixtures.hpp"

using namespace handover;
using namespace handover::partseg;
using geometry::CameraIntrinsics;
using geometry::DepthImage;

namespace {

constexpr int kW = 200;
constexpr int kH = 150;

Mask2D rect(int u0, int v0, int u1, int v1) {
  Mask2D m(kW, kH);
  for (int v = v0; v <= v1; ++v)
    for (int u = u0; u <= u1; ++u) m.set(u, v);
  return m;
}

/// Flat 100 x 20 px object at 0.5 m, 1.67 mm per pixel.
struct FlatObject {
  CameraIntrinsics k{300, 300, 100, 75, kW, kH};
  Mask2D mask = rect(20, 50, 119, 69);
  DepthImage depth{kW, kH, std::vector<float>(kW * kH, 0.0f)};
  PointCloud cloud;
  GeomSummary summary;

  explicit FlatObject(const std::string& cls = "pan") : cls(cls) {
    for (std::size_t i = 0; i < mask.area(); ++i) {
      if (mask.test(i)) depth.meters[i] = 0.5f;
    }
    cloud = geometry::unproject(depth, k, mask);
    summary = geometry::summarize(cloud);
  }
  ObjectContext ctx() const { return {cls, &mask, &cloud, summary}; }
  std::string cls;
};

class ListBackend : public SegmentationBackend {
 public:
  explicit ListBackend(std::vector<PartHypothesis> h) : hyps_(std::move(h)) {}
  std::string_view name() const override { return "list"; }
  std::vector<PartHypothesis> propose(const BackendRequest&) override { return hyps_; }

 private:
  std::vector<PartHypothesis> hyps_;
};

void check_invariants(const SegmentationResult& r) {
  std::vector<int> seen(r.object_cloud.size(), 0);
  std::size_t total = 0;
  for (const auto& p : r.parts) {
    CHECK(p.cloud.size() == p.indices.size());
    for (std::size_t j = 0; j < p.indices.size(); ++j) {
      REQUIRE(p.indices[j] < r.object_cloud.size());
      ++seen[p.indices[j]];
      CHECK(p.cloud.pixels[j] == r.object_cloud.pixels[p.indices[j]]);
    }
    total += p.indices.size();
  }
  for (int s : seen) CHECK(s <= 1);
  const auto unassigned = static_cast<std::size_t>(std::count(seen.begin(), seen.end(), 0));
  CHECK(total + unassigned == r.object_cloud.size());
  CHECK(r.unassigned_fraction >= 0.0);
  CHECK(r.unassigned_fraction <= 1.0);
  if (!r.object_cloud.empty()) {
    CHECK(r.unassigned_fraction == doctest::Approx(static_cast<double>(unassigned) / r.object_cloud.size()));
  }
}

std::vector<std::string> labels_of(const SegmentationResult& r) {
  std::vector<std::string> out;
  for (const auto& p : r.parts) out.push_back(p.label);
  return out;
}

SegmentationResult run_segment(const dataset::DatasetEntry& e, const std::vector<std::string>& expected,
                               SegmentationTrace* trace = nullptr) {
  reasoner::RuleBasedReasoner rr;
  reasoner::Session s(rr);
  FixtureBackend b;
  return segment(SegmentInputs::from_entry(e), expected, b, s, {}, reasoner::default_compatibility(), trace);
}

}  // namespace

TEST_SUITE("partseg") {

TEST_CASE("refine keeps a slightly spilling mask and clips it") {
  FlatObject obj;
  reasoner::RuleBasedReasoner rr;
  reasoner::Session s(rr);
  // 100 px, 3 of them left of the object
  Mask2D spill = rect(20, 50, 39, 54);
  for (int u = 17; u <= 19; ++u) spill.set(u, 50);
  spill.set(39, 54, false);
  spill.set(38, 54, false);
  spill.set(37, 54, false);
  REQUIRE(spill.count() == 100);
  auto out = refine_masks(obj.ctx(), {{"handle", spill, 0.9}}, s, {}, reasoner::default_compatibility());
  REQUIRE(out.size() == 1);
  CHECK(out[0].mask.count() == 97);
  CHECK(geometry::containment_ratio(out[0].mask, obj.mask) == 1.0);
}

TEST_CASE("refine discards a mask that is mostly outside") {
  FlatObject obj;
  reasoner::RuleBasedReasoner rr;
  reasoner::Session s(rr);
  // 10 x 10, 4 columns outside
  auto out = refine_masks(obj.ctx(), {{"handle", rect(14, 50, 23, 59), std::nullopt}}, s, {},
                          reasoner::default_compatibility());
  CHECK(out.empty());
  const Mask2D empty(kW, kH);
  CHECK_THROWS_AS(refine_masks({"pan", &empty, &obj.cloud, obj.summary}, {}, s, {}, reasoner::default_compatibility()),
                  InputError);
}

TEST_CASE("refine resolves a pan handle/body contradiction with one winner") {
  FlatObject obj;
  reasoner::RuleBasedReasoner rr;
  reasoner::Transcript t;
  reasoner::Session s(rr, &t);
  const auto body = rect(20, 50, 99, 69);
  const auto handle = rect(50, 50, 119, 69);
  CHECK(geometry::mask_overlap(body, handle) == doctest::Approx(50.0 / 70.0));
  auto out = refine_masks(obj.ctx(), {{"body", body, 0.9}, {"handle", handle, 0.9}}, s, {},
                          reasoner::default_compatibility());
  REQUIRE(out.size() == 2);
  CHECK(geometry::intersection_count(out[0].mask, out[1].mask) == 0);
  // Overlap centroid sits nearer the handle centroid.
  CHECK(out[1].mask == handle);
  CHECK(out[0].mask == rect(20, 50, 49, 69));
  CHECK(t.size() == 1);
}

TEST_CASE("refine leaves compatible overlaps alone") {
  FlatObject obj("mug");
  reasoner::RuleBasedReasoner rr;
  reasoner::Transcript t;
  reasoner::Session s(rr, &t);
  const auto body = rect(20, 50, 99, 69);
  const auto rim = rect(50, 50, 119, 69);
  auto out = refine_masks(obj.ctx(), {{"body", body, 0.9}, {"rim", rim, 0.9}}, s, {}, reasoner::default_compatibility());
  REQUIRE(out.size() == 2);
  CHECK(out[0].mask == body);
  CHECK(out[1].mask == rim);
  CHECK(t.size() == 0);
}

TEST_CASE("refine merges duplicate labels and drops labels outside the class") {
  FlatObject obj;
  reasoner::RuleBasedReasoner rr;
  reasoner::Session s(rr);
  auto out = refine_masks(obj.ctx(),
                          {{"handle", rect(20, 50, 30, 60), 0.4}, {"blade", rect(40, 50, 50, 60), 0.9},
                           {"handle", rect(25, 50, 35, 60), 0.7}},
                          s, {}, reasoner::default_compatibility());
  REQUIRE(out.size() == 1);
  CHECK(out[0].label == "handle");
  CHECK(out[0].mask == (rect(20, 50, 30, 60) | rect(25, 50, 35, 60)));
  CHECK(out[0].score == 0.7);
}

TEST_CASE("detect_missing recovers the hammer head") {
  auto entries = testing_support::fixture("hammer_handle", {.classes = {"hammer"}, .profile = dataset::synthetic::BackendProfile::kHandleOnly});
  SegmentationTrace trace;
  auto r = run_segment(entries[0], {"handle", "head"}, &trace);
  CHECK(labels_of(r) == std::vector<std::string>{"handle", "head"});
  CHECK(r.unidentified.empty());
  check_invariants(r);
  REQUIRE(trace.stages.size() == 3);
  CHECK(trace.stages[0]["parts"].size() == 1);
  CHECK(trace.stages[1]["parts"].size() == 2);
  // Most of the gt head pixels end up labeled head.
  const auto* gt = entries[0].gt_mask("head");
  const auto* head = r.find("head");
  REQUIRE(head);
  CHECK(geometry::intersection_count(head->mask, *gt) > 0.9 * static_cast<double>(head->mask.count()));
}

TEST_CASE("detect_missing merges indistinguishable missing parts") {
  auto entries = testing_support::fixture("screwdriver_handle",
                                          {.classes = {"screwdriver"}, .profile = dataset::synthetic::BackendProfile::kHandleOnly});
  auto r = run_segment(entries[0], {"handle", "shaft", "tip"});
  CHECK(labels_of(r) == std::vector<std::string>{"handle", "shaft+tip"});
  check_invariants(r);
}

TEST_CASE("detect_missing with nothing missing or nothing left") {
  FlatObject obj("hammer");
  reasoner::RuleBasedReasoner rr;
  reasoner::Transcript t;
  reasoner::Session s(rr, &t);
  auto r = fuse(obj.ctx(), {{"handle", rect(20, 50, 79, 69), std::nullopt}, {"head", rect(80, 50, 119, 69), std::nullopt}});
  const auto before = r;
  detect_missing(r, {"handle", "head"}, s, {});
  CHECK(r == before);

  auto all_handle = fuse(obj.ctx(), {{"handle", obj.mask, std::nullopt}});
  detect_missing(all_handle, {"handle", "head"}, s, {});
  CHECK(labels_of(all_handle) == std::vector<std::string>{"handle"});
  CHECK(all_handle.unidentified == std::vector<std::string>{"head"});
  CHECK(t.size() == 0);
}

TEST_CASE("label_unlabeled ignores small residue, extends neighbours, adds new parts") {
  FlatObject obj("hammer");
  reasoner::RuleBasedReasoner rr;
  reasoner::Session s(rr);
  // 2 columns of 100 unlabeled: 2% < 5%
  auto r = fuse(obj.ctx(), {{"handle", rect(20, 50, 117, 69), std::nullopt}});
  const auto before = r;
  label_unlabeled(r, s, {});
  CHECK(r == before);

  // 20 unlabeled columns continuing the handle along its axis
  r = fuse(obj.ctx(), {{"handle", rect(20, 50, 99, 69), std::nullopt}});
  label_unlabeled(r, s, {});
  REQUIRE(labels_of(r) == std::vector<std::string>{"handle"});
  CHECK(r.parts[0].indices.size() == obj.cloud.size());
  CHECK(r.unassigned_fraction == 0.0);

  // A detached block off the handle axis becomes a new part.
  FlatObject tee("hammer");
  tee.mask = rect(20, 60, 89, 64) | rect(100, 20, 119, 100);
  tee.depth.meters.assign(kW * kH, 0.0f);
  for (std::size_t i = 0; i < tee.mask.area(); ++i) {
    if (tee.mask.test(i)) tee.depth.meters[i] = 0.5f;
  }
  tee.cloud = geometry::unproject(tee.depth, tee.k, tee.mask);
  tee.summary = geometry::summarize(tee.cloud);
  r = fuse(tee.ctx(), {{"handle", rect(20, 60, 89, 64), std::nullopt}});
  const auto parts_before = r.parts.size();
  label_unlabeled(r, s, {});
  CHECK(r.parts.size() == parts_before + 1);
  CHECK(r.find("new_part_1") != nullptr);
  check_invariants(r);
}

TEST_CASE("segment with a perfect backend is a fixed point of the fused output") {
  auto entries = testing_support::fixture("hammer_perfect_ps", {.classes = {"hammer"}});
  SegmentationTrace trace;
  auto r = run_segment(entries[0], {"handle", "head"}, &trace);
  REQUIRE(trace.stages.size() == 3);
  CHECK(trace.stages[1]["events"].empty());
  CHECK(trace.stages[2]["events"].empty());
  CHECK(trace.stages[0]["parts"] == trace.stages[2]["parts"]);
  CHECK(labels_of(r) == std::vector<std::string>{"handle", "head"});
  CHECK(trace.refined.size() == trace.proposals.size());
}

TEST_CASE("segment with no proposals recovers knife parts from geometry") {
  auto entries = testing_support::fixture("knife_none", {.classes = {"knife"}, .profile = dataset::synthetic::BackendProfile::kNone});
  auto r = run_segment(entries[0], {"handle", "blade"});
  const auto labels = labels_of(r);
  const bool both = labels == std::vector<std::string>{"handle", "blade"};
  const bool merged = labels == std::vector<std::string>{"handle+blade"};
  CHECK((both || merged));
  check_invariants(r);
}

TEST_CASE("segment tags stage errors") {
  auto entries = testing_support::fixture("hammer_perfect_ps", {.classes = {"hammer"}});
  auto in = SegmentInputs::from_entry(entries[0]);
  in.proposals_path = std::filesystem::path("/nonexistent/proposals.json");
  reasoner::RuleBasedReasoner rr;
  reasoner::Session s(rr);
  FixtureBackend b;
  try {
    segment(in, {"handle"}, b, s);
    FAIL("expected a backend error");
  } catch (const BackendError& e) {
    CHECK(e.stage() == "propose");
  }
  in = SegmentInputs::from_entry(entries[0]);
  in.object_mask = Mask2D(in.intrinsics.width, in.intrinsics.height);
  CHECK_THROWS_AS(segment(in, {"handle"}, b, s), InputError);
}

TEST_CASE("segmentation invariants on noisy fixtures") {
  auto entries = testing_support::fixture(
      "noisy_mix", {.classes = {"hammer", "screwdriver", "mug", "spraying bottle", "plier", "pan"},
                    .instances = 2,
                    .profile = dataset::synthetic::BackendProfile::kNoisy,
                    .seed = 17});
  reasoner::RuleBasedReasoner rr;
  for (const auto& e : entries) {
    CAPTURE(e.key());
    const auto& expected = *dataset::taxonomy().parts(e.object_class);
    reasoner::Session s(rr);
    FixtureBackend b;
    const auto in = SegmentInputs::from_entry(e);
    const auto crop = geometry::crop_to_mask(in.object_mask, 10);
    const auto cloud = geometry::unproject(in.depth, in.intrinsics, in.object_mask);
    const ObjectContext ctx{e.object_class, &in.object_mask, &cloud, geometry::summarize(cloud)};
    auto hyps = b.propose({in.rgb_path, crop, in.intrinsics.width, in.intrinsics.height, in.proposals_path});
    auto r = fuse(ctx, refine_masks(ctx, hyps, s, {}, reasoner::default_compatibility()));
    check_invariants(r);
    const double f0 = r.unassigned_fraction;
    detect_missing(r, expected, s, {});
    check_invariants(r);
    const double f1 = r.unassigned_fraction;
    label_unlabeled(r, s, {});
    check_invariants(r);
    const double f2 = r.unassigned_fraction;
    CHECK(f1 <= f0);
    CHECK(f2 <= f1);

    const auto full = segment(in, expected, b, s);
    CHECK(full == r);
    CHECK(segment(in, expected, b, s) == full);
    CHECK(rerun_stages(full, expected, s) == full);
  }
}

}  // TEST_SUITE partseg

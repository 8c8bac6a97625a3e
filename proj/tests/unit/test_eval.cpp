#include <doctest.h>

#include <random>

#include "handover/eval.hpp"
#include "handover/partseg.hpp"
#include "handover/pipeline.hpp"
#include "handover/reasoner/rule_based.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "support/process.hpp"

using namespace handover;
using geometry::Mask2D;
using ojson = nlohmann::ordered_json;
using testing_support::shell_quote;
using testing_support::run;
namespace syn = handover::dataset::synthetic;

namespace {

Mask2D mask_from(const std::vector<bool>& px, int w, int h) {
  Mask2D m(w, h);
  for (std::size_t i = 0; i < px.size(); ++i) m.set_pixel(i, px[i]);
  return m;
}

Mask2D strip(int w, int h, std::size_t from, std::size_t to) {
  Mask2D m(w, h);
  for (std::size_t i = from; i < to; ++i) m.set_pixel(i);
  return m;
}

std::string cli() { return HANDOVER_CLI; }

grasp::GraspCandidate grasp_at(const geometry::Vec3& t) {
  grasp::GraspCandidate g;
  g.translation = t;
  g.contacts = {t - geometry::Vec3(0.01, 0, 0), t + geometry::Vec3(0.01, 0, 0)};
  g.width = 0.02;
  g.approach = geometry::Vec3::UnitZ();
  return g;
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("iou and f1 examples") {
  const auto pred = strip(20, 20, 0, 100);
  const auto gt = strip(20, 20, 50, 150);
  CHECK(eval::iou(pred, gt) == doctest::Approx(50.0 / 150.0));
  CHECK(eval::f1(pred, gt) == doctest::Approx(0.5));
  CHECK(eval::iou(Mask2D(20, 20), Mask2D(20, 20)) == 1.0);
  CHECK(eval::f1(Mask2D(20, 20), Mask2D(20, 20)) == 1.0);
  CHECK(eval::iou(pred, Mask2D(20, 20)) == 0.0);
  CHECK_THROWS_AS(eval::iou(pred, Mask2D(10, 20)), InputError);
}

TEST_CASE("iou and f1 agree with the naive count and iou <= f1") {
  std::mt19937 gen(12);
  for (int trial = 0; trial < 200; ++trial) {
    const int w = 1 + static_cast<int>(gen() % 32), h = 1 + static_cast<int>(gen() % 32);
    const double pa = (gen() % 100) / 100.0, pb = (gen() % 100) / 100.0;
    oracle::Grid a{w, h, {}}, b{w, h, {}};
    std::bernoulli_distribution da(pa), db(pb);
    for (int i = 0; i < w * h; ++i) {
      a.px.push_back(da(gen));
      b.px.push_back(db(gen));
    }
    const auto ma = mask_from(a.px, w, h), mb = mask_from(b.px, w, h);
    CHECK(eval::iou(ma, mb) == doctest::Approx(oracle::iou(a, b)).epsilon(1e-12));
    CHECK(eval::f1(ma, mb) == doctest::Approx(oracle::f1(a, b)).epsilon(1e-12));
    CHECK(eval::iou(ma, mb) <= eval::f1(ma, mb) + 1e-12);
  }
}

TEST_CASE("detection rate counts parts over the IoU threshold") {
  std::vector<dataset::NamedMask> gt{{"handle", strip(30, 10, 0, 100)},
                                     {"shaft", strip(30, 10, 100, 200)},
                                     {"tip", strip(30, 10, 200, 300)}};
  auto m = eval::score_parts({{"handle", strip(30, 10, 0, 100)}, {"shaft", strip(30, 10, 100, 180)}}, gt);
  CHECK(m.detection_rate == doctest::Approx(200.0 / 3.0));
  CHECK(m.parts[2].matched_label.empty());
  CHECK_FALSE(m.parts[2].detected);
  CHECK(m.iou == doctest::Approx(100.0 * (1.0 + 0.8) / 3.0));

  // A merged label is scored against the union of its parts.
  m = eval::score_parts({{"handle", strip(30, 10, 0, 100)}, {"shaft+tip", strip(30, 10, 100, 300)}}, gt);
  CHECK(m.detection_rate == doctest::Approx(100.0));
  CHECK(m.parts[1].matched_label == "shaft+tip");
  CHECK(m.parts[2].iou == doctest::Approx(1.0));

  CHECK_THROWS_AS(eval::score_parts({}, {}), InputError);
  CHECK(eval::score_parts({}, gt).detection_rate == 0.0);
}

TEST_CASE("detection rate matches the naive name-matching count") {
  std::mt19937 gen(31);
  const std::vector<std::string> names{"handle", "shaft", "tip"};
  for (int trial = 0; trial < 100; ++trial) {
    const int w = 16, h = 16;
    std::vector<dataset::NamedMask> gt;
    std::vector<eval::LabeledMask> pred;
    std::map<std::string, oracle::Grid> og, op;
    for (const auto& n : names) {
      oracle::Grid g{w, h, {}}, p{w, h, {}};
      for (int i = 0; i < w * h; ++i) {
        g.px.push_back(gen() % 3 == 0);
        p.px.push_back(g.px.back() ? gen() % 5 != 0 : gen() % 9 == 0);
      }
      gt.push_back({n, mask_from(g.px, w, h)});
      og[n] = g;
      if (gen() % 4 != 0) {
        pred.push_back({n, mask_from(p.px, w, h)});
        op[n] = p;
      }
    }
    const double thresh = 0.3 + 0.1 * (gen() % 5);
    CHECK(eval::score_parts(pred, gt, thresh).detection_rate ==
          doctest::Approx(oracle::detection_rate(op, og, thresh)));
  }
}

TEST_CASE("grasp success is inclusive at the margin") {
  std::vector<geometry::Vec3> human{{0, 0, 0}};
  grasp::GraspCandidate g;
  g.contacts = {geometry::Vec3(0.0100, 0, 0), geometry::Vec3(0.05, 0, 0)};
  CHECK(eval::grasp_success(g, human, 0.01));
  g.contacts[0] = geometry::Vec3(0.0099, 0, 0);
  CHECK_FALSE(eval::grasp_success(g, human, 0.01));
  CHECK_THROWS_AS(eval::grasp_success(g, {}, 0.01), InputError);
}

TEST_CASE("human/robot part accuracy") {
  reasoner::TaskPlan a, b;
  a.human_grasp_part = "handle";
  a.robot_grasp_region.part = "head";
  b.human_grasp_part = "head";
  b.robot_grasp_region.part = "head";
  auto acc = eval::hr_accuracy({a, b}, {{"handle", "head"}, {"handle", "head"}});
  CHECK(acc.human == doctest::Approx(50.0));
  CHECK(acc.robot == doctest::Approx(100.0));
  CHECK_THROWS_AS(eval::hr_accuracy({}, {}), InputError);
  CHECK_THROWS_AS(eval::hr_accuracy({a}, {}), InputError);
}

TEST_CASE("benchmark on handle-only hammers recovers the head") {
  auto entries = testing_support::fixture(
      "bench_hammer", {.classes = {"hammer"}, .instances = 2, .profile = syn::BackendProfile::kHandleOnly});
  reasoner::RuleBasedReasoner rr;
  partseg::FixtureBackend b;
  PipelineConfig cfg;
  auto rep = eval::run_benchmark(entries, cfg, {}, rr, b);
  REQUIRE(rep.entries.size() == 2);
  for (const auto& e : rep.entries) {
    CHECK(e.failures.empty());
    REQUIRE(e.ours);
    REQUIRE(e.baseline);
    CHECK(e.ours->detection_rate == doctest::Approx(100.0));
    CHECK(e.baseline->detection_rate == doctest::Approx(50.0));
    CHECK(e.records.size() == 3);
  }
  const auto j = eval::report_json(rep);
  CHECK(j["segmentation"].back()["object_class"] == "Mean");
  CHECK(j["task_reasoning"][0]["human"] == 100.0);
  CHECK(j["grasp_success"].size() == 3);

  auto none = eval::run_benchmark(entries, cfg, {.methods = {}}, rr, b);
  for (const auto& e : none.entries) {
    CHECK(e.records.empty());
    CHECK(e.ours.has_value());
  }
  CHECK_THROWS_AS(eval::run_benchmark(entries, cfg, {.methods = {"best"}}, rr, b), InputError);
}

TEST_CASE("benchmark reports are deterministic across runs and job counts") {
  auto entries = testing_support::fixture(
      "bench_mix", {.classes = {"hammer", "mug", "screwdriver"}, .profile = syn::BackendProfile::kNoisy, .seed = 3});
  reasoner::RuleBasedReasoner rr;
  partseg::FixtureBackend b;
  PipelineConfig cfg;
  const eval::BenchmarkOptions opt{{"ours", "heuristic", "planner-first", "ours-nG", "ours-nH"}, 1};
  const auto a = eval::report_json(eval::run_benchmark(entries, cfg, opt, rr, b)).dump();
  const auto c = eval::report_json(eval::run_benchmark(entries, cfg, opt, rr, b)).dump();
  auto par = opt;
  par.jobs = 3;
  const auto d = eval::report_json(eval::run_benchmark(entries, cfg, par, rr, b)).dump();
  CHECK(a == c);
  CHECK(a == d);
}

TEST_CASE("reports render and compare") {
  auto entries = testing_support::fixture("bench_hammer", {});
  reasoner::RuleBasedReasoner rr;
  partseg::FixtureBackend b;
  PipelineConfig cfg;
  const auto j = eval::report_json(eval::run_benchmark(entries, cfg, {}, rr, b));
  const auto text = eval::render_text(j);
  CHECK(text.find("hammer") != std::string::npos);
  CHECK(text.find("Mean") != std::string::npos);
  const auto csv = eval::render_csv(j);
  CHECK(csv.rfind("section,method,group,metric,value\n", 0) == 0);
  CHECK_NOTHROW(eval::compare_reports(j, j, false));
  auto other = j;
  other["config_fingerprint"] = "0000000000000000";
  CHECK_THROWS_AS(eval::compare_reports(j, other, false), InputError);
  CHECK_NOTHROW(eval::compare_reports(j, other, true));
}

TEST_CASE("method names") {
  CHECK(eval::parse_method("ours-nH") == std::pair{pipeline::Method::kOurs, pipeline::Ablation::kNoHumanPart});
  CHECK(eval::parse_method("planner-first").first == pipeline::Method::kPlannerFirst);
  CHECK_THROWS_AS(eval::parse_method("heuristic-nG"), InputError);
  CHECK(eval::task_group({"hammer", "hammer", dataset::Conventionality::kConventionalEasy}) == "easy");
  CHECK(eval::task_group({"screwdriver", "hammer", dataset::Conventionality::kUnconventional}) == "screwdriver/hammer");
}

}  // TEST_SUITE eval

TEST_SUITE("pipeline") {

TEST_CASE("config round-trips and rejects unknown keys") {
  PipelineConfig c;
  c.fps_k = 7;
  c.seed = 99;
  c.partseg.containment_tol = 0.08;
  c.handover_position = {0.4, 0.1, 0.2};
  const auto back = config_from_json(nlohmann::json::parse(to_json(c).dump()));
  CHECK(to_json(back) == to_json(c));
  CHECK(fingerprint(back) == fingerprint(c));
  CHECK(fingerprint(PipelineConfig{}) != fingerprint(c));
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"kk", 3}}), InputError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"k", 0}}), InputError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"base_to_human", {0, 0, 2}}}), InputError);
}

TEST_CASE("hammer a nail: the robot takes the head") {
  auto entries = testing_support::fixture("pipe_hammer", {.classes = {"hammer"}});
  reasoner::RuleBasedReasoner rr;
  partseg::FixtureBackend b;
  ojson trace;
  auto res = pipeline::run_pipeline(entries[0], "hammer a nail", {}, rr, b, {}, trace);
  CHECK(res.plan.human_grasp_part == "handle");
  CHECK(res.grasp_part == "head");
  CHECK(trace["selection"]["grasp_part"] == "head");
  CHECK(trace["format"] == "handover-trace/1");
  for (const char* key : {"task_plan", "segmentation", "grasp_rounds", "selection", "handover", "reasoner_queries"}) {
    CHECK(trace.contains(key));
  }
  const auto& q = res.pose.rotation;
  const geometry::Vec3 human(trace["handover"]["human_grasp_point"][0].get<double>(),
                             trace["handover"]["human_grasp_point"][1].get<double>(),
                             trace["handover"]["human_grasp_point"][2].get<double>());
  CHECK((q * (human - res.grasp.translation).normalized() - geometry::Vec3(1, 0, 0)).norm() < 1e-3);  // trace point is rounded

  ojson again;
  pipeline::run_pipeline(entries[0], "hammer a nail", {}, rr, b, {}, again);
  CHECK(again.dump() == trace.dump());
}

TEST_CASE("nH ablation leaves the human part out of the grasp query") {
  auto entries = testing_support::fixture("pipe_hammer", {.classes = {"hammer"}});
  reasoner::RuleBasedReasoner rr;
  partseg::FixtureBackend b;
  ojson trace;
  pipeline::run_pipeline(entries[0], "hammer", {}, rr, b, {.ablation = pipeline::Ablation::kNoHumanPart}, trace);
  bool saw = false;
  for (const auto& q : trace["reasoner_queries"]) {
    if (q["kind"] != "grasp_choice") continue;
    saw = true;
    CHECK_FALSE(q["supporting_information"].contains("human_grasp_part"));
  }
  CHECK(saw);
}

TEST_CASE("clustered external grasps fail the gate after every retrigger") {
  auto entries = testing_support::fixture("pipe_hammer", {.classes = {"hammer"}});
  const auto dir = testing_support::scratch_dir("clustered");
  std::vector<grasp::GraspCandidate> gs;
  for (int i = 0; i < 8; ++i) gs.push_back(grasp_at({0.001 * i, 0, 0.5}));
  std::ofstream(dir / "g.json") << grasp::grasps_to_json(gs).dump();
  reasoner::RuleBasedReasoner rr;
  partseg::FixtureBackend b;
  PipelineConfig cfg;
  ojson trace;
  CHECK_THROWS_AS(pipeline::run_pipeline(entries[0], "hammer", cfg, rr, b, {.grasps_file = dir / "g.json"}, trace),
                  SelectionError);
  REQUIRE(trace.contains("grasp_rounds"));
  CHECK(trace["grasp_rounds"].size() == 1 + static_cast<std::size_t>(cfg.regenerations));
  CHECK(trace.contains("reasoner_queries"));
  CHECK_FALSE(trace.contains("selection"));
}

TEST_CASE("retriggering stops at the first diverse round") {
  int calls = 0;
  pipeline::CandidateSource src = [&](std::uint64_t) {
    ++calls;
    if (calls < 3) return std::vector<grasp::GraspCandidate>{grasp_at({0, 0, 0}), grasp_at({0.01, 0, 0})};
    return std::vector<grasp::GraspCandidate>{grasp_at({0, 0, 0}), grasp_at({0.2, 0, 0})};
  };
  auto p = pipeline::propose_grasps(src, 0.3, 1, {});
  CHECK(p.passed);
  CHECK(p.rounds.size() == 3);
  CHECK(calls == 3);
}

TEST_CASE("planner-first takes the generator's first grasp") {
  auto entries = testing_support::fixture("pipe_hammer", {.classes = {"hammer"}});
  reasoner::RuleBasedReasoner rr;
  partseg::FixtureBackend b;
  ojson trace;
  auto res = pipeline::run_pipeline(entries[0], "hammer", {}, rr, b, {.method = pipeline::Method::kPlannerFirst}, trace);
  PipelineConfig cfg;
  reasoner::Session session(rr);
  const auto scene = pipeline::prepare_scene(entries[0], res.plan.relevant_parts, b, session, cfg);
  const auto p = pipeline::propose_grasps(pipeline::generator_source(scene.completed.points, cfg),
                                          scene.segmentation.object_summary.dominant_length,
                                          pipeline::scene_seed(cfg, entries[0]), cfg);
  REQUIRE_FALSE(p.candidates.empty());
  CHECK(res.grasp == p.candidates.front());
  CHECK(trace["method"] == "planner-first");
}

}  // TEST_SUITE pipeline

TEST_SUITE("cli") {

TEST_CASE("taxonomy listing") {
  auto r = run(shell_quote(cli()) + " taxonomy");
  CHECK(r.exit_code == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 12);
  r = run(shell_quote(cli()) + " taxonomy --json");
  CHECK(r.exit_code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j.size() == 12);
}

TEST_CASE("bad invocations exit with the input error code") {
  CHECK(run(shell_quote(cli()) + " taxonomy --bogus").exit_code == 2);
  CHECK(run(shell_quote(cli()) + " eval --dataset /nonexistent/root").exit_code == 2);
  CHECK(run(shell_quote(cli())).exit_code == 2);

  const auto dir = testing_support::scratch_dir("cli_missing_depth");
  syn::write_fixture_dataset(dir, {.classes = {"hammer"}});
  std::filesystem::remove(dir / "hammer/hammer_00/p0/depth.png");
  CHECK(run(shell_quote(cli()) + " segment --dataset " + shell_quote(dir.string()) + " --entry 0").exit_code == 2);
}

TEST_CASE("pipeline over the CLI is byte-for-byte repeatable") {
  testing_support::fixture("cli_hammer", {.classes = {"hammer"}});
  const auto root = testing_support::fixture_root("cli_hammer").string();
  const auto dir = testing_support::scratch_dir("cli_pipe");
  const std::string base = shell_quote(cli()) + " pipeline --dataset " + shell_quote(root) + " --entry hammer/hammer_00/p0 --task " +
                           shell_quote("hammer a nail") + " --out ";
  CHECK(run(base + shell_quote((dir / "a.json").string())).exit_code == 0);
  CHECK(run(base + shell_quote((dir / "b.json").string())).exit_code == 0);
  const auto a = testing_support::read_file((dir / "a.json").string());
  CHECK_FALSE(a.empty());
  CHECK(a == testing_support::read_file((dir / "b.json").string()));
  auto j = nlohmann::json::parse(a);
  CHECK(j["status"] == "ok");
  CHECK(j["trace"]["selection"]["grasp_part"] == "head");
}

TEST_CASE("pipeline with a failing gate exits 3 and still writes the trace") {
  testing_support::fixture("cli_hammer", {.classes = {"hammer"}});
  const auto root = testing_support::fixture_root("cli_hammer").string();
  const auto dir = testing_support::scratch_dir("cli_gate");
  std::vector<grasp::GraspCandidate> gs;
  for (int i = 0; i < 6; ++i) gs.push_back(grasp_at({0.001 * i, 0, 0.5}));
  std::ofstream(dir / "g.json") << grasp::grasps_to_json(gs).dump();
  const auto r = run(shell_quote(cli()) + " pipeline --dataset " + shell_quote(root) + " --entry 0 --task hammer --grasps-file " +
                     shell_quote((dir / "g.json").string()) + " --out " + shell_quote((dir / "out.json").string()));
  CHECK(r.exit_code == 3);
  auto j = nlohmann::json::parse(testing_support::read_file((dir / "out.json").string()));
  CHECK(j["status"] == "error");
  CHECK(j["trace"]["grasp_rounds"].size() == 4);
}

TEST_CASE("eval with chosen methods, determinism and compare") {
  testing_support::fixture("cli_hammer", {.classes = {"hammer"}});
  const auto root = testing_support::fixture_root("cli_hammer").string();
  const auto dir = testing_support::scratch_dir("cli_eval");
  const std::string base = shell_quote(cli()) + " eval --dataset " + shell_quote(root) + " --methods heuristic,ours --out ";
  REQUIRE(run(base + shell_quote((dir / "a.json").string())).exit_code == 0);
  REQUIRE(run(base + shell_quote((dir / "b.json").string()) + " --jobs 2").exit_code == 0);
  const auto a = testing_support::read_file((dir / "a.json").string());
  CHECK(a == testing_support::read_file((dir / "b.json").string()));
  auto j = nlohmann::json::parse(a);
  REQUIRE(j["grasp_success"].size() == 2);
  CHECK(j["grasp_success"][0]["method"] == "heuristic");
  CHECK(j["grasp_success"][1]["method"] == "ours");

  CHECK(run(shell_quote(cli()) + " compare " + shell_quote((dir / "a.json").string()) + " " + shell_quote((dir / "b.json").string()))
            .exit_code == 0);
  REQUIRE(run(shell_quote(cli()) + " eval --dataset " + shell_quote(root) + " --k 3 --out " + shell_quote((dir / "c.json").string()))
              .exit_code == 0);
  const std::string cmp =
      shell_quote(cli()) + " compare " + shell_quote((dir / "a.json").string()) + " " + shell_quote((dir / "c.json").string());
  CHECK(run(cmp).exit_code == 2);
  CHECK(run(cmp + " --force").exit_code == 0);
}

TEST_CASE("synth writes a loadable dataset") {
  const auto dir = testing_support::scratch_dir("cli_synth");
  REQUIRE(run(shell_quote(cli()) + " synth --out " + shell_quote(dir.string()) + " --classes hammer,knife --poses 2").exit_code == 0);
  const auto entries = dataset::load_dataset(dir);
  CHECK(entries.size() == 4);
  const auto seg = run(shell_quote(cli()) + " segment --dataset " + shell_quote(dir.string()) + " --entry knife/knife_00/p1");
  CHECK(seg.exit_code == 0);
  CHECK(nlohmann::json::parse(seg.out)["parts"].size() == 2);
}

}  // TEST_SUITE cli

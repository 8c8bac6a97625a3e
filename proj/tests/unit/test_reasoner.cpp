#include <doctest.h>

#include <fstream>
#include <sstream>

#include "handover/reasoner.hpp"
#include "support/mock_llm.hpp"

using namespace handover;
using namespace handover::reasoner;
using geometry::Vec3;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ShapeInfo shape_at(const Vec3& c, std::size_t n = 100) { return {n, c, std::nullopt}; }

ShapeInfo rod(const Vec3& from, const Vec3& to, int n = 50) {
  std::vector<Vec3> pts;
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1);
    pts.push_back(from + t * (to - from) + Vec3(0, 0.001 * (i % 3), 0.0005 * (i % 2)));
  }
  return describe(pts);
}

CandidateView candidate(const Vec3& t, std::optional<double> clearance = std::nullopt) {
  CandidateView c;
  c.translation = t;
  c.width = 0.03;
  c.contacts = {t + Vec3(0, 0.015, 0), t - Vec3(0, 0.015, 0)};
  c.clearance = clearance;
  return c;
}

}  // namespace

TEST_SUITE("reasoner") {

TEST_CASE("embedded resources match the data directory") {
  const std::filesystem::path data = std::filesystem::path(HANDOVER_SOURCE_DIR) / "data";
  CHECK(resources::kKnowledgeJson == slurp(data / "knowledge.json"));
  CHECK(resources::kCompatibilityJson == slurp(data / "part_compatibility.json"));
  CHECK(resources::kSystemPrompt == slurp(data / "prompts/system.txt"));
  CHECK(resources::kQueryTemplate == slurp(data / "prompts/query.txt"));
  CHECK(resources::kTaskPlanTemplate == slurp(data / "prompts/task_plan.txt"));
  CHECK(resources::kPartLabelTemplate == slurp(data / "prompts/part_label.txt"));
  CHECK(resources::kPartAssignmentTemplate == slurp(data / "prompts/part_assignment.txt"));
  CHECK(resources::kUnlabeledPartTemplate == slurp(data / "prompts/unlabeled_part.txt"));
  CHECK(resources::kGraspChoiceTemplate == slurp(data / "prompts/grasp_choice.txt"));
  CHECK(resources::kRepairTemplate == slurp(data / "prompts/repair.txt"));
}

TEST_CASE("schema validation") {
  const json schema = {{"type", "object"},
                       {"properties", {{"i", {{"type", "integer"}, {"minimum", 0}, {"maximum", 4}}},
                                       {"s", {{"type", "string"}, {"enum", {"a", "b"}}}},
                                       {"l", {{"type", "array"}, {"items", {{"type", "string"}}}, {"minItems", 1}, {"uniqueItems", true}}}}},
                       {"required", {"i"}},
                       {"additionalProperties", false}};
  CHECK(validate_schema(schema, json{{"i", 2}}).empty());
  CHECK(validate_schema(schema, json{{"i", 2}, {"s", "a"}, {"l", {"x", "y"}}}).empty());
  CHECK(validate_schema(schema, json::object()).size() == 1);
  CHECK(validate_schema(schema, json{{"i", 7}}).size() == 1);
  CHECK(validate_schema(schema, json{{"i", -1}}).size() == 1);
  CHECK(validate_schema(schema, json{{"i", 1.5}}).size() == 1);
  CHECK(validate_schema(schema, json{{"i", 1}, {"s", "c"}}).size() == 1);
  CHECK(validate_schema(schema, json{{"i", 1}, {"l", json::array()}}).size() == 1);
  CHECK(validate_schema(schema, json{{"i", 1}, {"l", {"x", "x"}}}).size() == 1);
  CHECK(validate_schema(schema, json{{"i", 1}, {"extra", 0}}).size() == 1);
  CHECK_FALSE(validate_schema(schema, json::array()).empty());
}

TEST_CASE("task reasoning on conventional and unconventional pairs") {
  RuleBasedReasoner r;
  Transcript t;
  Session s(r, &t);
  auto pan = task_reasoning({"pan", "cook"}, s);
  CHECK(pan.human_grasp_part == "handle");
  CHECK(pan.robot_grasp_region.part == "body");
  auto hammer = task_reasoning({"hammer", "hammer a nail"}, s);
  CHECK(hammer.human_grasp_part == "handle");
  CHECK(hammer.robot_grasp_region.part == "head");
  auto mug = task_reasoning({"mug", "drink"}, s);
  CHECK(mug.human_grasp_part == "handle");
  auto xylo = task_reasoning({"screwdriver", "play xylophone"}, s);
  CHECK(xylo.human_grasp_part == "handle");
  CHECK(xylo.robot_grasp_region.part == "shaft");
  for (const auto& p : {pan, hammer, mug, xylo}) {
    CHECK(std::find(p.relevant_parts.begin(), p.relevant_parts.end(), p.human_grasp_part) != p.relevant_parts.end());
    CHECK_FALSE(p.post_task_description.empty());
  }
  CHECK(t.size() == 4);
  CHECK_THROWS_AS(task_reasoning({"hammer", ""}, s), InputError);
  // Unknown class: no part list to reason over.
  CHECK_THROWS_AS(task_reasoning({"laptop", "type"}, s), ReasonerError);
}

TEST_CASE("task plan query carries every section") {
  auto q = task_plan_query({"knife", "cut"});
  const auto p = render_prompt(q);
  const auto td = p.user.find("(TD)");
  const auto si = p.user.find("(SI)");
  const auto os = p.user.find("(OS)");
  REQUIRE(td != std::string::npos);
  CHECK(td < si);
  CHECK(si < os);
  CHECK(p.user.find("\"knife\"") != std::string::npos);
  CHECK(p.user.find("human_grasp_part") > os);
}

TEST_CASE("contradiction goes to the candidate nearer the overlap") {
  RuleBasedReasoner r;
  Session s(r);
  ContradictionInput in{"pan", shape_at({0, 0, 0.5}), "handle", shape_at({0.15, 0, 0.5}), "body",
                        shape_at({-0.05, 0, 0.5}), 120, shape_at({0.1, 0, 0.5})};
  CHECK(resolve_contradiction(in, s) == "handle");
  in.overlap = shape_at({-0.02, 0, 0.5});
  CHECK(resolve_contradiction(in, s) == "body");
  in.label_b = "handle";
  CHECK(resolve_contradiction(in, s) == "handle");
}

TEST_CASE("compatibility table") {
  const auto& c = default_compatibility();
  CHECK_FALSE(c.compatible("pan", "handle", "body"));
  CHECK(c.compatible("mug", "body", "rim"));
}

TEST_CASE("cluster assignment follows part order along the axis") {
  RuleBasedReasoner r;
  Session s(r);
  AssignmentInput in;
  in.object_class = "screwdriver";
  in.object = shape_at({0, 0, 0.5});
  in.known_parts = {{"handle", -1, shape_at({-0.05, 0, 0.5}), 0.2}};
  in.missing_parts = {"shaft", "tip"};
  in.clusters = {{"", 0, shape_at({0.06, 0, 0.5}), 0.75}};
  auto a = assign_cluster_labels(in, s);
  REQUIRE(a.labels.size() == 1);
  // One cluster for two missing parts: the reasoner may merge or pick the first.
  CHECK((a.labels[0].second == "shaft" || a.labels[0].second == "shaft+tip"));

  in.clusters = {{"", 3, shape_at({0.09, 0, 0.5}), 0.95}, {"", 1, shape_at({0.04, 0, 0.5}), 0.6}};
  a = assign_cluster_labels(in, s);
  REQUIRE(a.labels.size() == 2);
  CHECK(a.labels[0] == std::pair<int, std::string>{3, "tip"});
  CHECK(a.labels[1] == std::pair<int, std::string>{1, "shaft"});

  // Handle at the far end flips the order.
  in.known_parts[0].axis_position = 0.8;
  a = assign_cluster_labels(in, s);
  CHECK(a.labels[0].second == "shaft");
  CHECK(a.labels[1].second == "tip");

  in.clusters.clear();
  CHECK(assign_cluster_labels(in, s).labels.empty());
}

TEST_CASE("unlabeled region extends an adjacent collinear part or becomes new") {
  RuleBasedReasoner r;
  Session s(r);
  UnlabeledInput in;
  in.object_class = "hammer";
  in.object = shape_at({0, 0, 0.5});
  in.cluster = shape_at({0.12, 0, 0.5}, 40);
  in.parts = {{"handle", rod({-0.1, 0, 0.5}, {0.1, 0, 0.5}), 0.002, 0.003}};
  in.new_label = "head";
  CHECK(classify_unlabeled(in, s) == "handle");
  in.parts[0].min_distance = 0.05;
  CHECK(classify_unlabeled(in, s) == "head");
  in.parts[0].min_distance = 0.002;
  in.parts[0].axis_offset = 0.08;
  CHECK(classify_unlabeled(in, s) == "head");
  in.cluster.point_count = 0;
  CHECK_THROWS_AS(classify_unlabeled(in, s), InputError);
}

TEST_CASE("grasp choice keeps the human part free") {
  RuleBasedReasoner r;
  Session s(r);
  GraspChoiceInput in;
  in.object_class = "hammer";
  in.task_text = "hammer";
  in.object = shape_at({0, 0, 0.5});
  in.parts = {{"handle", shape_at({-0.06, 0, 0.5})}, {"head", shape_at({0.1, 0, 0.5})}};
  in.human_part = "handle";
  in.candidates = {candidate({-0.06, 0, 0.5}, 0.0), candidate({0.1, 0, 0.5}, 0.03), candidate({0.0, 0, 0.5}, 0.001)};
  CHECK(choose_grasp(in, s) == 1);

  // Without geometry only part centroids remain; the head grasp still wins.
  in.include_geometry = false;
  CHECK(choose_grasp(in, s) == 1);
  auto q = grasp_choice_query(in);
  CHECK_FALSE(q.supporting_info.contains("object"));
  CHECK_FALSE(q.supporting_info["candidates"][0].contains("clearance_to_human_part"));

  in.candidates.resize(1);
  CHECK(choose_grasp(in, s) == 0);
  in.candidates.clear();
  CHECK_THROWS_AS(choose_grasp(in, s), InputError);
}

TEST_CASE("grasp choice without a human part leaves it out of the query") {
  GraspChoiceInput in;
  in.object_class = "hammer";
  in.task_text = "hammer";
  in.object = shape_at({0, 0, 0.5});
  in.parts = {{"handle", shape_at({-0.06, 0, 0.5})}, {"head", shape_at({0.1, 0, 0.5})}};
  in.candidates = {candidate({-0.06, 0, 0.5}, 0.0), candidate({0.1, 0, 0.5}, 0.03)};
  auto q = grasp_choice_query(in);
  CHECK_FALSE(q.supporting_info.contains("human_grasp_part"));
  CHECK(q.supporting_info.dump().find("clearance") == std::string::npos);
}

TEST_CASE("rule answers depend only on the query") {
  RuleBasedReasoner a, b;
  for (const auto& t : dataset::task_pairs()) {
    auto q = task_plan_query(t);
    CHECK(a.answer(q).value == b.answer(q).value);
    CHECK(a.answer(q).value == a.answer(q).value);
  }
}

TEST_CASE("fixed-point rendering of supporting information") {
  json j = {{"c", vec_json(Vec3(0.123456, -0.00001, 2))}, {"n", 3}};
  CHECK(render_fixed(j, 0).find("0.1235") != std::string::npos);
  CHECK(render_fixed(j).find("-0.0000") == std::string::npos);
  CHECK(round4(0.00004) == 0.0);
}

}  // TEST_SUITE reasoner

TEST_SUITE("remote") {

TEST_CASE("schema-valid reply parses") {
  testing_support::MockLlm mock({R"({"grasp_index": 2})"});
  RemoteReasoner r(mock.config());
  Session s(r);
  GraspChoiceInput in;
  in.object_class = "hammer";
  in.task_text = "hammer";
  in.object = shape_at({0, 0, 0.5});
  in.parts = {{"handle", shape_at({-0.06, 0, 0.5})}};
  for (int i = 0; i < 5; ++i) in.candidates.push_back(candidate({0.02 * i, 0, 0.5}));
  CHECK(choose_grasp(in, s) == 2);
  CHECK(mock.requests().size() == 1);
}

TEST_CASE("fenced reply is accepted") {
  testing_support::MockLlm mock({"```json\n{\"label\": \"body\"}\n```"});
  RemoteReasoner r(mock.config());
  Session s(r);
  ContradictionInput in{"pan", shape_at({0, 0, 0.5}), "handle", shape_at({0.1, 0, 0.5}), "body",
                        shape_at({0, 0, 0.5}), 10, shape_at({0.05, 0, 0.5})};
  CHECK(resolve_contradiction(in, s) == "body");
}

TEST_CASE("prose reply exhausts exactly three retries") {
  testing_support::MockLlm mock({"The handle is the best choice."});
  RemoteReasoner r(mock.config());
  Transcript t;
  Session s(r, &t);
  CHECK_THROWS_AS(task_reasoning({"hammer", "hammer"}, s), RetriesExhaustedError);
  CHECK(mock.requests().size() == 4);
  // Each retry replays the conversation plus a repair message.
  CHECK(mock.requests()[3]["messages"].size() == 2 + 2 * 3);
  REQUIRE(t.size() == 1);
  CHECK(t.to_json()[0]["attempts"].size() == 4);
  CHECK(t.to_json()[0].contains("error"));
}

TEST_CASE("out-of-range index is a violation that triggers a retry") {
  testing_support::MockLlm mock({R"({"grasp_index": 7})", R"({"grasp_index": 4})"});
  RemoteReasoner r(mock.config());
  Session s(r);
  GraspChoiceInput in;
  in.object_class = "hammer";
  in.task_text = "hammer";
  in.object = shape_at({0, 0, 0.5});
  for (int i = 0; i < 5; ++i) in.candidates.push_back(candidate({0.02 * i, 0, 0.5}));
  CHECK(choose_grasp(in, s) == 4);
  REQUIRE(mock.requests().size() == 2);
  const auto repair = mock.requests()[1]["messages"].back()["content"].get<std::string>();
  CHECK(repair.find("$.grasp_index") != std::string::npos);
}

TEST_CASE("cross-field rule violations also retry") {
  testing_support::MockLlm mock(
      {R"({"post_task_description":"x","relevant_parts":["head"],"human_grasp_part":"handle","robot_grasp_region":{"description":"head"}})",
       R"({"post_task_description":"x","relevant_parts":["handle","head"],"human_grasp_part":"handle","robot_grasp_region":{"description":"head","part":"head"}})"});
  RemoteReasoner r(mock.config());
  Session s(r);
  auto plan = task_reasoning({"hammer", "hammer"}, s);
  CHECK(plan.human_grasp_part == "handle");
  CHECK(mock.requests().size() == 2);
}

TEST_CASE("prompt sections appear in order and SI uses four decimals") {
  testing_support::MockLlm mock({R"({"label": "handle"})"});
  RemoteReasoner r(mock.config());
  Session s(r);
  ContradictionInput in{"pan", shape_at({0.0123456, 0, 0.5}), "handle", shape_at({0.1, 0, 0.5}), "body",
                        shape_at({0, 0, 0.5}), 10, shape_at({0.05, 0, 0.5})};
  resolve_contradiction(in, s);
  const auto req = mock.requests().at(0);
  CHECK(req["temperature"] == 0.0);
  CHECK(req["response_format"]["type"] == "json_schema");
  const auto user = req["messages"][1]["content"].get<std::string>();
  const auto td = user.find("### Task Description (TD)");
  const auto si = user.find("### Supporting Information (SI)");
  const auto os = user.find("### Output Structure (OS)");
  REQUIRE(td != std::string::npos);
  REQUIRE(si != std::string::npos);
  REQUIRE(os != std::string::npos);
  CHECK(td < si);
  CHECK(si < os);
  CHECK(user.find("0.0123,") != std::string::npos);
  CHECK(user.find("0.012345") == std::string::npos);
}

TEST_CASE("transport failures are reasoner errors") {
  RemoteConfig cfg;
  cfg.endpoint = "http://127.0.0.1:1/v1/chat/completions";
  cfg.timeout_s = 2;
  RemoteReasoner r(cfg);
  Session s(r);
  CHECK_THROWS_AS(task_reasoning({"hammer", "hammer"}, s), NetworkError);

  testing_support::MockLlm mock({R"({"x":1})"}, 500);
  RemoteReasoner r2(mock.config());
  Session s2(r2);
  CHECK_THROWS_AS(task_reasoning({"hammer", "hammer"}, s2), NetworkError);

  CHECK_THROWS_AS(RemoteReasoner(RemoteConfig{}), InputError);
  RemoteConfig bad;
  bad.endpoint = "ftp://x/y";
  CHECK_THROWS_AS(RemoteReasoner{bad}, InputError);
}

}  // TEST_SUITE remote

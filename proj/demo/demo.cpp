// Renders a small synthetic dataset, then plans a handover for each task
// pair of a hammer and a mug with the rule-based reasoner.

#include <cstdio>
#include <filesystem>

#include "handover/dataset/synthetic.hpp"
#include "handover/pipeline.hpp"
#include "handover/reasoner/rule_based.hpp"

using namespace handover;

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "handover_demo";
  dataset::synthetic::write_fixture_dataset(root, {.classes = {"hammer", "mug"}});
  const auto entries = dataset::load_dataset(root);

  reasoner::RuleBasedReasoner rr;
  partseg::FixtureBackend backend;
  PipelineConfig cfg;
  for (const auto& e : entries) {
    for (const auto& t : dataset::task_pairs()) {
      if (t.object_class != e.object_class) continue;
      nlohmann::ordered_json trace;
      try {
        const auto r = pipeline::run_pipeline(e, t.task_text, cfg, rr, backend, {}, trace);
        const auto q = r.pose.rotation;
        std::printf("%-22s %-16s human: %-7s robot: %-7s pose q=(%.3f %.3f %.3f %.3f)\n", e.key().c_str(),
                    t.task_text.c_str(), r.plan.human_grasp_part.c_str(), r.grasp_part.c_str(), q.w(), q.x(), q.y(),
                    q.z());
      } catch (const Error& err) {
        std::printf("%-22s %-16s failed: %s\n", e.key().c_str(), t.task_text.c_str(), err.what());
      }
    }
  }
  std::printf("dataset written to %s\n", root.string().c_str());
  return 0;
}

// Command-line front end: taxonomy, segment, pipeline, eval, compare, synth.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "handover/config.hpp"
#include "handover/dataset/synthetic.hpp"
#include "handover/eval.hpp"
#include "handover/pipeline.hpp"
#include "handover/reasoner/remote.hpp"

namespace fs = std::filesystem;
using namespace handover;
using ojson = nlohmann::ordered_json;

namespace {

struct Common {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::string reasoner;
  std::string backend;
  std::string backend_command;
  std::optional<std::size_t> k;
  std::optional<int> regenerations;
  std::optional<double> margin;
  std::optional<double> det_iou;
  bool random_tie{false};

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "JSON config file")->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "Base seed");
    app->add_option("--reasoner", reasoner, "rule or remote")->check(CLI::IsMember({"rule", "remote"}));
    app->add_option("--backend", backend, "fixture or external")->check(CLI::IsMember({"fixture", "external"}));
    app->add_option("--backend-command", backend_command, "Segmentation program for the external backend");
    app->add_option("--k", k, "Grasps kept by farthest point sampling");
    app->add_option("--regenerations", regenerations, "Extra generation rounds when the diversity gate fails");
    app->add_option("--margin", margin, "Interference margin in meters");
    app->add_option("--det-iou", det_iou, "IoU needed for a part to count as detected");
    app->add_flag("--random-tie", random_tie, "Heuristic picks at random when every grasp touches the human part");
  }

  PipelineConfig config() const {
    PipelineConfig c = config_file.empty() ? PipelineConfig{} : load_config(config_file);
    if (seed) c.seed = *seed;
    if (!reasoner.empty()) c.reasoner = reasoner;
    if (!backend.empty()) c.backend = backend;
    if (!backend_command.empty()) c.backend_command = backend_command;
    if (k) c.fps_k = *k;
    if (regenerations) c.regenerations = *regenerations;
    if (margin) c.margin = *margin;
    if (det_iou) c.det_iou_thresh = *det_iou;
    if (random_tie) c.random_tie = true;
    c.validate();
    return c;
  }
};

std::unique_ptr<reasoner::Reasoner> make_reasoner(const PipelineConfig& c) {
  if (c.reasoner == "remote") return std::make_unique<reasoner::RemoteReasoner>(reasoner::RemoteConfig{}.with_env());
  return std::make_unique<reasoner::RuleBasedReasoner>();
}

std::unique_ptr<partseg::SegmentationBackend> make_backend(const PipelineConfig& c) {
  if (c.backend == "external") return std::make_unique<partseg::ExternalProcessBackend>(c.backend_command);
  return std::make_unique<partseg::FixtureBackend>();
}

/// Entry by key ("class/instance/pose") or by position.
const dataset::DatasetEntry& pick_entry(const std::vector<dataset::DatasetEntry>& entries, const std::string& which) {
  for (const auto& e : entries) {
    if (e.key() == which) return e;
  }
  if (!which.empty() && std::all_of(which.begin(), which.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
    const auto i = std::stoul(which);
    if (i < entries.size()) return entries[i];
  }
  throw InputError("no entry '" + which + "' in the dataset");
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string safe_name(std::string s) {
  for (auto& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '-') c = '_';
  }
  return s;
}

int cmd_taxonomy(bool as_json) {
  const auto& tax = dataset::taxonomy();
  if (as_json) {
    ojson j = ojson::array();
    for (const auto& e : tax.entries()) j.push_back({{"object_class", e.object_class}, {"parts", e.parts}});
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  for (const auto& e : tax.entries()) {
    std::string line = e.object_class;
    line.resize(std::max<std::size_t>(line.size() + 1, 17), ' ');
    for (std::size_t i = 0; i < e.parts.size(); ++i) line += (i ? ", " : "") + e.parts[i];
    std::cout << line << "\n";
  }
  return 0;
}

int cmd_segment(const Common& common, const std::string& root, const std::string& which, const std::string& task,
                const std::string& out_dir) {
  const auto cfg = common.config();
  const auto entries = dataset::load_dataset(root);
  const auto& entry = pick_entry(entries, which);
  auto reasoner = make_reasoner(cfg);
  auto backend = make_backend(cfg);
  reasoner::Transcript transcript;
  reasoner::Session session(*reasoner, &transcript);

  std::vector<std::string> expected = *dataset::taxonomy().parts(entry.object_class);
  std::optional<reasoner::TaskPlan> plan;
  if (!task.empty()) {
    plan = with_stage("task_reasoning", [&] { return reasoner::task_reasoning({entry.object_class, task}, session); });
    expected = plan->relevant_parts;
  }
  const auto scene = pipeline::prepare_scene(entry, expected, *backend, session, cfg);
  const auto& seg = scene.segmentation;

  ojson j;
  j["format"] = "handover-segmentation/1";
  j["config_fingerprint"] = fingerprint(cfg);
  j["entry"] = entry.key();
  j["object_class"] = entry.object_class;
  if (plan) j["task_plan"] = reasoner::to_json(*plan);
  j["object"] = reasoner::summary_json(seg.object_summary);
  j["unassigned_fraction"] = reasoner::round4(seg.unassigned_fraction);
  j["unidentified"] = seg.unidentified;
  j["parts"] = ojson::array();
  for (std::size_t i = 0; i < seg.parts.size(); ++i) {
    const auto& p = seg.parts[i];
    ojson pj{{"label", p.label}, {"mask_pixels", p.mask.count()}, {"points", p.indices.size()}};
    const std::string stem = "part_" + std::to_string(i) + "_" + safe_name(p.label);
    if (!out_dir.empty()) {
      pj["mask"] = stem + ".png";
      pj["cloud"] = stem + ".xyz";
    }
    if (p.summary) pj["geometry"] = reasoner::summary_json(*p.summary);
    j["parts"].push_back(std::move(pj));
  }
  j["stages"] = scene.seg_trace.stages;
  j["reasoner_queries"] = transcript.to_json();

  if (out_dir.empty()) {
    std::cout << reasoner::render_fixed(j) << "\n";
    return 0;
  }
  fs::create_directories(out_dir);
  for (std::size_t i = 0; i < seg.parts.size(); ++i) {
    const auto& p = seg.parts[i];
    const std::string stem = "part_" + std::to_string(i) + "_" + safe_name(p.label);
    geometry::write_mask_png(fs::path(out_dir) / (stem + ".png"), p.mask);
    std::string xyz;
    char buf[96];
    for (const auto& q : p.cloud.points) {
      std::snprintf(buf, sizeof buf, "%.6f %.6f %.6f\n", q.x(), q.y(), q.z());
      xyz += buf;
    }
    write_text((fs::path(out_dir) / (stem + ".xyz")).string(), xyz);
  }
  write_text((fs::path(out_dir) / "segmentation.json").string(), reasoner::render_fixed(j) + "\n");
  return 0;
}

int cmd_pipeline(const Common& common, const std::string& root, const std::string& which, const std::string& task,
                 const std::string& method, const std::string& ablate, const std::string& grasps_file,
                 const std::string& out) {
  const auto cfg = common.config();
  const auto entries = dataset::load_dataset(root);
  const auto& entry = pick_entry(entries, which);
  pipeline::PipelineOptions opt;
  opt.method = pipeline::method_from_string(method);
  opt.ablation = pipeline::ablation_from_string(ablate);
  if (!grasps_file.empty()) {
    if (!fs::exists(grasps_file)) throw InputError("missing grasp file " + grasps_file);
    opt.grasps_file = grasps_file;
  }
  auto reasoner = make_reasoner(cfg);
  auto backend = make_backend(cfg);

  ojson trace;
  try {
    const auto res = pipeline::run_pipeline(entry, task, cfg, *reasoner, *backend, opt, trace);
    ojson j;
    j["format"] = "handover-pipeline/1";
    j["status"] = "ok";
    j["grasp"] = grasp::to_json(res.grasp);
    j["grasp_part"] = res.grasp_part;
    j["handover_pose"] = {{"position", reasoner::vec_json(res.pose.position)},
                          {"quaternion",
                           {res.pose.rotation.w(), res.pose.rotation.x(), res.pose.rotation.y(), res.pose.rotation.z()}}};
    j["trace"] = std::move(trace);
    write_text(out, reasoner::render_fixed(j) + "\n");
    return 0;
  } catch (const Error& e) {
    ojson j;
    j["format"] = "handover-pipeline/1";
    j["status"] = "error";
    j["error"] = {{"stage", e.stage()}, {"message", e.message()}};
    j["trace"] = std::move(trace);
    write_text(out, reasoner::render_fixed(j) + "\n");
    throw;
  }
}

int cmd_eval(const Common& common, const std::string& root, const std::string& methods, unsigned jobs,
             const std::string& out, const std::string& text_out, const std::string& csv_out) {
  const auto cfg = common.config();
  if (!fs::exists(root)) throw InputError("no dataset at " + root);
  const auto entries = dataset::load_dataset(root);
  eval::BenchmarkOptions opt;
  opt.jobs = jobs;
  opt.methods.clear();
  std::stringstream ss(methods);
  for (std::string m; std::getline(ss, m, ',');) {
    if (m.empty()) continue;
    eval::parse_method(m);
    opt.methods.push_back(m);
  }
  auto reasoner = make_reasoner(cfg);
  auto backend = make_backend(cfg);
  const auto rep = eval::run_benchmark(entries, cfg, opt, *reasoner, *backend);
  const auto j = eval::report_json(rep);
  if (!out.empty()) write_text(out, reasoner::render_fixed(j) + "\n");
  if (!csv_out.empty()) write_text(csv_out, eval::render_csv(j));
  write_text(text_out, eval::render_text(j));
  return 0;
}

int cmd_compare(const std::string& a, const std::string& b, bool force) {
  auto parse = [](const std::string& path) {
    try {
      return ojson::parse(read_text(path));
    } catch (const nlohmann::json::exception& e) {
      throw InputError("malformed report " + path + ": " + e.what());
    }
  };
  std::cout << eval::compare_reports(parse(a), parse(b), force);
  return 0;
}

int cmd_synth(const std::string& out, const std::string& classes, int instances, int poses, const std::string& profile,
              std::uint64_t seed) {
  dataset::synthetic::FixtureOptions opt;
  opt.classes.clear();
  std::stringstream ss(classes);
  for (std::string c; std::getline(ss, c, ',');) {
    if (c.empty()) continue;
    if (!dataset::taxonomy().has_class(c)) throw InputError("unknown object class '" + c + "'");
    opt.classes.push_back(c);
  }
  if (opt.classes.empty()) {
    for (const auto& e : dataset::taxonomy().entries()) opt.classes.push_back(e.object_class);
  }
  if (instances < 1 || poses < 1) throw InputError("instances and poses must be positive");
  opt.instances = instances;
  opt.poses = poses;
  opt.profile = dataset::synthetic::backend_profile_from_string(profile);
  opt.seed = seed;
  const auto manifest = dataset::synthetic::write_fixture_dataset(out, opt);
  std::cout << manifest.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Task-oriented handover grasp selection"};
  app.require_subcommand(1);

  bool tax_json = false;
  auto* tax = app.add_subcommand("taxonomy", "Print the object classes and their parts");
  tax->add_flag("--json", tax_json, "Machine-readable output");

  Common seg_common, pipe_common, eval_common;
  std::string seg_root, seg_entry, seg_task, seg_out;
  auto* seg = app.add_subcommand("segment", "Segment one observation into parts");
  seg->add_option("--dataset", seg_root, "Dataset directory or manifest")->required();
  seg->add_option("--entry", seg_entry, "Entry key class/instance/pose or index")->required();
  seg->add_option("--task", seg_task, "Post-handover task; limits the expected parts to the relevant ones");
  seg->add_option("--out", seg_out, "Output directory (masks, clouds, segmentation.json); stdout if omitted");
  seg_common.attach(seg);

  std::string p_root, p_entry, p_task, p_method = "ours", p_ablate = "none", p_grasps, p_out;
  auto* pipe = app.add_subcommand("pipeline", "Select a handover grasp for one observation and task");
  pipe->add_option("--dataset", p_root, "Dataset directory or manifest")->required();
  pipe->add_option("--entry", p_entry, "Entry key class/instance/pose or index")->required();
  pipe->add_option("--task", p_task, "Post-handover task, e.g. \"hammer a nail\"")->required();
  pipe->add_option("--method", p_method, "ours, heuristic or planner-first")
      ->check(CLI::IsMember({"ours", "heuristic", "planner-first"}));
  pipe->add_option("--ablate", p_ablate, "none, nG (no geometry) or nH (no human part)")
      ->check(CLI::IsMember({"none", "nG", "nH"}));
  pipe->add_option("--grasps-file", p_grasps, "Candidate grasps from an external planner");
  pipe->add_option("--out", p_out, "Result and trace JSON; stdout if omitted");
  pipe_common.attach(pipe);

  std::string e_root, e_methods = "ours,heuristic,planner-first", e_out, e_text, e_csv;
  unsigned e_jobs = 1;
  auto* ev = app.add_subcommand("eval", "Benchmark segmentation and grasp selection over a dataset");
  ev->add_option("--dataset", e_root, "Dataset directory or manifest")->required();
  ev->add_option("--methods", e_methods, "Comma-separated: ours, heuristic, planner-first, ours-nG, ours-nH");
  ev->add_option("--jobs", e_jobs, "Entries evaluated in parallel")->check(CLI::Range(1u, 256u));
  ev->add_option("--out", e_out, "Report JSON");
  ev->add_option("--text", e_text, "Text tables (stdout if omitted)");
  ev->add_option("--csv", e_csv, "Flat CSV rows");
  eval_common.attach(ev);

  std::string c_a, c_b;
  bool c_force = false;
  auto* cmp = app.add_subcommand("compare", "Compare two benchmark reports");
  cmp->add_option("a", c_a, "First report")->required();
  cmp->add_option("b", c_b, "Second report")->required();
  cmp->add_flag("--force", c_force, "Compare even when the configs differ");

  std::string s_out, s_classes, s_profile = "perfect";
  int s_instances = 1, s_poses = 1;
  std::uint64_t s_seed = 1;
  auto* syn = app.add_subcommand("synth", "Render a synthetic fixture dataset");
  syn->add_option("--out", s_out, "Output directory")->required();
  syn->add_option("--classes", s_classes, "Comma-separated classes (default: all)");
  syn->add_option("--instances", s_instances, "Instances per class");
  syn->add_option("--poses", s_poses, "Poses per instance");
  syn->add_option("--profile", s_profile, "Proposal profile: perfect, handle-only, none, noisy")
      ->check(CLI::IsMember({"perfect", "handle-only", "none", "noisy"}));
  syn->add_option("--seed", s_seed, "Seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ExitCode::kInputError);
  }

  try {
    if (*tax) return cmd_taxonomy(tax_json);
    if (*seg) return cmd_segment(seg_common, seg_root, seg_entry, seg_task, seg_out);
    if (*pipe) return cmd_pipeline(pipe_common, p_root, p_entry, p_task, p_method, p_ablate, p_grasps, p_out);
    if (*ev) return cmd_eval(eval_common, e_root, e_methods, e_jobs, e_out, e_text, e_csv);
    if (*cmp) return cmd_compare(c_a, c_b, c_force);
    if (*syn) return cmd_synth(s_out, s_classes, s_instances, s_poses, s_profile, s_seed);
  } catch (const ReasonerError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kReasonerFailure);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kInputError);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kPipelineFailure);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kPipelineFailure);
  }
  return 0;
}

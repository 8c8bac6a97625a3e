#pragma once

#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "handover/eval/benchmark.hpp"
#include "handover/reasoner/format.hpp"

namespace handover::eval {

struct SegRow {
  std::string object_class;
  std::size_t count{0};
  double dr{0}, f1{0}, iou{0};          // ours
  double b_dr{0}, b_f1{0}, b_iou{0};    // baseline
};

/// Per-class means, classes in alphabetical order, plus the mean of the class rows.
inline std::vector<SegRow> segmentation_table(const BenchmarkReport& rep) {
  std::map<std::string, SegRow> by_class;
  for (const auto& e : rep.entries) {
    if (!e.ours || !e.baseline) continue;
    auto& r = by_class[e.object_class];
    r.object_class = e.object_class;
    ++r.count;
    r.dr += e.ours->detection_rate;
    r.f1 += e.ours->f1;
    r.iou += e.ours->iou;
    r.b_dr += e.baseline->detection_rate;
    r.b_f1 += e.baseline->f1;
    r.b_iou += e.baseline->iou;
  }
  std::vector<SegRow> rows;
  SegRow mean{"Mean"};
  for (auto& [cls, r] : by_class) {
    const double n = static_cast<double>(r.count);
    for (double* v : {&r.dr, &r.f1, &r.iou, &r.b_dr, &r.b_f1, &r.b_iou}) *v /= n;
    rows.push_back(r);
    mean.count += r.count;
    mean.dr += r.dr;
    mean.f1 += r.f1;
    mean.iou += r.iou;
    mean.b_dr += r.b_dr;
    mean.b_f1 += r.b_f1;
    mean.b_iou += r.b_iou;
  }
  if (!rows.empty()) {
    const double n = static_cast<double>(rows.size());
    for (double* v : {&mean.dr, &mean.f1, &mean.iou, &mean.b_dr, &mean.b_f1, &mean.b_iou}) *v /= n;
    rows.push_back(mean);
  }
  return rows;
}

struct Rate {
  std::size_t hits{0};
  std::size_t total{0};
  double percent() const { return total == 0 ? 0.0 : 100.0 * static_cast<double>(hits) / static_cast<double>(total); }
};

/// H and R accuracy per result column.
inline std::map<std::string, std::pair<Rate, Rate>> reasoning_table(const BenchmarkReport& rep) {
  std::map<std::string, std::pair<Rate, Rate>> out;
  for (const auto& e : rep.entries) {
    for (const auto& t : e.tasks) {
      auto& [h, r] = out[task_group(t.spec)];
      ++h.total;
      ++r.total;
      h.hits += t.plan.human_grasp_part == t.truth.human_part;
      r.hits += t.plan.robot_grasp_region.part.value_or("") == t.truth.robot_part;
    }
  }
  return out;
}

/// Success per method and column; the "average" key pools every record.
inline std::map<std::string, std::map<std::string, Rate>> grasp_table(const BenchmarkReport& rep) {
  std::map<std::string, std::map<std::string, Rate>> out;
  for (const auto& e : rep.entries) {
    for (const auto& r : e.records) {
      for (const auto& key : {r.group, std::string("average")}) {
        auto& rate = out[r.method][key];
        ++rate.total;
        rate.hits += r.success;
      }
    }
  }
  return out;
}

inline ojson report_json(const BenchmarkReport& rep) {
  using reasoner::round4;
  ojson j;
  j["format"] = std::string(kReportFormat);
  j["config_fingerprint"] = rep.fingerprint;
  j["seed"] = rep.seed;
  j["entries"] = rep.entries.size();
  j["methods"] = rep.methods;

  ojson seg = ojson::array();
  for (const auto& r : segmentation_table(rep)) {
    seg.push_back({{"object_class", r.object_class},
                   {"samples", r.count},
                   {"ours", {{"dr", round4(r.dr)}, {"f1", round4(r.f1)}, {"iou", round4(r.iou)}}},
                   {"baseline", {{"dr", round4(r.b_dr)}, {"f1", round4(r.b_f1)}, {"iou", round4(r.b_iou)}}}});
  }
  j["segmentation"] = std::move(seg);

  const auto reasoning = reasoning_table(rep);
  ojson tr = ojson::array();
  for (const auto& g : group_order()) {
    auto it = reasoning.find(g);
    if (it == reasoning.end()) continue;
    tr.push_back({{"group", g},
                  {"pairs", it->second.first.total},
                  {"human", round4(it->second.first.percent())},
                  {"robot", round4(it->second.second.percent())}});
  }
  j["task_reasoning"] = std::move(tr);

  const auto grasps = grasp_table(rep);
  ojson gt = ojson::array();
  for (const auto& m : rep.methods) {
    auto it = grasps.find(m);
    ojson row{{"method", m}};
    ojson cols = ojson::object();
    if (it != grasps.end()) {
      for (const auto& g : group_order()) {
        auto c = it->second.find(g);
        if (c != it->second.end()) cols[g] = {{"success", round4(c->second.percent())}, {"trials", c->second.total}};
      }
      const auto& avg = it->second.at("average");
      cols["average"] = {{"success", round4(avg.percent())}, {"trials", avg.total}};
    }
    row["columns"] = std::move(cols);
    gt.push_back(std::move(row));
  }
  j["grasp_success"] = std::move(gt);

  ojson recs = ojson::array();
  ojson fails = ojson::array();
  for (const auto& e : rep.entries) {
    for (const auto& r : e.records) {
      ojson x{{"entry", r.entry}, {"task", r.task}, {"method", r.method}, {"grasp_part", r.grasp_part},
              {"human_part", r.human_part}, {"success", r.success}};
      if (r.grasp) x["translation"] = reasoner::vec_json(r.grasp->translation);
      if (!r.note.empty()) x["note"] = r.note;
      recs.push_back(std::move(x));
    }
    for (const auto& f : e.failures) fails.push_back({{"entry", f.entry}, {"stage", f.stage}, {"error", f.error}});
  }
  j["records"] = std::move(recs);
  j["failures"] = std::move(fails);
  return j;
}

namespace detail {
inline std::string fmt(const char* f, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}
inline std::string pad(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}
inline std::string lpad(const std::string& s, std::size_t w) {
  return s.size() < w ? std::string(w - s.size(), ' ') + s : s;
}
}  // namespace detail

/// Column heading for a result group.
inline std::string short_group(const std::string& g) {
  static const std::map<std::string, std::string> names = {{"spoon/open lid of jar", "open jar"},
                                                           {"screwdriver/hammer", "hammer"},
                                                           {"screwdriver/play xylophone", "play"},
                                                           {"toothbrush/push pin into a hole", "push pin"}};
  if (auto it = names.find(g); it != names.end()) return it->second;
  std::string t = g.substr(g.find('/') + 1);
  return t.size() > 9 ? t.substr(0, 9) : t;
}

/// Plain-text tables for a report in its JSON form.
inline std::string render_text(const ojson& j) {
  using detail::fmt;
  using detail::lpad;
  using detail::pad;
  std::ostringstream os;
  os << "config " << j.at("config_fingerprint").get<std::string>() << "  seed " << j.at("seed").get<std::uint64_t>()
     << "  entries " << j.at("entries").get<std::size_t>() << "\n\n";

  os << "Part segmentation\n";
  os << pad("Object", 16) << "| " << lpad("DR(%)", 8) << lpad("F1", 7) << lpad("IoU", 8) << " | " << lpad("DR(%)", 8)
     << lpad("F1", 7) << lpad("IoU", 8) << "\n";
  os << pad("", 16) << "| " << pad("with reasoning", 23) << " | raw proposals\n";
  for (const auto& r : j.at("segmentation")) {
    const auto& o = r.at("ours");
    const auto& b = r.at("baseline");
    os << pad(r.at("object_class").get<std::string>(), 16) << "| " << lpad(fmt("%.2f", o.at("dr")), 8)
       << lpad(fmt("%.2f", o.at("f1")), 7) << lpad(fmt("%.2f", o.at("iou")), 8) << " | "
       << lpad(fmt("%.2f", b.at("dr")), 8) << lpad(fmt("%.2f", b.at("f1")), 7) << lpad(fmt("%.2f", b.at("iou")), 8)
       << "\n";
  }

  if (!j.at("task_reasoning").empty()) {
    os << "\nTask reasoning (H / R accuracy, %)\n";
    for (const auto& r : j.at("task_reasoning")) {
      os << pad(r.at("group").get<std::string>(), 34) << lpad(fmt("%.1f", r.at("human")), 7)
         << lpad(fmt("%.1f", r.at("robot")), 7) << "   (" << r.at("pairs").get<std::size_t>() << ")\n";
    }
  }

  if (!j.at("grasp_success").empty()) {
    os << "\nGrasp success (%, no interference with the human part)\n";
    std::vector<std::string> cols = group_order();
    cols.push_back("average");
    os << pad("Method", 15);
    for (const auto& c : cols) os << lpad(short_group(c), 10);
    os << "\n";
    for (const auto& r : j.at("grasp_success")) {
      os << pad(r.at("method").get<std::string>(), 15);
      for (const auto& c : cols) {
        const auto& cj = r.at("columns");
        const std::string cell = cj.contains(c) ? fmt("%.1f", cj.at(c).at("success")) : "-";
        os << lpad(cell, 10);
      }
      os << "\n";
    }
  }
  if (!j.at("failures").empty()) {
    os << "\nFailures\n";
    for (const auto& f : j.at("failures")) {
      os << "  " << f.at("entry").get<std::string>() << " [" << f.at("stage").get<std::string>() << "] "
         << f.at("error").get<std::string>() << "\n";
    }
  }
  return os.str();
}

/// Flat rows: section,method,group,metric,value.
inline std::string render_csv(const ojson& j) {
  std::ostringstream os;
  os << "section,method,group,metric,value\n";
  auto num = [](const ojson& v) { return detail::fmt("%.4f", v.get<double>()); };
  auto q = [](const std::string& s) { return s.find(',') == std::string::npos ? s : "\"" + s + "\""; };
  for (const auto& r : j.at("segmentation")) {
    for (const char* side : {"ours", "baseline"}) {
      for (const char* m : {"dr", "f1", "iou"}) {
        os << "segmentation," << side << "," << q(r.at("object_class").get<std::string>()) << "," << m << ","
           << num(r.at(side).at(m)) << "\n";
      }
    }
  }
  for (const auto& r : j.at("task_reasoning")) {
    os << "task_reasoning,reasoner," << q(r.at("group").get<std::string>()) << ",human," << num(r.at("human")) << "\n";
    os << "task_reasoning,reasoner," << q(r.at("group").get<std::string>()) << ",robot," << num(r.at("robot")) << "\n";
  }
  for (const auto& r : j.at("grasp_success")) {
    for (auto it = r.at("columns").begin(); it != r.at("columns").end(); ++it) {
      os << "grasp_success," << r.at("method").get<std::string>() << "," << q(it.key()) << ",success,"
         << num(it.value().at("success")) << "\n";
    }
  }
  return os.str();
}

/// Side-by-side summary of two reports. Reports from different configs are
/// refused unless `force`.
inline std::string compare_reports(const ojson& a, const ojson& b, bool force) {
  for (const auto* r : {&a, &b}) {
    if (!r->contains("format") || r->at("format") != kReportFormat) throw InputError("not a benchmark report");
  }
  const auto fa = a.at("config_fingerprint").get<std::string>();
  const auto fb = b.at("config_fingerprint").get<std::string>();
  if (fa != fb && !force) {
    throw InputError("reports come from different configs (" + fa + " vs " + fb + "); use --force to compare anyway");
  }
  using detail::fmt;
  using detail::lpad;
  using detail::pad;
  std::ostringstream os;
  os << "A " << fa << "   B " << fb << (fa != fb ? "   (configs differ)" : "") << "\n";
  auto mean_row = [](const ojson& r) -> const ojson* {
    for (const auto& row : r.at("segmentation")) {
      if (row.at("object_class") == "Mean") return &row;
    }
    return nullptr;
  };
  if (const auto *ma = mean_row(a), *mb = mean_row(b); ma && mb) {
    for (const char* m : {"dr", "f1", "iou"}) {
      const double va = ma->at("ours").at(m).get<double>();
      const double vb = mb->at("ours").at(m).get<double>();
      os << pad(std::string("segmentation ") + m, 28) << lpad(fmt("%.2f", va), 9) << lpad(fmt("%.2f", vb), 9)
         << lpad(fmt("%+.2f", vb - va), 9) << "\n";
    }
  }
  for (const auto& ra : a.at("grasp_success")) {
    for (const auto& rb : b.at("grasp_success")) {
      if (ra.at("method") != rb.at("method")) continue;
      const auto& ca = ra.at("columns");
      const auto& cb = rb.at("columns");
      if (!ca.contains("average") || !cb.contains("average")) continue;
      const double va = ca.at("average").at("success").get<double>();
      const double vb = cb.at("average").at("success").get<double>();
      os << pad("grasp " + ra.at("method").get<std::string>(), 28) << lpad(fmt("%.2f", va), 9)
         << lpad(fmt("%.2f", vb), 9) << lpad(fmt("%+.2f", vb - va), 9) << "\n";
    }
  }
  return os.str();
}

}  // namespace handover::eval

#pragma once

// Data tables behind the rule-based reasoner and the mask-refinement stage:
// which part the human and the robot grasp for an (object, task) pair, and
// which part labels may legitimately overlap.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "handover/dataset/taxonomy.hpp"
#include "handover/errors.hpp"
#include "handover/reasoner/resources.hpp"

namespace handover::reasoner {

struct KnowledgeEntry {
  std::string object_class;
  std::string task;
  std::vector<std::string> keywords;
  std::string human_part;
  std::string robot_part;
  std::string confidence;  // "high" or "low"
  std::string post_task_description;
  std::string robot_region;
};

/// Lowercase alphanumeric words with a trailing plural "s" removed.
inline std::vector<std::string> task_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (cur.size() > 3 && cur.back() == 's' && cur[cur.size() - 2] != 's') cur.pop_back();
    if (!cur.empty()) out.push_back(cur);
    cur.clear();
  };
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

class KnowledgeTable {
 public:
  KnowledgeTable() = default;
  explicit KnowledgeTable(std::vector<KnowledgeEntry> entries) : entries_(std::move(entries)) {}

  static KnowledgeTable from_json(const nlohmann::json& doc) {
    std::vector<KnowledgeEntry> rows;
    const auto& tax = dataset::taxonomy();
    for (const auto& e : doc.at("entries")) {
      KnowledgeEntry k;
      k.object_class = e.at("object_class").get<std::string>();
      k.task = e.at("task").get<std::string>();
      k.keywords = e.value("keywords", std::vector<std::string>{});
      k.human_part = e.at("human_part").get<std::string>();
      k.robot_part = e.at("robot_part").get<std::string>();
      k.confidence = e.value("confidence", std::string("high"));
      k.post_task_description = e.value("post_task_description", std::string());
      k.robot_region = e.value("robot_region", "the " + k.robot_part);
      if (!tax.has_part(k.object_class, k.human_part) || !tax.has_part(k.object_class, k.robot_part)) {
        throw InputError("knowledge table: parts of (" + k.object_class + ", " + k.task +
                         ") are not in the class taxonomy");
      }
      rows.push_back(std::move(k));
    }
    return KnowledgeTable(std::move(rows));
  }

  static KnowledgeTable load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw InputError("cannot read knowledge table " + file.string());
    try {
      return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw InputError("malformed knowledge table " + file.string() + ": " + e.what());
    }
  }

  const std::vector<KnowledgeEntry>& entries() const noexcept { return entries_; }

  /// Best entry for the class: exact canonical task first, then the most
  /// keyword hits; ties keep table order. Null when nothing matches.
  const KnowledgeEntry* match(std::string_view object_class, std::string_view task_text) const {
    const auto tokens = task_tokens(task_text);
    const KnowledgeEntry* best = nullptr;
    int best_score = 0;
    for (const auto& e : entries_) {
      if (e.object_class != object_class) continue;
      if (task_tokens(e.task) == tokens) return &e;
      int score = 0;
      for (const auto& kw : e.keywords) {
        const auto kt = task_tokens(kw);
        bool all = !kt.empty();
        for (const auto& t : kt) all = all && std::find(tokens.begin(), tokens.end(), t) != tokens.end();
        score += all ? 1 : 0;
      }
      if (score > best_score) {
        best_score = score;
        best = &e;
      }
    }
    return best;
  }

 private:
  std::vector<KnowledgeEntry> entries_;
};

class CompatibilityTable {
 public:
  struct Pair {
    std::string object_class;
    std::string a;
    std::string b;
    bool compatible{false};
  };

  CompatibilityTable() = default;
  CompatibilityTable(std::vector<Pair> pairs, bool default_compatible)
      : pairs_(std::move(pairs)), default_compatible_(default_compatible) {}

  static CompatibilityTable from_json(const nlohmann::json& doc) {
    std::vector<Pair> pairs;
    for (const auto& p : doc.at("pairs")) {
      const auto& parts = p.at("parts");
      if (parts.size() != 2) throw InputError("compatibility table: each entry names two parts");
      pairs.push_back({p.at("object_class").get<std::string>(), parts[0].get<std::string>(),
                       parts[1].get<std::string>(), p.at("compatible").get<bool>()});
    }
    return CompatibilityTable(std::move(pairs), doc.value("default", std::string("incompatible")) == "compatible");
  }

  static CompatibilityTable load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw InputError("cannot read compatibility table " + file.string());
    try {
      return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw InputError("malformed compatibility table " + file.string() + ": " + e.what());
    }
  }

  /// Whether masks labeled `a` and `b` may overlap. A label never contradicts
  /// itself; merged labels are compatible with their own components.
  bool compatible(std::string_view object_class, std::string_view a, std::string_view b) const {
    if (a == b) return true;
    if (dataset::label_covers(a, b) || dataset::label_covers(b, a)) return true;
    for (const auto& p : pairs_) {
      if (p.object_class != object_class) continue;
      if ((p.a == a && p.b == b) || (p.a == b && p.b == a)) return p.compatible;
    }
    return default_compatible_;
  }

  const std::vector<Pair>& pairs() const noexcept { return pairs_; }

 private:
  std::vector<Pair> pairs_;
  bool default_compatible_{false};
};

inline const KnowledgeTable& default_knowledge() {
  static const KnowledgeTable table =
      KnowledgeTable::from_json(nlohmann::json::parse(resources::kKnowledgeJson));
  return table;
}

inline const CompatibilityTable& default_compatibility() {
  static const CompatibilityTable table =
      CompatibilityTable::from_json(nlohmann::json::parse(resources::kCompatibilityJson));
  return table;
}

}  // namespace handover::reasoner

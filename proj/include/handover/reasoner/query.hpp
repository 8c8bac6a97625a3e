#pragma once

#include <nlohmann/json.hpp>

#include <mutex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "handover/dataset/taxonomy.hpp"
#include "handover/errors.hpp"
#include "handover/reasoner/format.hpp"
#include "handover/reasoner/resources.hpp"
#include "handover/reasoner/schema.hpp"

namespace handover::reasoner {

enum class QueryKind { kTaskPlan, kPartLabel, kPartAssignment, kUnlabeledPart, kGraspChoice };

inline std::string_view to_string(QueryKind k) {
  switch (k) {
    case QueryKind::kTaskPlan: return "task_plan";
    case QueryKind::kPartLabel: return "part_label";
    case QueryKind::kPartAssignment: return "part_assignment";
    case QueryKind::kUnlabeledPart: return "unlabeled_part";
    case QueryKind::kGraspChoice: return "grasp_choice";
  }
  return "unknown";
}

/// One question to a reasoner: task description (TD), supporting
/// information (SI) and the expected output structure (OS) as a schema.
struct ReasonerQuery {
  QueryKind kind{QueryKind::kTaskPlan};
  std::string task_description;
  json supporting_info = json::object();
  json output_schema = json::object();
};

/// Substitutes `{{key}}` placeholders.
inline std::string fill_template(std::string_view tmpl, const std::vector<std::pair<std::string, std::string>>& vars) {
  std::string out(tmpl);
  for (const auto& [key, value] : vars) {
    const std::string needle = "{{" + key + "}}";
    for (std::size_t pos = out.find(needle); pos != std::string::npos; pos = out.find(needle, pos + value.size())) {
      out.replace(pos, needle.size(), value);
    }
  }
  return out;
}

struct Prompt {
  std::string system;
  std::string user;
};

inline Prompt render_prompt(const ReasonerQuery& q) {
  auto strip = [](std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == ' ')) s.pop_back();
    return s;
  };
  Prompt p;
  p.system = strip(std::string(resources::kSystemPrompt));
  p.user = fill_template(resources::kQueryTemplate, {{"TD", strip(q.task_description)},
                                                    {"SI", render_fixed(q.supporting_info)},
                                                    {"OS", q.output_schema.dump(2)}});
  return p;
}

/// Schema violations plus the cross-field rules a schema cannot express.
inline std::vector<std::string> check_response(const ReasonerQuery& q, const json& response) {
  auto out = validate_schema(q.output_schema, response);
  if (!out.empty()) return out;
  if (q.kind == QueryKind::kTaskPlan) {
    const auto& parts = response.at("relevant_parts");
    const auto& human = response.at("human_grasp_part");
    if (std::find(parts.begin(), parts.end(), human) == parts.end()) {
      out.push_back("$.human_grasp_part: " + human.dump() + " is not listed in relevant_parts");
    }
  } else if (q.kind == QueryKind::kPartAssignment) {
    const auto& si = q.supporting_info;
    std::set<int> ids;
    for (const auto& c : si.at("clusters")) ids.insert(c.at("cluster_id").get<int>());
    std::set<std::string> missing;
    for (const auto& m : si.at("missing_parts")) missing.insert(m.get<std::string>());
    std::set<int> seen;
    const std::string cls = si.at("object_class").get<std::string>();
    for (const auto& a : response.at("assignments")) {
      const int id = a.at("cluster_id").get<int>();
      if (!ids.count(id)) out.push_back("$.assignments: unknown cluster_id " + std::to_string(id));
      if (!seen.insert(id).second) out.push_back("$.assignments: cluster_id " + std::to_string(id) + " assigned twice");
      const auto label = a.at("label").get<std::string>();
      auto comps = dataset::label_components(label);
      for (const auto& c : comps) {
        if (!missing.count(c)) out.push_back("$.assignments: \"" + c + "\" is not a missing part");
      }
      if (comps.size() > 1 && dataset::merged_label(cls, comps) != label) {
        out.push_back("$.assignments: merged label \"" + label + "\" must list parts in taxonomy order");
      }
    }
    for (int id : ids) {
      if (!seen.count(id)) out.push_back("$.assignments: cluster_id " + std::to_string(id) + " has no label");
    }
  }
  return out;
}

/// A raw reply and what was wrong with it, one per request sent.
struct Attempt {
  std::string raw;
  std::vector<std::string> violations;
};

struct Answer {
  json value;
  std::vector<Attempt> attempts;  // remote reasoners only
};

/// Retry budget spent; keeps every rejected reply for the transcript.
class AttemptsExhaustedError : public RetriesExhaustedError {
 public:
  AttemptsExhaustedError(std::string message, std::vector<Attempt> attempts)
      : RetriesExhaustedError(std::move(message)), attempts_(std::move(attempts)) {}
  const std::vector<Attempt>& attempts() const noexcept { return attempts_; }

 private:
  std::vector<Attempt> attempts_;
};

class Reasoner {
 public:
  virtual ~Reasoner() = default;
  virtual std::string_view name() const = 0;
  /// A response satisfying check_response, or an exception.
  virtual Answer answer(const ReasonerQuery& q) = 0;
};

/// Append-only log of queries and responses; safe to share across threads.
class Transcript {
 public:
  void append(json entry) {
    std::lock_guard lock(mutex_);
    entries_.push_back(std::move(entry));
  }
  json to_json() const {
    std::lock_guard lock(mutex_);
    json arr = json::array();
    for (const auto& e : entries_) arr.push_back(e);
    return arr;
  }
  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
  }

 private:
  mutable std::mutex mutex_;
  std::vector<json> entries_;
};

/// A reasoner plus the transcript its queries are logged to.
class Session {
 public:
  explicit Session(Reasoner& reasoner, Transcript* transcript = nullptr)
      : reasoner_(reasoner), transcript_(transcript) {}

  Reasoner& reasoner() noexcept { return reasoner_; }
  Transcript* transcript() noexcept { return transcript_; }

  json ask(const ReasonerQuery& q) {
    json entry;
    entry["kind"] = std::string(to_string(q.kind));
    entry["reasoner"] = std::string(reasoner_.name());
    entry["task_description"] = q.task_description;
    entry["supporting_information"] = q.supporting_info;
    entry["output_structure"] = q.output_schema;
    try {
      Answer a = reasoner_.answer(q);
      entry["response"] = a.value;
      log_attempts(entry, a.attempts);
      if (transcript_) transcript_->append(std::move(entry));
      return std::move(a.value);
    } catch (const AttemptsExhaustedError& e) {
      entry["error"] = e.what();
      log_attempts(entry, e.attempts());
      if (transcript_) transcript_->append(std::move(entry));
      throw;
    } catch (const Error& e) {
      entry["error"] = e.what();
      if (transcript_) transcript_->append(std::move(entry));
      throw;
    }
  }

 private:
  static void log_attempts(json& entry, const std::vector<Attempt>& attempts) {
    if (attempts.empty()) return;
    json arr = json::array();
    for (const auto& a : attempts) arr.push_back({{"raw", a.raw}, {"violations", a.violations}});
    entry["attempts"] = std::move(arr);
  }

  Reasoner& reasoner_;
  Transcript* transcript_;
};

}  // namespace handover::reasoner

#pragma once

// Deterministic stand-in for an LLM. It answers from the query alone (SI
// plus the knowledge table), so identical queries get identical answers.

#include <cmath>
#include <limits>
#include <string>

#include "handover/reasoner/knowledge.hpp"
#include "handover/reasoner/ops.hpp"
#include "handover/reasoner/query.hpp"

namespace handover::reasoner {

class RuleBasedReasoner : public Reasoner {
 public:
  explicit RuleBasedReasoner(const KnowledgeTable& knowledge = default_knowledge()) : knowledge_(knowledge) {}

  std::string_view name() const override { return "rule"; }

  Answer answer(const ReasonerQuery& q) override {
    json r;
    switch (q.kind) {
      case QueryKind::kTaskPlan: r = task_plan(q.supporting_info); break;
      case QueryKind::kPartLabel: r = part_label(q.supporting_info); break;
      case QueryKind::kPartAssignment: r = part_assignment(q.supporting_info); break;
      case QueryKind::kUnlabeledPart: r = unlabeled_part(q.supporting_info); break;
      case QueryKind::kGraspChoice: r = grasp_choice(q.supporting_info); break;
    }
    if (auto v = check_response(q, r); !v.empty()) {
      throw SchemaError("rule-based reasoner produced an invalid " + std::string(to_string(q.kind)) + " answer: " + v.front());
    }
    return {std::move(r), {}};
  }

 private:
  json task_plan(const json& si) const {
    const auto cls = si.at("object_class").get<std::string>();
    const auto task = si.at("task").get<std::string>();
    const auto parts = si.at("parts").get<std::vector<std::string>>();
    if (parts.empty()) throw ReasonerError("rule-based reasoner has no part list for class '" + cls + "'");

    TaskPlan plan;
    plan.relevant_parts = parts;
    if (const auto* k = knowledge_.match(cls, task)) {
      plan.post_task_description = k->post_task_description;
      plan.human_grasp_part = k->human_part;
      plan.robot_grasp_region = {k->robot_region, k->robot_part};
      plan.confidence = k->confidence;
    } else {
      // Unknown task: the person takes whatever looks like a handle.
      plan.human_grasp_part = parts.front();
      for (const auto& p : parts) {
        if (p.find("handle") != std::string::npos) {
          plan.human_grasp_part = p;
          break;
        }
      }
      std::string robot = plan.human_grasp_part;
      for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
        if (*it != plan.human_grasp_part) {
          robot = *it;
          break;
        }
      }
      plan.post_task_description = "The person holds the " + cls + " by the " + plan.human_grasp_part +
                                   " and uses it to " + task + ".";
      plan.robot_grasp_region = {"the " + robot, robot};
      plan.confidence = "low";
    }
    return to_json(plan);
  }

  static json part_label(const json& si) {
    const auto& cands = si.at("candidates");
    const std::string a = cands.at(0).at("label").get<std::string>();
    const std::string b = cands.at(1).at("label").get<std::string>();
    auto ca = json_centroid(cands.at(0).at("geometry"));
    auto cb = json_centroid(cands.at(1).at("geometry"));
    auto co = json_centroid(si.at("overlap_region").at("geometry"));
    std::string winner = a;
    if (ca && cb && co && (*co - *cb).norm() < (*co - *ca).norm()) winner = b;
    return {{"label", winner}};
  }

  static json part_assignment(const json& si) {
    const auto order = si.at("part_order").get<std::vector<std::string>>();
    const double n_parts = static_cast<double>(std::max<std::size_t>(order.size(), 1));
    auto index_of = [&](const std::string& label) -> std::optional<std::size_t> {
      const auto first = dataset::label_components(label).front();
      for (std::size_t i = 0; i < order.size(); ++i) {
        if (order[i] == first) return i;
      }
      return std::nullopt;
    };

    // Orient the axis so part order runs the way the known parts sit.
    bool flip = false;
    std::optional<std::size_t> anchor_idx;
    for (const auto& p : si.at("known_parts")) {
      auto idx = index_of(p.at("label").get<std::string>());
      if (!idx) continue;
      const double expected = (static_cast<double>(*idx) + 0.5) / n_parts;
      if (expected == 0.5) continue;
      if (!anchor_idx || *idx < *anchor_idx) {
        anchor_idx = idx;
        const double pos = p.at("axis_position").get<double>();
        flip = (pos - 0.5) * (expected - 0.5) < 0.0;
      }
    }

    // Clusters in order along the (oriented) axis take the missing parts in
    // taxonomy order, spread evenly when the counts differ.
    const auto missing = si.at("missing_parts").get<std::vector<std::string>>();
    const auto& clusters = si.at("clusters");
    std::vector<std::pair<double, std::size_t>> order_along;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      const double t = clusters[i].at("axis_position").get<double>();
      order_along.emplace_back(flip ? 1.0 - t : t, i);
    }
    std::stable_sort(order_along.begin(), order_along.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::string> label_of(clusters.size());
    for (std::size_t rank = 0; rank < order_along.size(); ++rank) {
      label_of[order_along[rank].second] = missing[rank * missing.size() / order_along.size()];
    }
    json out = json::array();
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      out.push_back({{"cluster_id", clusters[i].at("cluster_id")}, {"label", label_of[i]}});
    }
    return {{"assignments", out}};
  }

  /// Adjacent and roughly collinear with a part: extend it. Otherwise new.
  static json unlabeled_part(const json& si) {
    const double tol = si.at("adjacency_tolerance").get<double>();
    const auto region_centroid = json_centroid(si.at("region"));
    std::string best = si.at("new_part_label").get<std::string>();
    double best_dist = std::numeric_limits<double>::infinity();
    for (const auto& p : si.at("parts")) {
      const auto& g = p.at("geometry");
      if (!region_centroid || !g.contains("dominant_length")) continue;
      const double dist = p.at("min_distance_to_region").get<double>();
      const double offset = p.at("region_offset_from_part_axis").get<double>();
      const double length = g.at("dominant_length").get<double>();
      if (dist <= tol && offset <= 0.15 * length + tol && dist < best_dist) {
        best_dist = dist;
        best = p.at("label").get<std::string>();
      }
    }
    return {{"label", best}};
  }

  static json grasp_choice(const json& si) {
    const auto& cands = si.at("candidates");
    const std::size_t n = cands.size();
    auto translation = [&](std::size_t i) { return vec_from_json(cands[i].at("translation")); };

    std::optional<Vec3> human_centroid;
    std::vector<std::pair<std::string, Vec3>> part_centroids;
    for (const auto& p : si.at("parts")) {
      std::optional<Vec3> c = p.contains("geometry") ? json_centroid(p.at("geometry")) : json_centroid(p);
      if (!c) continue;
      part_centroids.emplace_back(p.at("label").get<std::string>(), *c);
    }

    // Largest value of `score` over `pool`; first index wins ties.
    auto argmax = [&](const std::vector<std::size_t>& pool, auto score) {
      std::size_t best = pool.front();
      auto best_score = score(best);
      for (std::size_t i : pool) {
        const auto s = score(i);
        if (s > best_score) {
          best_score = s;
          best = i;
        }
      }
      return best;
    };
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;

    if (!si.contains("human_grasp_part")) {
      // No human part to protect: take the grasp closest to the object's middle.
      Vec3 middle = Vec3::Zero();
      if (auto c = si.contains("object") ? json_centroid(si.at("object")) : std::nullopt) {
        middle = *c;
      } else {
        for (std::size_t i = 0; i < n; ++i) middle += translation(i);
        middle /= static_cast<double>(n);
      }
      return {{"grasp_index", argmax(all, [&](std::size_t i) { return -(translation(i) - middle).norm(); })}};
    }

    const auto human = si.at("human_grasp_part").get<std::string>();
    for (const auto& [label, c] : part_centroids) {
      if (dataset::label_covers(label, human)) {
        human_centroid = c;
        break;
      }
    }
    auto away_from_human = [&](std::size_t i) {
      return human_centroid ? (translation(i) - *human_centroid).norm() : 0.0;
    };

    const bool have_clearance = n > 0 && cands[0].contains("clearance_to_human_part");
    std::vector<std::size_t> free;
    if (have_clearance) {
      const double tol = si.value("contact_tolerance", 0.005);
      for (std::size_t i = 0; i < n; ++i) {
        if (cands[i].at("clearance_to_human_part").get<double>() > tol) free.push_back(i);
      }
      if (!free.empty()) {
        // Most clearance; among equals the one farther from the human part.
        const std::size_t pick = argmax(free, [&](std::size_t i) {
          return std::pair(cands[i].at("clearance_to_human_part").get<double>(), away_from_human(i));
        });
        return {{"grasp_index", pick}};
      }
      return {{"grasp_index", argmax(all, away_from_human)}};
    }

    // Coarse layout only: a contact belongs to the part with the nearest centroid.
    if (!part_centroids.empty()) {
      auto nearest_label = [&](const Vec3& p) {
        const std::string* best = &part_centroids.front().first;
        double d = std::numeric_limits<double>::infinity();
        for (const auto& [label, c] : part_centroids) {
          if ((p - c).norm() < d) {
            d = (p - c).norm();
            best = &label;
          }
        }
        return *best;
      };
      for (std::size_t i = 0; i < n; ++i) {
        bool touches = false;
        for (const auto& c : cands[i].at("contacts")) touches = touches || dataset::label_covers(nearest_label(vec_from_json(c)), human);
        if (!touches) free.push_back(i);
      }
    }
    return {{"grasp_index", argmax(free.empty() ? all : free, away_from_human)}};
  }

  const KnowledgeTable& knowledge_;
};

}  // namespace handover::reasoner

#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace handover::dataset {

struct ClassParts {
  std::string object_class;
  std::vector<std::string> parts;  // canonical order
};

/// The 12 household object classes and their functional parts.
class PartTaxonomy {
 public:
  explicit PartTaxonomy(std::vector<ClassParts> entries) : entries_(std::move(entries)) {}

  std::span<const ClassParts> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  const std::vector<std::string>* parts(std::string_view object_class) const {
    for (const auto& e : entries_) {
      if (e.object_class == object_class) return &e.parts;
    }
    return nullptr;
  }
  bool has_class(std::string_view object_class) const { return parts(object_class) != nullptr; }

  bool has_part(std::string_view object_class, std::string_view part) const {
    const auto* p = parts(object_class);
    return p && std::find(p->begin(), p->end(), part) != p->end();
  }

  /// Position of `part` in the class's canonical order.
  std::optional<std::size_t> part_index(std::string_view object_class,
                                        std::string_view part) const {
    const auto* p = parts(object_class);
    if (!p) return std::nullopt;
    auto it = std::find(p->begin(), p->end(), part);
    if (it == p->end()) return std::nullopt;
    return static_cast<std::size_t>(it - p->begin());
  }

 private:
  std::vector<ClassParts> entries_;
};

inline const PartTaxonomy& taxonomy() {
  static const PartTaxonomy table({
      {"bottle", {"cap", "neck", "body"}},
      {"hammer", {"handle", "head"}},
      {"knife", {"handle", "blade"}},
      {"mug", {"body", "handle", "rim"}},
      {"pan", {"handle", "body"}},
      {"plier", {"handles", "pivot", "jaws"}},
      {"scissor", {"handles", "pivot", "blades"}},
      {"screwdriver", {"handle", "shaft", "tip"}},
      {"spoon", {"handle", "bowl"}},
      {"spraying bottle", {"nozzle", "trigger", "body"}},
      {"stapler", {"base", "upper arm"}},
      {"toothbrush", {"handle", "brush head"}},
  });
  return table;
}

/// Splits a merged label "a+b" into its components.
inline std::vector<std::string> label_components(std::string_view label) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = label.find('+', start);
    out.emplace_back(label.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

/// Joins part names into a merged label, components in taxonomy order.
inline std::string merged_label(std::string_view object_class, std::vector<std::string> parts) {
  const auto& tax = taxonomy();
  std::stable_sort(parts.begin(), parts.end(), [&](const std::string& a, const std::string& b) {
    auto ia = tax.part_index(object_class, a).value_or(static_cast<std::size_t>(-1));
    auto ib = tax.part_index(object_class, b).value_or(static_cast<std::size_t>(-1));
    return ia < ib;
  });
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += '+';
    out += p;
  }
  return out;
}

/// True if `label` names `part`, directly or as a merged-label component.
inline bool label_covers(std::string_view label, std::string_view part) {
  for (const auto& c : label_components(label)) {
    if (c == part) return true;
  }
  return false;
}

}  // namespace handover::dataset

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "handover/errors.hpp"

namespace handover::dataset {

enum class Conventionality { kConventionalEasy, kConventionalComplex, kUnconventional };

inline std::string_view to_string(Conventionality c) {
  switch (c) {
    case Conventionality::kConventionalEasy: return "conventional-easy";
    case Conventionality::kConventionalComplex: return "conventional-complex";
    case Conventionality::kUnconventional: return "unconventional";
  }
  return "unknown";
}

inline Conventionality conventionality_from_string(std::string_view s) {
  if (s == "conventional-easy") return Conventionality::kConventionalEasy;
  if (s == "conventional-complex") return Conventionality::kConventionalComplex;
  if (s == "unconventional") return Conventionality::kUnconventional;
  throw InputError("unknown conventionality '" + std::string(s) + "'");
}

/// Object plus the natural-language post-handover task.
struct TaskSpec {
  std::string object_class;
  std::string task_text;
  Conventionality conventionality{Conventionality::kConventionalEasy};

  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

/// The 16 benchmark object-task pairs, grouped as easy / complex conventional
/// and unconventional.
inline const std::vector<TaskSpec>& task_pairs() {
  using C = Conventionality;
  static const std::vector<TaskSpec> pairs = {
      {"hammer", "hammer", C::kConventionalEasy},
      {"knife", "cut", C::kConventionalEasy},
      {"mug", "drink", C::kConventionalEasy},
      {"screwdriver", "screw", C::kConventionalEasy},
      {"pan", "cook", C::kConventionalEasy},
      {"spoon", "stir", C::kConventionalEasy},
      {"scissor", "cut", C::kConventionalComplex},
      {"plier", "pinch", C::kConventionalComplex},
      {"stapler", "staple", C::kConventionalComplex},
      {"bottle", "pour", C::kConventionalComplex},
      {"spraying bottle", "spray", C::kConventionalComplex},
      {"toothbrush", "brush teeth", C::kConventionalComplex},
      {"screwdriver", "hammer", C::kUnconventional},
      {"screwdriver", "play xylophone", C::kUnconventional},
      {"spoon", "open lid of jar", C::kUnconventional},
      {"toothbrush", "push pin into a hole", C::kUnconventional},
  };
  return pairs;
}

inline std::optional<TaskSpec> find_task_pair(std::string_view object_class,
                                              std::string_view task_text) {
  for (const auto& t : task_pairs()) {
    if (t.object_class == object_class && t.task_text == task_text) return t;
  }
  return std::nullopt;
}

/// Reference human / robot grasp parts for the benchmark pairs, used as
/// ground truth by fixtures that do not carry their own annotations.
struct ReferenceParts {
  std::string human_part;
  std::string robot_part;
};

inline std::optional<ReferenceParts> reference_grasp_parts(std::string_view object_class,
                                                           std::string_view task_text) {
  struct Row {
    std::string_view object_class, task, human, robot;
  };
  static constexpr Row rows[] = {
      {"hammer", "hammer", "handle", "head"},
      {"knife", "cut", "handle", "blade"},
      {"mug", "drink", "handle", "body"},
      {"screwdriver", "screw", "handle", "shaft"},
      {"pan", "cook", "handle", "body"},
      {"spoon", "stir", "handle", "bowl"},
      {"scissor", "cut", "handles", "blades"},
      {"plier", "pinch", "handles", "jaws"},
      {"stapler", "staple", "upper arm", "base"},
      {"bottle", "pour", "body", "neck"},
      {"spraying bottle", "spray", "trigger", "body"},
      {"toothbrush", "brush teeth", "handle", "brush head"},
      {"screwdriver", "hammer", "handle", "shaft"},
      {"screwdriver", "play xylophone", "handle", "shaft"},
      {"spoon", "open lid of jar", "bowl", "handle"},
      {"toothbrush", "push pin into a hole", "brush head", "handle"},
  };
  for (const auto& r : rows) {
    if (r.object_class == object_class && r.task == task_text) {
      return ReferenceParts{std::string(r.human), std::string(r.robot)};
    }
  }
  return std::nullopt;
}

}  // namespace handover::dataset

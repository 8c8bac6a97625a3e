#!/usr/bin/env python3
"""Regenerates include/handover/reasoner/resources.hpp from data/."""
import pathlib

root = pathlib.Path(__file__).resolve().parent.parent
files = [
    ("kKnowledgeJson", "knowledge.json"),
    ("kCompatibilityJson", "part_compatibility.json"),
    ("kSystemPrompt", "prompts/system.txt"),
    ("kQueryTemplate", "prompts/query.txt"),
    ("kTaskPlanTemplate", "prompts/task_plan.txt"),
    ("kPartLabelTemplate", "prompts/part_label.txt"),
    ("kPartAssignmentTemplate", "prompts/part_assignment.txt"),
    ("kUnlabeledPartTemplate", "prompts/unlabeled_part.txt"),
    ("kGraspChoiceTemplate", "prompts/grasp_choice.txt"),
    ("kRepairTemplate", "prompts/repair.txt"),
]
out = [
    "#pragma once",
    "",
    "// Generated by tools/embed_resources.py from data/. Edit the data files and",
    "// rerun the script; a unit test checks the two stay identical.",
    "",
    "#include <string_view>",
    "",
    "namespace handover::reasoner::resources {",
    "",
]
for name, rel in files:
    text = (root / "data" / rel).read_text()
    out.append(f"// data/{rel}")
    out.append(f'inline constexpr std::string_view {name} = R"HO({text})HO";')
    out.append("")
out.append("}  // namespace handover::reasoner::resources")
(root / "include/handover/reasoner/resources.hpp").write_text("\n".join(out) + "\n")

#pragma once

// Generated by tools/embed_resources.py from data/. Edit the data files and
// rerun the script; a unit test checks the two stay identical.

#include <string_view>

namespace handover::reasoner::resources {

// data/knowledge.json
inline constexpr std::string_view kKnowledgeJson = R"HO({
  "format": "handover-knowledge/1",
  "entries": [
    {"object_class": "hammer", "task": "hammer", "keywords": ["hammer", "nail", "pound", "hit"],
     "human_part": "handle", "robot_part": "head", "confidence": "high",
     "post_task_description": "The person holds the hammer by the handle and swings the head onto the nail.",
     "robot_region": "the head, leaving the whole handle free"},
    {"object_class": "knife", "task": "cut", "keywords": ["cut", "slice", "chop"],
     "human_part": "handle", "robot_part": "blade", "confidence": "high",
     "post_task_description": "The person grips the handle and moves the blade through the food.",
     "robot_region": "the flat of the blade, near the spine"},
    {"object_class": "mug", "task": "drink", "keywords": ["drink", "sip", "coffee", "tea"],
     "human_part": "handle", "robot_part": "body", "confidence": "high",
     "post_task_description": "The person takes the mug by the handle and lifts the rim to the mouth.",
     "robot_region": "the body, on the side opposite the handle"},
    {"object_class": "screwdriver", "task": "screw", "keywords": ["screw", "tighten", "loosen", "unscrew"],
     "human_part": "handle", "robot_part": "shaft", "confidence": "high",
     "post_task_description": "The person wraps a hand around the handle and turns the tip inside the screw head.",
     "robot_region": "the shaft, between handle and tip"},
    {"object_class": "pan", "task": "cook", "keywords": ["cook", "fry", "saute"],
     "human_part": "handle", "robot_part": "body", "confidence": "high",
     "post_task_description": "The person holds the pan by the handle and keeps the body over the stove.",
     "robot_region": "the rim of the body, away from the handle"},
    {"object_class": "spoon", "task": "stir", "keywords": ["stir", "mix", "eat", "scoop"],
     "human_part": "handle", "robot_part": "bowl", "confidence": "high",
     "post_task_description": "The person holds the spoon by the handle and moves the bowl through the liquid.",
     "robot_region": "the bowl"},
    {"object_class": "scissor", "task": "cut", "keywords": ["cut", "trim", "snip"],
     "human_part": "handles", "robot_part": "blades", "confidence": "high",
     "post_task_description": "The person puts fingers through the handles and closes the blades on the material.",
     "robot_region": "the closed blades"},
    {"object_class": "plier", "task": "pinch", "keywords": ["pinch", "grip", "bend", "hold"],
     "human_part": "handles", "robot_part": "jaws", "confidence": "high",
     "post_task_description": "The person squeezes the handles so the jaws close on the workpiece.",
     "robot_region": "the jaws"},
    {"object_class": "stapler", "task": "staple", "keywords": ["staple", "fasten", "attach"],
     "human_part": "upper arm", "robot_part": "base", "confidence": "high",
     "post_task_description": "The person presses down on the upper arm while the base rests under the paper.",
     "robot_region": "the rear end of the base"},
    {"object_class": "bottle", "task": "pour", "keywords": ["pour", "fill", "drink"],
     "human_part": "body", "robot_part": "neck", "confidence": "high",
     "post_task_description": "The person holds the bottle around the body and tilts it so the liquid leaves through the neck.",
     "robot_region": "the neck, below the cap"},
    {"object_class": "spraying bottle", "task": "spray", "keywords": ["spray", "clean", "mist", "water"],
     "human_part": "trigger", "robot_part": "body", "confidence": "high",
     "post_task_description": "The person holds the grip behind the trigger and pulls the trigger with the fingers.",
     "robot_region": "the lower body of the bottle"},
    {"object_class": "toothbrush", "task": "brush teeth", "keywords": ["brush", "teeth", "tooth"],
     "human_part": "handle", "robot_part": "brush head", "confidence": "high",
     "post_task_description": "The person holds the handle and moves the brush head over the teeth.",
     "robot_region": "the brush head"},
    {"object_class": "screwdriver", "task": "hammer", "keywords": ["hammer", "nail", "pound", "hit"],
     "human_part": "handle", "robot_part": "shaft", "confidence": "low",
     "post_task_description": "The person holds the handle and strikes with the side of the shaft like a small hammer.",
     "robot_region": "the shaft, leaving the handle free"},
    {"object_class": "screwdriver", "task": "play xylophone", "keywords": ["play", "xylophone", "music", "drum"],
     "human_part": "handle", "robot_part": "shaft", "confidence": "low",
     "post_task_description": "The person holds the handle loosely and taps the bars with the shaft.",
     "robot_region": "the shaft"},
    {"object_class": "spoon", "task": "open lid of jar", "keywords": ["open", "lid", "jar", "pry"],
     "human_part": "bowl", "robot_part": "handle", "confidence": "low",
     "post_task_description": "The person holds the spoon by the bowl and wedges the end of the handle under the lid to pry it open.",
     "robot_region": "the handle end"},
    {"object_class": "toothbrush", "task": "push pin into a hole", "keywords": ["push", "pin", "hole", "poke"],
     "human_part": "brush head", "robot_part": "handle", "confidence": "low",
     "post_task_description": "The person holds the toothbrush at the brush head and pushes the pin with the narrow end of the handle.",
     "robot_region": "the handle"}
  ]
}
)HO";

// data/part_compatibility.json
inline constexpr std::string_view kCompatibilityJson = R"HO({
  "format": "handover-compatibility/1",
  "default": "incompatible",
  "pairs": [
    {"object_class": "mug", "parts": ["body", "rim"], "compatible": true},
    {"object_class": "pan", "parts": ["handle", "body"], "compatible": false}
  ]
}
)HO";

// data/prompts/system.txt
inline constexpr std::string_view kSystemPrompt = R"HO(You are the reasoning module of a robot that hands household tools to people.
You receive a task description, supporting information about the object observed on a table, and an output structure.
All coordinates are in meters in the camera frame; the camera looks down at the table and +z points away from the camera.
Reply with a single JSON object that follows the output structure. Do not add prose outside the JSON object.
)HO";

// data/prompts/query.txt
inline constexpr std::string_view kQueryTemplate = R"HO(### Task Description (TD)
{{TD}}

### Supporting Information (SI)
{{SI}}

### Output Structure (OS)
Reply with one JSON object that satisfies this schema:
{{OS}}
)HO";

// data/prompts/task_plan.txt
inline constexpr std::string_view kTaskPlanTemplate = R"HO(A robot will hand a {{object_class}} to a person, who will then use it to "{{task}}".
First describe in one or two sentences how the person will perform the task with the object after receiving it.
Then list the parts of the object that matter for the task, name the part the person must hold, and name the region the robot should grasp so that the person can take the object without regrasping.
Use only part names from the supporting information.
)HO";

// data/prompts/part_label.txt
inline constexpr std::string_view kPartLabelTemplate = R"HO(Two candidate part masks on a {{object_class}} overlap substantially, but their labels "{{label_a}}" and "{{label_b}}" cannot both be right for the shared region.
Using the geometry of the overlapping region and of each candidate, decide which of the two parts the shared region most likely belongs to.
)HO";

// data/prompts/part_assignment.txt
inline constexpr std::string_view kPartAssignmentTemplate = R"HO(Some parts of a {{object_class}} were not found by the segmentation model: {{missing_parts}}.
The points that no part claims were grouped into spatial clusters.
Using the layout of the known parts and the usual order of parts along the object, assign each cluster to one of the missing parts, or to a merged label such as "a+b" when a cluster spans several missing parts that cannot be told apart.
)HO";

// data/prompts/unlabeled_part.txt
inline constexpr std::string_view kUnlabeledPartTemplate = R"HO(A significant region of a {{object_class}} is not covered by any labeled part.
Decide whether the region is an extension of an existing part (it touches that part and continues along its axis) or a new part that was not recognized before.
)HO";

// data/prompts/grasp_choice.txt
inline constexpr std::string_view kGraspChoiceTemplate = R"HO(A robot will hand a {{object_class}} to a person, who will then use it to "{{task}}".
{{human_part_sentence}}
Choose the robot grasp from the candidate list that lets the person take the object comfortably and without regrasping.
)HO";

// data/prompts/repair.txt
inline constexpr std::string_view kRepairTemplate = R"HO(Your previous reply did not satisfy the output structure:
{{violations}}
Reply again with only one JSON object that satisfies the schema.
)HO";

}  // namespace handover::reasoner::resources

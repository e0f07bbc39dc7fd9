#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rgate/config.hpp"
#include "rgate/upstream.hpp"

namespace rgate {

// Structured planner output. The raw text is kept verbatim for auditing and
// is guaranteed to have passed the answer-leakage guard.
struct Plan {
  std::vector<std::string> key_concepts;
  std::vector<std::string> steps;
  std::string raw_text;

  bool operator==(const Plan&) const = default;
};

struct AugmentedPrompt {
  std::string text;
  std::string original_query;
  std::optional<Plan> plan;
};

// The system instruction shipped as assets/planner_system_prompt.txt and
// embedded at build time, so every run uses bit-identical prompt text.
const std::string& planner_system_prompt();

// Two-message conversation: the fixed system instruction plus the query
// verbatim as the user turn.
MessageList build_plan_prompt(const ReasoningQuery& query);

// True when the text declares an answer: a case-insensitive "the answer is",
// a \boxed{ span, or an <answer> tag.
bool contains_answer_leak(const std::string& text);

// Extracts key concepts and numbered (or bulleted) plan steps.
// Throws Error(plan_leakage) when the leakage guard trips and
// Error(plan_empty) when no steps can be extracted.
Plan parse_plan(const std::string& raw_text);

// Appends the plan under a guidance header after the query; without a plan
// the prompt is the query unchanged. The original query always appears
// verbatim as a contiguous substring of the result.
AugmentedPrompt augment_query(const ReasoningQuery& query, const std::optional<Plan>& plan);

}  // namespace rgate

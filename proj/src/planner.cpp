#include "rgate/planner.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

#include "rgate/answers.hpp"
#include "rgate/planner_prompt.hpp"

namespace rgate {

namespace {

std::string lower_copy(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

size_t ifind(const std::string& haystack, const std::string& lowered_needle, size_t from = 0) {
  return lower_copy(haystack).find(lowered_needle, from);
}

std::vector<std::string> split_concepts(const std::string& text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    std::string item = trim_copy(current);
    while (!item.empty() && (item.back() == '.' || item.back() == ';')) item.pop_back();
    item = trim_copy(item);
    if (!item.empty()) out.push_back(item);
    current.clear();
  };
  for (char c : text) {
    if (c == ',' || c == ';' || c == '\n') {
      flush();
    } else {
      current.push_back(c);
    }
  }
  flush();
  return out;
}

std::vector<std::string> numbered_steps(const std::string& text) {
  // Numbered items may sit on their own lines or inline: "1) do X 2) do Y".
  static const std::regex item(R"((^|[\s])(\d{1,3})\s*[.)\]]\s+)");
  std::vector<std::string> steps;
  std::vector<std::pair<size_t, size_t>> marks;  // (match begin, content begin)
  for (auto it = std::sregex_iterator(text.begin(), text.end(), item);
       it != std::sregex_iterator(); ++it) {
    marks.emplace_back(it->position(0) + it->length(1), it->position(0) + it->length(0));
  }
  for (size_t i = 0; i < marks.size(); ++i) {
    size_t end = (i + 1 < marks.size()) ? marks[i + 1].first : text.size();
    std::string step = trim_copy(text.substr(marks[i].second, end - marks[i].second));
    if (!step.empty()) steps.push_back(step);
  }
  return steps;
}

std::vector<std::string> bulleted_steps(const std::string& text) {
  std::vector<std::string> steps;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    std::string line = trim_copy(text.substr(pos, eol == std::string::npos ? eol : eol - pos));
    if (line.size() > 1 && (line[0] == '-' || line[0] == '*')) {
      std::string step = trim_copy(line.substr(1));
      if (!step.empty()) steps.push_back(step);
    }
    if (eol == std::string::npos) break;
    pos = eol + 1;
  }
  return steps;
}

}  // namespace

const std::string& planner_system_prompt() {
  static const std::string prompt = kPlannerSystemPrompt;
  return prompt;
}

MessageList build_plan_prompt(const ReasoningQuery& query) {
  return MessageList{{"system", planner_system_prompt()}, {"user", query.prompt}};
}

bool contains_answer_leak(const std::string& text) {
  std::string lowered = lower_copy(text);
  if (lowered.find("the answer is") != std::string::npos) return true;
  if (lowered.find("\\boxed{") != std::string::npos) return true;
  if (lowered.find("<answer>") != std::string::npos) return true;
  return false;
}

Plan parse_plan(const std::string& raw_text) {
  if (trim_copy(raw_text).empty())
    throw Error(ErrorCode::plan_empty, "planner returned no text");
  if (contains_answer_leak(raw_text))
    throw Error(ErrorCode::plan_leakage, "planner output declares an answer");

  Plan plan;
  plan.raw_text = raw_text;

  static const std::regex plan_marker(R"([Pp][Ll][Aa][Nn]\s*:)");
  std::smatch marker;
  size_t plan_begin = 0;
  bool has_marker = std::regex_search(raw_text, marker, plan_marker);
  if (has_marker) plan_begin = marker.position(0) + marker.length(0);

  size_t concepts_pos = ifind(raw_text, "key concepts");
  if (concepts_pos != std::string::npos) {
    size_t colon = raw_text.find(':', concepts_pos);
    if (colon != std::string::npos) {
      size_t end = has_marker ? static_cast<size_t>(marker.position(0)) : raw_text.size();
      if (end > colon + 1)
        plan.key_concepts = split_concepts(raw_text.substr(colon + 1, end - colon - 1));
    }
  }

  std::string steps_region = raw_text.substr(plan_begin);
  plan.steps = numbered_steps(steps_region);
  if (plan.steps.empty()) plan.steps = bulleted_steps(steps_region);
  if (plan.steps.empty())
    throw Error(ErrorCode::plan_empty, "no plan steps found in planner output");

  return plan;
}

AugmentedPrompt augment_query(const ReasoningQuery& query, const std::optional<Plan>& plan) {
  AugmentedPrompt out;
  out.original_query = query.prompt;
  out.plan = plan;
  if (!plan) {
    out.text = query.prompt;
    return out;
  }

  std::string text = query.prompt;
  text += "\n\n---\nHigh-level plan (for guidance only):\n";
  if (!plan->key_concepts.empty()) {
    text += "Key concepts: ";
    for (size_t i = 0; i < plan->key_concepts.size(); ++i) {
      if (i > 0) text += ", ";
      text += plan->key_concepts[i];
    }
    text += "\n";
  }
  for (size_t i = 0; i < plan->steps.size(); ++i) {
    text += std::to_string(i + 1) + ". " + plan->steps[i] + "\n";
  }
  out.text = text;
  return out;
}

}  // namespace rgate

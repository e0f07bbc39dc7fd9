#include "rgate/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <future>

#include "rgate/answers.hpp"

namespace rgate {

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

Candidate::Finish to_candidate_finish(FinishReason reason) {
  return reason == FinishReason::stop ? Candidate::Finish::stop : Candidate::Finish::length;
}

bool marks_endpoint_down(ErrorCode code) {
  switch (code) {
    case ErrorCode::upstream_timeout:
    case ErrorCode::upstream_status:
    case ErrorCode::upstream_protocol:
    case ErrorCode::upstream_exhausted:
      return true;
    default:
      return false;
  }
}

}  // namespace

const std::string& judge_system_prompt() {
  static const std::string prompt =
      "You are an impartial judge. Compare the two candidate responses to the same "
      "question and decide which one answers it better, weighing correctness first, "
      "then completeness and clarity. Reply with exactly one character: \"A\" if "
      "Response A is better, or \"B\" if Response B is better. Output nothing else.";
  return prompt;
}

MessageList build_judge_prompt(const ReasoningQuery& query, const Candidate& a,
                               const Candidate& b) {
  std::string user;
  user += "Question:\n" + query.prompt + "\n\n";
  user += "Response A:\n" + a.text + "\n\n";
  user += "Response A final answer: " + a.extracted_answer.value_or("(none)") + "\n\n";
  user += "Response B:\n" + b.text + "\n\n";
  user += "Response B final answer: " + b.extracted_answer.value_or("(none)") + "\n\n";
  user += "Which response answers the question better? Reply with exactly \"A\" or \"B\".";
  return MessageList{{"system", judge_system_prompt()}, {"user", user}};
}

JudgeVerdict parse_verdict(const std::string& raw, int left_index, int right_index) {
  JudgeVerdict verdict;
  verdict.left_index = left_index;
  verdict.right_index = right_index;
  verdict.raw_text = raw;
  for (size_t i = 0; i < raw.size(); ++i) {
    const char c = raw[i];
    if (c != 'A' && c != 'B') continue;
    const bool left_boundary = (i == 0) || !is_word_char(raw[i - 1]);
    const bool right_boundary = (i + 1 == raw.size()) || !is_word_char(raw[i + 1]);
    if (left_boundary && right_boundary) {
      verdict.winner_index = (c == 'A') ? left_index : right_index;
      verdict.fallback_used = false;
      return verdict;
    }
  }
  verdict.winner_index = left_index;
  verdict.fallback_used = true;
  return verdict;
}

Orchestrator::Orchestrator(ChatClient& client, PipelineConfig config, OrchestratorHooks hooks)
    : client_(client), config_(std::move(config)), hooks_(hooks) {}

ChatResult Orchestrator::call_upstream(EndpointRole role, const EndpointDescriptor& endpoint,
                                       const ChatRequest& request) const {
  double timeout = config_.request_timeout_s;
  if (hooks_.deadline) {
    const double remaining =
        std::chrono::duration<double>(*hooks_.deadline - std::chrono::steady_clock::now())
            .count();
    if (remaining <= 0.0)
      throw Error(ErrorCode::deadline_exceeded, "end-to-end deadline exceeded");
    timeout = std::min(timeout, remaining);
  }

  CallLimiter::Guard guard(hooks_.limiter);
  try {
    ChatResult result = client_.complete(endpoint, request, timeout, config_.max_retries);
    if (hooks_.health) hooks_.health->record(role, true);
    return result;
  } catch (const Error& e) {
    if (hooks_.metrics)
      hooks_.metrics->upstream_errors_total.fetch_add(1, std::memory_order_relaxed);
    if (hooks_.health && marks_endpoint_down(e.code())) hooks_.health->record(role, false);
    throw;
  }
}

Orchestrator::Sampling Orchestrator::sample_candidates(const AugmentedPrompt& prompt, int n,
                                                       const GenerationConfig& gen) const {
  if (n < 1) throw Error(ErrorCode::domain_error, "candidate count must be >= 1");

  std::vector<std::optional<Candidate>> slots(static_cast<size_t>(n));
  std::atomic<int> failures{0};
  std::atomic<bool> deadline_hit{false};

  std::vector<std::future<void>> pending;
  pending.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    pending.push_back(std::async(std::launch::async, [&, i] {
      GenerationConfig sample_gen = gen;
      if (gen.seed) sample_gen.seed = *gen.seed + i;
      ChatRequest request = make_chat_request(config_.reasoner_endpoint.model_name,
                                              {{"user", prompt.text}}, sample_gen);
      try {
        ChatResult result =
            call_upstream(EndpointRole::reasoner, config_.reasoner_endpoint, request);
        Candidate candidate;
        candidate.index = i;
        candidate.text = result.content;
        candidate.extracted_answer = extract_answer(result.content);
        candidate.completion_tokens = result.completion_tokens;
        candidate.latency_s = result.latency_s;
        candidate.finish_reason = to_candidate_finish(result.finish_reason);
        slots[static_cast<size_t>(i)] = std::move(candidate);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::deadline_exceeded) deadline_hit = true;
        failures.fetch_add(1, std::memory_order_relaxed);
      }
    }));
  }
  for (auto& f : pending) f.get();

  Sampling sampling;
  sampling.failures = failures.load();
  for (auto& slot : slots) {
    if (slot) sampling.candidates.push_back(std::move(*slot));
  }
  if (sampling.candidates.empty()) {
    if (deadline_hit) throw Error(ErrorCode::deadline_exceeded, "end-to-end deadline exceeded");
    throw Error(ErrorCode::upstream_exhausted,
                "no candidate generation succeeded after retries");
  }
  if (hooks_.metrics)
    hooks_.metrics->candidates_total.fetch_add(sampling.candidates.size(),
                                               std::memory_order_relaxed);
  return sampling;
}

namespace {

JudgeVerdict fallback_verdict(const Candidate& current, const Candidate& challenger) {
  JudgeVerdict verdict;
  verdict.left_index = current.index;
  verdict.right_index = challenger.index;
  verdict.winner_index = current.index;
  verdict.fallback_used = true;
  return verdict;
}

}  // namespace

std::pair<Candidate, std::vector<JudgeVerdict>> Orchestrator::run_tournament(
    const ReasoningQuery& query, const std::vector<Candidate>& candidates) const {
  if (candidates.empty())
    throw Error(ErrorCode::domain_error, "tournament needs at least one candidate");

  auto judge_once = [&](const Candidate& slot_a, const Candidate& slot_b) {
    ChatRequest request = make_chat_request(config_.judge_endpoint.model_name,
                                            build_judge_prompt(query, slot_a, slot_b),
                                            config_.judge_generation);
    ChatResult result = call_upstream(EndpointRole::judge, config_.judge_endpoint, request);
    if (hooks_.metrics)
      hooks_.metrics->judge_calls_total.fetch_add(1, std::memory_order_relaxed);
    JudgeVerdict verdict = parse_verdict(result.content, slot_a.index, slot_b.index);
    verdict.judge_calls = 1;
    verdict.completion_tokens = result.completion_tokens;
    verdict.latency_s = result.latency_s;
    return verdict;
  };

  Candidate current = candidates.front();
  std::vector<JudgeVerdict> verdicts;
  verdicts.reserve(candidates.size() - 1);
  bool judge_down = false;

  for (size_t i = 1; i < candidates.size(); ++i) {
    const Candidate& challenger = candidates[i];
    JudgeVerdict verdict;
    if (judge_down) {
      verdict = fallback_verdict(current, challenger);
    } else {
      try {
        verdict = judge_once(current, challenger);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::deadline_exceeded) throw;
        judge_down = true;
        verdict = fallback_verdict(current, challenger);
      }
    }
    if (config_.judge_swap && !judge_down) {
      // Swapped rematch; the winner must be agreed on by both orderings,
      // otherwise the current winner stays.
      try {
        JudgeVerdict swapped = judge_once(challenger, current);
        verdict.judge_calls += swapped.judge_calls;
        verdict.completion_tokens += swapped.completion_tokens;
        verdict.latency_s += swapped.latency_s;
        verdict.raw_text += "\n--- swapped ---\n" + swapped.raw_text;
        if (swapped.winner_index != verdict.winner_index) {
          verdict.winner_index = current.index;
          verdict.fallback_used = true;
        }
      } catch (const Error& e) {
        if (e.code() == ErrorCode::deadline_exceeded) throw;
        judge_down = true;
        verdict.winner_index = current.index;
        verdict.fallback_used = true;
      }
    }
    if (verdict.winner_index == challenger.index) current = challenger;
    verdicts.push_back(std::move(verdict));
  }
  return {current, verdicts};
}

PlanStage Orchestrator::run_plan_stage(const ReasoningQuery& query) const {
  PlanStage stage;
  ChatRequest request = make_chat_request(config_.planner_endpoint.model_name,
                                          build_plan_prompt(query), config_.planner_generation);
  for (int attempt = 0; attempt < 2; ++attempt) {
    stage.attempts++;
    ChatResult result;
    try {
      result = call_upstream(EndpointRole::planner, config_.planner_endpoint, request);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::deadline_exceeded) throw;
      stage.failure = e.what();
      return stage;
    }
    stage.completion_tokens += result.completion_tokens;
    stage.latency_s += result.latency_s;
    try {
      stage.plan = parse_plan(result.content);
      stage.failure.reset();
      return stage;
    } catch (const Error& e) {
      stage.failure = e.what();
      if (e.code() != ErrorCode::plan_leakage) return stage;  // empty plan: no retry
    }
  }
  return stage;
}

FinalResponse Orchestrator::execute_pipeline(const ReasoningQuery& query) const {
  validate_query(query);

  PlanStage plan_stage;
  if (config_.plan_enabled) plan_stage = run_plan_stage(query);

  const AugmentedPrompt prompt = augment_query(query, plan_stage.plan);
  Sampling sampling = sample_candidates(prompt, config_.bon_n, config_.generation);
  auto [winner, verdicts] = run_tournament(query, sampling.candidates);

  FinalResponse out;
  out.answer_text = winner.extracted_answer.value_or("");
  out.winning_candidate = winner;
  out.candidates = std::move(sampling.candidates);
  out.plan = plan_stage.plan;
  out.verdicts = std::move(verdicts);
  out.sampling_failures = sampling.failures;
  out.plan_failure = plan_stage.failure;

  long long total_tokens = plan_stage.completion_tokens;
  double slowest_candidate = 0.0;
  for (const Candidate& c : out.candidates) {
    total_tokens += c.completion_tokens;
    slowest_candidate = std::max(slowest_candidate, c.latency_s);
  }
  double judge_time = 0.0;
  for (const JudgeVerdict& v : out.verdicts) {
    total_tokens += v.completion_tokens;
    judge_time += v.latency_s;
    out.judge_calls += v.judge_calls;
  }
  out.total_completion_tokens = total_tokens;
  out.wall_time_s = plan_stage.latency_s + slowest_candidate + judge_time;

  if (hooks_.metrics)
    hooks_.metrics->tokens_completion_total.fetch_add(static_cast<std::uint64_t>(total_tokens),
                                                      std::memory_order_relaxed);
  return out;
}

}  // namespace rgate

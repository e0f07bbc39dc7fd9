#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rgate/config.hpp"
#include "rgate/metrics.hpp"
#include "rgate/planner.hpp"
#include "rgate/upstream.hpp"

namespace rgate {

struct Candidate {
  enum class Finish { stop, length, error };

  int index = 0;
  std::string text;
  std::optional<std::string> extracted_answer;
  long long completion_tokens = 0;
  double latency_s = 0.0;
  Finish finish_reason = Finish::stop;
};

struct JudgeVerdict {
  int left_index = 0;
  int right_index = 0;
  int winner_index = 0;
  std::string raw_text;
  bool fallback_used = false;
  // Accounting for the round: zero calls happen when the judge is down and
  // the round falls back to the current winner.
  int judge_calls = 0;
  long long completion_tokens = 0;
  double latency_s = 0.0;
};

struct PlanStage {
  std::optional<Plan> plan;
  int attempts = 0;
  long long completion_tokens = 0;
  double latency_s = 0.0;
  std::optional<std::string> failure;  // why the pipeline went plan-free
};

struct FinalResponse {
  std::string answer_text;  // extracted answer of the winner; empty when none
  Candidate winning_candidate;
  std::vector<Candidate> candidates;
  std::optional<Plan> plan;
  std::vector<JudgeVerdict> verdicts;
  long long total_completion_tokens = 0;  // planner + candidates + judge rounds
  // Modeled request duration: plan stage + slowest candidate (sampled in
  // parallel) + the sequential judge rounds.
  double wall_time_s = 0.0;
  int judge_calls = 0;
  int sampling_failures = 0;
  std::optional<std::string> plan_failure;
};

// Conversation presented to the judge: the question plus both responses in
// fixed A/B slots, with their extracted answers quoted.
MessageList build_judge_prompt(const ReasoningQuery& query, const Candidate& a,
                               const Candidate& b);
const std::string& judge_system_prompt();

// The winner is the side of the first standalone "A" or "B" token in the raw
// judge output; when neither appears the left (current) side wins and the
// verdict is marked as a fallback.
JudgeVerdict parse_verdict(const std::string& raw, int left_index, int right_index);

struct OrchestratorHooks {
  Metrics* metrics = nullptr;
  EndpointHealth* health = nullptr;
  CallLimiter* limiter = nullptr;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

// Stateless per request; safe to construct per call and run concurrently.
class Orchestrator {
 public:
  Orchestrator(ChatClient& client, PipelineConfig config, OrchestratorHooks hooks = {});

  struct Sampling {
    std::vector<Candidate> candidates;  // ordered by index
    int failures = 0;
  };

  // Issues n generation requests concurrently. Candidate i uses seed + i when
  // the config carries a seed. Throws Error(upstream_exhausted) when no
  // request succeeds; partial success proceeds with what arrived.
  Sampling sample_candidates(const AugmentedPrompt& prompt, int n,
                             const GenerationConfig& gen) const;

  // Sequential single-elimination knockout in index order; n-1 comparisons.
  // A judge failure keeps the current winner for that and all later rounds.
  std::pair<Candidate, std::vector<JudgeVerdict>> run_tournament(
      const ReasoningQuery& query, const std::vector<Candidate>& candidates) const;

  // Planning with one retry on answer leakage; any planner failure degrades
  // to a plan-free run instead of failing the request.
  PlanStage run_plan_stage(const ReasoningQuery& query) const;

  FinalResponse execute_pipeline(const ReasoningQuery& query) const;

  const PipelineConfig& config() const { return config_; }

 private:
  ChatResult call_upstream(EndpointRole role, const EndpointDescriptor& endpoint,
                           const ChatRequest& request) const;

  ChatClient& client_;
  PipelineConfig config_;
  OrchestratorHooks hooks_;
};

}  // namespace rgate

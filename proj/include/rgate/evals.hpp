#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rgate/config.hpp"
#include "rgate/upstream.hpp"

namespace rgate {

struct BenchmarkRecord {
  std::string id;
  std::string prompt;
  std::string answer;  // gold
  AnswerKind answer_kind = AnswerKind::free_form;
  std::string domain;
};

// One JSON object per line: {"id","prompt","answer","answer_kind","domain"}.
// Throws Error(parse_error) with the offending line number and
// Error(duplicate_id) on repeated ids.
std::vector<BenchmarkRecord> load_benchmark(const std::string& path);

struct RunCell {
  bool correct = false;
  long long completion_tokens = 0;        // tokens of the winning response
  long long total_completion_tokens = 0;  // all tokens spent on the cell
  std::optional<std::string> extracted;
  std::optional<std::string> error;
};

// Rectangular per-question, per-run outcomes over M independent runs.
struct RunMatrix {
  size_t num_questions = 0;
  size_t num_runs = 0;
  std::vector<std::string> question_ids;
  std::vector<std::string> domains;
  std::vector<RunCell> cells;  // question-major

  RunCell& at(size_t question, size_t run) { return cells[question * num_runs + run]; }
  const RunCell& at(size_t question, size_t run) const {
    return cells[question * num_runs + run];
  }
};

RunMatrix make_run_matrix(size_t num_questions, size_t num_runs);

// Unbiased estimator 1 - C(n-c, k)/C(n, k) in product form; no factorials, so
// n up to at least 1e4 is exact to double precision. Preconditions
// 0 <= c <= n and 1 <= k <= n are enforced with Error(domain_error).
double pass_at_k(long long n, long long c, long long k);

// Mean over runs of the per-run fraction correct, as a percentage.
double pass1_avg(const RunMatrix& matrix);

// pass@k for k = 1..num_runs, averaged over questions.
std::vector<std::pair<int, double>> passk_curve(const RunMatrix& matrix);

// 100 * sum(correct) / sum(questions). Counts may be fractional (averages
// over repeated runs divide back out).
double micro_average(const std::vector<std::pair<double, long long>>& parts);

// Convenience form taking (score_percent, question_total) pairs.
double micro_average_from_scores(const std::vector<std::pair<double, long long>>& parts);

struct TokenStats {
  double avg_tokens = 0.0;
  std::optional<double> reduction_vs_baseline_percent;
};

// Average winning-response tokens over all cells; the reduction is
// 100 * (baseline_avg - current_avg) / baseline_avg when a baseline is given.
TokenStats token_stats(const RunMatrix& current, const RunMatrix* baseline);

enum class AblationMode { base, plan_only, bo3, plan_bo3 };

AblationMode ablation_mode_from_string(const std::string& name);
const char* ablation_mode_to_string(AblationMode mode);

// (plan_enabled, bon_n) for the mode: base=(false,1), plan=(true,1),
// bo3=(false,3), plan+bo3=(true,3).
std::pair<bool, int> ablation_mode_settings(AblationMode mode);

struct ScoreReport {
  std::string benchmark;
  std::string mode;
  bool plan_disabled = false;
  double pass1_avg = 0.0;
  std::vector<std::pair<int, double>> passk;
  double micro_average = 0.0;
  double avg_tokens = 0.0;
  std::optional<double> token_reduction_vs_baseline;
  long long error_count = 0;
  std::map<std::string, std::pair<long long, long long>> per_domain;  // correct, total cells
  RunMatrix matrix;
};

struct EvalOptions {
  int runs = 16;
  int workers = 4;
  bool disable_plan = false;  // force the plan stage off (SciCode-style rule)
  std::optional<long long> seed;
  std::string benchmark_label;
};

// Per-run seeds step by this much so best-of-N offsets never collide.
inline constexpr long long kRunSeedStride = 1000;

// Evaluates every question M times through the pipeline in the given mode.
// Per-question failures grade as incorrect with an annotation; the sweep
// never aborts. Deterministic for a given seed and backend script regardless
// of worker count.
ScoreReport run_eval(const std::vector<BenchmarkRecord>& records, AblationMode mode,
                     const PipelineConfig& base_config, ChatClient& client,
                     const EvalOptions& options);

std::map<AblationMode, ScoreReport> run_ablation(const std::vector<BenchmarkRecord>& records,
                                                 const std::set<AblationMode>& modes,
                                                 const PipelineConfig& base_config,
                                                 ChatClient& client, const EvalOptions& options);

nlohmann::json score_report_to_json(const ScoreReport& report);
// Recovers the matrix shape, correctness and token counts from a report
// document (enough for baselines and re-aggregation).
RunMatrix run_matrix_from_report_json(const nlohmann::json& doc);

// --- safety aggregation ---

inline constexpr const char* kSafetyAspects[4] = {
    "high_risk_content_refusal",
    "conversational_robustness",
    "cybersecurity_data_protection",
    "jailbreak_resistance",
};

struct SafetyAspect {
  std::string name;
  std::vector<std::pair<std::string, double>> dataset_scores;
  double macro = 0.0;  // unrounded mean of the dataset scores
};

struct SafetyReport {
  std::vector<SafetyAspect> aspects;  // in kSafetyAspects order
  double safety4_macro = 0.0;         // unrounded mean of the four macros
};

// All four aspects must be present with scores in [0,1]; anything else throws
// Error(domain_error). Values stay unrounded until report emission.
SafetyReport safety_aggregate(const std::map<std::string, std::map<std::string, double>>& scores);

// Rounds macros to two decimals, matching how they are reported.
nlohmann::json safety_report_to_json(const SafetyReport& report);

double round2(double value);

}  // namespace rgate

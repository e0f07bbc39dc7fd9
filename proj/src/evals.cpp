#include "rgate/evals.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>

#include "rgate/answers.hpp"
#include "rgate/orchestrator.hpp"

namespace rgate {

using nlohmann::json;

std::vector<BenchmarkRecord> load_benchmark(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::parse_error, "cannot open benchmark file '" + path + "'");

  std::vector<BenchmarkRecord> records;
  std::set<std::string> seen_ids;
  std::string line;
  long long line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (trim_copy(line).empty()) continue;

    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::parse_error,
                  "line " + std::to_string(line_number) + ": " + e.what());
    }
    auto field_error = [&](const std::string& why) {
      throw Error(ErrorCode::parse_error, "line " + std::to_string(line_number) + ": " + why);
    };
    if (!doc.is_object()) field_error("record must be a JSON object");

    BenchmarkRecord record;
    if (!doc.contains("id") || !doc["id"].is_string() || doc["id"].get<std::string>().empty())
      field_error("missing or empty 'id'");
    record.id = doc["id"].get<std::string>();
    if (!doc.contains("prompt") || !doc["prompt"].is_string() ||
        doc["prompt"].get<std::string>().empty())
      field_error("missing or empty 'prompt'");
    record.prompt = doc["prompt"].get<std::string>();

    if (!doc.contains("answer")) field_error("missing 'answer'");
    if (doc["answer"].is_string())
      record.answer = doc["answer"].get<std::string>();
    else if (doc["answer"].is_number_integer())
      record.answer = std::to_string(doc["answer"].get<long long>());
    else
      field_error("'answer' must be a string or integer");

    if (!doc.contains("answer_kind") || !doc["answer_kind"].is_string())
      field_error("missing 'answer_kind'");
    try {
      record.answer_kind = answer_kind_from_string(doc["answer_kind"].get<std::string>());
    } catch (const Error&) {
      field_error("unknown answer_kind '" + doc["answer_kind"].get<std::string>() + "'");
    }
    if (doc.contains("domain")) {
      if (!doc["domain"].is_string()) field_error("'domain' must be a string");
      record.domain = doc["domain"].get<std::string>();
    }

    if (record.answer_kind != AnswerKind::free_form && trim_copy(record.answer).empty())
      field_error("empty 'answer' for gradeable kind");
    if (record.answer_kind == AnswerKind::integer &&
        !normalize_integer_text(record.answer))
      field_error("'answer' does not normalize to an integer: '" + record.answer + "'");

    if (!seen_ids.insert(record.id).second)
      throw Error(ErrorCode::duplicate_id, "duplicate id '" + record.id + "' at line " +
                                               std::to_string(line_number));
    records.push_back(std::move(record));
  }
  return records;
}

RunMatrix make_run_matrix(size_t num_questions, size_t num_runs) {
  RunMatrix matrix;
  matrix.num_questions = num_questions;
  matrix.num_runs = num_runs;
  matrix.question_ids.resize(num_questions);
  matrix.domains.resize(num_questions);
  matrix.cells.resize(num_questions * num_runs);
  return matrix;
}

double pass_at_k(long long n, long long c, long long k) {
  if (n < 1) throw Error(ErrorCode::domain_error, "pass@k requires n >= 1");
  if (c < 0 || c > n) throw Error(ErrorCode::domain_error, "pass@k requires 0 <= c <= n");
  if (k < 1 || k > n) throw Error(ErrorCode::domain_error, "pass@k requires 1 <= k <= n");
  if (c == 0) return 0.0;
  if (n - c < k) return 1.0;
  // C(n-c, k) / C(n, k) = prod_{i=0}^{k-1} (n-c-i) / (n-i); every factor is in
  // (0, 1], so the product cannot overflow or lose the leading digits.
  double ratio = 1.0;
  for (long long i = 0; i < k; ++i) {
    ratio *= static_cast<double>(n - c - i) / static_cast<double>(n - i);
  }
  return 1.0 - ratio;
}

double pass1_avg(const RunMatrix& matrix) {
  if (matrix.num_runs == 0 || matrix.num_questions == 0)
    throw Error(ErrorCode::empty_matrix, "run matrix has no cells");
  double sum = 0.0;
  for (size_t r = 0; r < matrix.num_runs; ++r) {
    long long correct = 0;
    for (size_t q = 0; q < matrix.num_questions; ++q) {
      if (matrix.at(q, r).correct) ++correct;
    }
    sum += static_cast<double>(correct) / static_cast<double>(matrix.num_questions);
  }
  return 100.0 * sum / static_cast<double>(matrix.num_runs);
}

std::vector<std::pair<int, double>> passk_curve(const RunMatrix& matrix) {
  if (matrix.num_runs == 0 || matrix.num_questions == 0)
    throw Error(ErrorCode::empty_matrix, "run matrix has no cells");
  const long long n = static_cast<long long>(matrix.num_runs);
  std::vector<long long> correct_counts(matrix.num_questions, 0);
  for (size_t q = 0; q < matrix.num_questions; ++q) {
    for (size_t r = 0; r < matrix.num_runs; ++r) {
      if (matrix.at(q, r).correct) ++correct_counts[q];
    }
  }
  std::vector<std::pair<int, double>> curve;
  curve.reserve(matrix.num_runs);
  for (long long k = 1; k <= n; ++k) {
    double sum = 0.0;
    for (long long c : correct_counts) sum += pass_at_k(n, c, k);
    curve.emplace_back(static_cast<int>(k), sum / static_cast<double>(matrix.num_questions));
  }
  return curve;
}

double micro_average(const std::vector<std::pair<double, long long>>& parts) {
  if (parts.empty()) throw Error(ErrorCode::domain_error, "micro_average needs parts");
  double correct = 0.0;
  long long questions = 0;
  for (const auto& [part_correct, part_questions] : parts) {
    if (part_questions <= 0)
      throw Error(ErrorCode::domain_error, "micro_average needs positive question totals");
    correct += part_correct;
    questions += part_questions;
  }
  return 100.0 * correct / static_cast<double>(questions);
}

double micro_average_from_scores(const std::vector<std::pair<double, long long>>& parts) {
  std::vector<std::pair<double, long long>> converted;
  converted.reserve(parts.size());
  for (const auto& [score_percent, part_questions] : parts) {
    converted.emplace_back(score_percent * static_cast<double>(part_questions) / 100.0,
                           part_questions);
  }
  return micro_average(converted);
}

TokenStats token_stats(const RunMatrix& current, const RunMatrix* baseline) {
  auto average_tokens = [](const RunMatrix& matrix) {
    if (matrix.cells.empty())
      throw Error(ErrorCode::empty_matrix, "run matrix has no cells");
    double sum = 0.0;
    for (const RunCell& cell : matrix.cells) sum += static_cast<double>(cell.completion_tokens);
    return sum / static_cast<double>(matrix.cells.size());
  };

  TokenStats stats;
  stats.avg_tokens = average_tokens(current);
  if (baseline) {
    const double baseline_avg = average_tokens(*baseline);
    if (baseline_avg <= 0.0)
      throw Error(ErrorCode::domain_error, "baseline average tokens must be > 0");
    stats.reduction_vs_baseline_percent =
        100.0 * (baseline_avg - stats.avg_tokens) / baseline_avg;
  }
  return stats;
}

AblationMode ablation_mode_from_string(const std::string& name) {
  if (name == "base") return AblationMode::base;
  if (name == "plan") return AblationMode::plan_only;
  if (name == "bo3") return AblationMode::bo3;
  if (name == "plan+bo3") return AblationMode::plan_bo3;
  throw Error(ErrorCode::invalid_config,
              "mode: expected one of base|plan|bo3|plan+bo3, got '" + name + "'");
}

const char* ablation_mode_to_string(AblationMode mode) {
  switch (mode) {
    case AblationMode::base:
      return "base";
    case AblationMode::plan_only:
      return "plan";
    case AblationMode::bo3:
      return "bo3";
    case AblationMode::plan_bo3:
      return "plan+bo3";
  }
  return "base";
}

std::pair<bool, int> ablation_mode_settings(AblationMode mode) {
  switch (mode) {
    case AblationMode::base:
      return {false, 1};
    case AblationMode::plan_only:
      return {true, 1};
    case AblationMode::bo3:
      return {false, 3};
    case AblationMode::plan_bo3:
      return {true, 3};
  }
  return {false, 1};
}

ScoreReport run_eval(const std::vector<BenchmarkRecord>& records, AblationMode mode,
                     const PipelineConfig& base_config, ChatClient& client,
                     const EvalOptions& options) {
  if (records.empty()) throw Error(ErrorCode::empty_matrix, "benchmark has no records");
  if (options.runs < 1) throw Error(ErrorCode::domain_error, "runs must be >= 1");

  PipelineConfig config = base_config;
  auto [plan_enabled, bon_n] = ablation_mode_settings(mode);
  config.plan_enabled = plan_enabled && !options.disable_plan;
  config.bon_n = bon_n;
  config = validate_config(std::move(config));

  const std::optional<long long> base_seed =
      options.seed ? options.seed : base_config.generation.seed;

  const size_t num_questions = records.size();
  const size_t num_runs = static_cast<size_t>(options.runs);
  RunMatrix matrix = make_run_matrix(num_questions, num_runs);
  for (size_t q = 0; q < num_questions; ++q) {
    matrix.question_ids[q] = records[q].id;
    matrix.domains[q] = records[q].domain;
  }

  const size_t total_cells = num_questions * num_runs;
  std::atomic<size_t> next_task{0};
  const int worker_count = std::max(1, options.workers);

  auto evaluate_cell = [&](size_t task) {
    const size_t q = task / num_runs;
    const size_t r = task % num_runs;
    const BenchmarkRecord& record = records[q];

    PipelineConfig run_config = config;
    if (base_seed)
      run_config.generation.seed = *base_seed + static_cast<long long>(r) * kRunSeedStride;

    RunCell& cell = matrix.at(q, r);
    try {
      Orchestrator orchestrator(client, run_config);
      FinalResponse response =
          orchestrator.execute_pipeline({record.id, record.prompt, record.answer_kind});
      cell.extracted = response.winning_candidate.extracted_answer;
      cell.correct = grade(cell.extracted, record.answer, record.answer_kind);
      cell.completion_tokens = response.winning_candidate.completion_tokens;
      cell.total_completion_tokens = response.total_completion_tokens;
    } catch (const Error& e) {
      cell.correct = false;
      cell.error = e.what();
    }
  };

  std::vector<std::thread> workers;
  workers.reserve(static_cast<size_t>(worker_count));
  for (int w = 0; w < worker_count; ++w) {
    workers.emplace_back([&] {
      while (true) {
        const size_t task = next_task.fetch_add(1, std::memory_order_relaxed);
        if (task >= total_cells) return;
        evaluate_cell(task);
      }
    });
  }
  for (auto& worker : workers) worker.join();

  // A deterministic fold over the finished matrix: nothing below depends on
  // completion order.
  ScoreReport report;
  report.benchmark = options.benchmark_label;
  report.mode = ablation_mode_to_string(mode);
  report.plan_disabled = options.disable_plan;
  report.pass1_avg = pass1_avg(matrix);
  report.passk = passk_curve(matrix);
  report.avg_tokens = token_stats(matrix, nullptr).avg_tokens;
  for (size_t q = 0; q < num_questions; ++q) {
    auto& [correct, total] = report.per_domain[matrix.domains[q]];
    for (size_t r = 0; r < num_runs; ++r) {
      ++total;
      if (matrix.at(q, r).correct) ++correct;
      if (matrix.at(q, r).error) ++report.error_count;
    }
  }
  std::vector<std::pair<double, long long>> parts;
  for (const auto& [domain, counts] : report.per_domain) {
    parts.emplace_back(static_cast<double>(counts.first), counts.second);
  }
  report.micro_average = micro_average(parts);
  report.matrix = std::move(matrix);
  return report;
}

std::map<AblationMode, ScoreReport> run_ablation(const std::vector<BenchmarkRecord>& records,
                                                 const std::set<AblationMode>& modes,
                                                 const PipelineConfig& base_config,
                                                 ChatClient& client,
                                                 const EvalOptions& options) {
  std::map<AblationMode, ScoreReport> reports;
  for (AblationMode mode : modes) {
    reports.emplace(mode, run_eval(records, mode, base_config, client, options));
  }
  return reports;
}

json score_report_to_json(const ScoreReport& report) {
  json passk = json::array();
  for (const auto& [k, estimate] : report.passk)
    passk.push_back({{"k", k}, {"estimate", estimate}});

  json per_domain = json::object();
  for (const auto& [domain, counts] : report.per_domain)
    per_domain[domain] = {{"correct", counts.first}, {"total", counts.second}};

  json correct_rows = json::array();
  json token_rows = json::array();
  json total_token_rows = json::array();
  json errors = json::array();
  for (size_t q = 0; q < report.matrix.num_questions; ++q) {
    json correct_row = json::array();
    json token_row = json::array();
    json total_row = json::array();
    for (size_t r = 0; r < report.matrix.num_runs; ++r) {
      const RunCell& cell = report.matrix.at(q, r);
      correct_row.push_back(cell.correct);
      token_row.push_back(cell.completion_tokens);
      total_row.push_back(cell.total_completion_tokens);
      if (cell.error)
        errors.push_back({{"question", report.matrix.question_ids[q]},
                          {"run", r},
                          {"message", *cell.error}});
    }
    correct_rows.push_back(std::move(correct_row));
    token_rows.push_back(std::move(token_row));
    total_token_rows.push_back(std::move(total_row));
  }

  json doc;
  doc["benchmark"] = report.benchmark;
  doc["mode"] = report.mode;
  doc["plan_disabled"] = report.plan_disabled;
  doc["runs"] = report.matrix.num_runs;
  doc["num_questions"] = report.matrix.num_questions;
  doc["pass1_avg"] = report.pass1_avg;
  doc["passk_curve"] = std::move(passk);
  doc["micro_average"] = report.micro_average;
  doc["avg_tokens"] = report.avg_tokens;
  if (report.token_reduction_vs_baseline)
    doc["token_reduction_vs_baseline"] = *report.token_reduction_vs_baseline;
  doc["error_count"] = report.error_count;
  doc["per_domain"] = std::move(per_domain);
  doc["matrix"] = {{"question_ids", report.matrix.question_ids},
                   {"domains", report.matrix.domains},
                   {"correct", std::move(correct_rows)},
                   {"completion_tokens", std::move(token_rows)},
                   {"total_completion_tokens", std::move(total_token_rows)},
                   {"errors", std::move(errors)}};
  return doc;
}

RunMatrix run_matrix_from_report_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("matrix"))
    throw Error(ErrorCode::parse_error, "report document has no 'matrix'");
  const json& m = doc["matrix"];
  if (!m.contains("correct") || !m["correct"].is_array() ||
      !m.contains("completion_tokens") || !m["completion_tokens"].is_array())
    throw Error(ErrorCode::parse_error, "report matrix needs 'correct' and 'completion_tokens'");

  const size_t num_questions = m["correct"].size();
  const size_t num_runs = num_questions == 0 ? 0 : m["correct"][0].size();
  RunMatrix matrix = make_run_matrix(num_questions, num_runs);
  if (m.contains("question_ids"))
    matrix.question_ids = m["question_ids"].get<std::vector<std::string>>();
  if (m.contains("domains")) matrix.domains = m["domains"].get<std::vector<std::string>>();
  for (size_t q = 0; q < num_questions; ++q) {
    if (m["correct"][q].size() != num_runs || m["completion_tokens"][q].size() != num_runs)
      throw Error(ErrorCode::parse_error, "report matrix is not rectangular");
    for (size_t r = 0; r < num_runs; ++r) {
      matrix.at(q, r).correct = m["correct"][q][r].get<bool>();
      matrix.at(q, r).completion_tokens = m["completion_tokens"][q][r].get<long long>();
      if (m.contains("total_completion_tokens"))
        matrix.at(q, r).total_completion_tokens =
            m["total_completion_tokens"][q][r].get<long long>();
    }
  }
  return matrix;
}

SafetyReport safety_aggregate(
    const std::map<std::string, std::map<std::string, double>>& scores) {
  for (const auto& [aspect, _] : scores) {
    bool known = false;
    for (const char* name : kSafetyAspects)
      if (aspect == name) known = true;
    if (!known) throw Error(ErrorCode::domain_error, "unknown safety aspect '" + aspect + "'");
  }

  SafetyReport report;
  double macro_sum = 0.0;
  for (const char* name : kSafetyAspects) {
    auto it = scores.find(name);
    if (it == scores.end())
      throw Error(ErrorCode::domain_error, std::string("missing safety aspect '") + name + "'");
    if (it->second.empty())
      throw Error(ErrorCode::domain_error, std::string("aspect '") + name + "' has no datasets");
    SafetyAspect aspect;
    aspect.name = name;
    double sum = 0.0;
    for (const auto& [dataset, score] : it->second) {
      if (!(score >= 0.0 && score <= 1.0))
        throw Error(ErrorCode::domain_error,
                    "score for '" + dataset + "' out of [0,1]: " + std::to_string(score));
      aspect.dataset_scores.emplace_back(dataset, score);
      sum += score;
    }
    aspect.macro = sum / static_cast<double>(aspect.dataset_scores.size());
    macro_sum += aspect.macro;
    report.aspects.push_back(std::move(aspect));
  }
  report.safety4_macro = macro_sum / 4.0;
  return report;
}

double round2(double value) { return std::round(value * 100.0) / 100.0; }

json safety_report_to_json(const SafetyReport& report) {
  json aspects = json::object();
  for (const SafetyAspect& aspect : report.aspects) {
    json datasets = json::object();
    for (const auto& [dataset, score] : aspect.dataset_scores) datasets[dataset] = score;
    aspects[aspect.name] = {{"datasets", std::move(datasets)}, {"macro", round2(aspect.macro)}};
  }
  return json{{"aspects", std::move(aspects)}, {"safety4_macro", round2(report.safety4_macro)}};
}

}  // namespace rgate

// Acceptance suite: one criterion per function, one pass/fail line each.
// Run with a criterion number (1-9) to check a single criterion, or with no
// arguments to run all of them.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "rgate/answers.hpp"
#include "rgate/evals.hpp"
#include "rgate/gateway.hpp"
#include "rgate/mock_backend.hpp"
#include "rgate/orchestrator.hpp"

using namespace rgate;
using nlohmann::json;

namespace {

std::string source_path(const std::string& relative) {
  return std::string(RGATE_SOURCE_DIR) + "/" + relative;
}

std::string golden_path(const std::string& name) {
  return std::string(RGATE_TEST_DATA_DIR) + "/golden/" + name;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

struct Failures {
  std::vector<std::string> items;

  void require(bool ok, const std::string& what) {
    if (!ok) items.push_back(what);
  }
  template <typename T, typename U>
  void require_eq(const T& actual, const U& expected, const std::string& what) {
    if (!(actual == expected)) {
      std::ostringstream msg;
      msg << what << " (actual " << actual << ", expected " << expected << ")";
      items.push_back(msg.str());
    }
  }
  void require_close(double actual, double expected, double tolerance,
                     const std::string& what) {
    if (!(std::abs(actual - expected) <= tolerance)) {
      std::ostringstream msg;
      msg.precision(10);
      msg << what << " (actual " << actual << ", expected " << expected << " +/- " << tolerance
          << ")";
      items.push_back(msg.str());
    }
  }
};

bool within_one_ulp(double a, double b) {
  return a == b || std::nextafter(a, b) == b;
}

// ---------------------------------------------------------------------------
// 1. micro-average reproduction
// ---------------------------------------------------------------------------
Failures criterion_micro_average() {
  Failures f;
  const auto started = std::chrono::steady_clock::now();
  const double row_a =
      micro_average_from_scores({{90.83, 30}, {81.24, 30}, {73.75, 30}, {60.73, 173}});
  const double row_b =
      micro_average_from_scores({{76.88, 30}, {74.58, 30}, {69.38, 30}, {41.51, 173}});
  const double elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
          .count();

  f.require_close(row_a, 67.99, 0.01, "strongest math row micro-average");
  f.require_close(row_b, 52.50, 0.01, "comparison row micro-average");
  f.require(elapsed_ms < 1.0, "micro-average runtime exceeds 1 ms");
  return f;
}

// ---------------------------------------------------------------------------
// 2. token-reduction reproduction
// ---------------------------------------------------------------------------
Failures criterion_token_reduction() {
  Failures f;
  auto one_cell = [](long long tokens) {
    RunMatrix matrix = make_run_matrix(1, 1);
    matrix.at(0, 0).completion_tokens = tokens;
    return matrix;
  };
  auto reduction = [&](long long current, long long baseline) {
    RunMatrix cur = one_cell(current);
    RunMatrix base = one_cell(baseline);
    return *token_stats(cur, &base).reduction_vs_baseline_percent;
  };

  f.require_close(reduction(30050, 34042), 11.73, 0.01, "hardest-subset token reduction");
  f.require_close(reduction(12166, 13589), 10.53, 0.02, "code-benchmark token reduction");
  f.require_close(reduction(20040, 21482), 6.72, 0.02, "competition-math token reduction");
  return f;
}

// ---------------------------------------------------------------------------
// 3. safety aggregation reproduction
// ---------------------------------------------------------------------------
Failures criterion_safety() {
  Failures f;
  const std::map<std::string, std::map<std::string, double>> scores = {
      {"high_risk_content_refusal",
       {{"Do-Not-Answer", 0.88},
        {"HarmBench", 0.56},
        {"PhysicalSafety", 0.49},
        {"SimpleSafetyTests", 0.95},
        {"ToxiGen", 0.97},
        {"CoNA", 0.97},
        {"HarmfulQ", 0.99}}},
      {"conversational_robustness",
       {{"DialogueSafety", 0.99}, {"HH-RLHF", 0.95}, {"DICES350", 0.73}}},
      {"cybersecurity_data_protection",
       {{"PersonalInfoLeak", 0.86},
        {"CyberattackAssistance", 0.47},
        {"PromptExtractionRobustness", 0.35}}},
      {"jailbreak_resistance",
       {{"Few-Shot Attack", 0.96},
        {"Gandalf Ignore", 0.87},
        {"Tense Change", 0.84},
        {"Multilingual", 0.83},
        {"PromptInjection", 0.77},
        {"One-Sided Statement", 0.77},
        {"Refusal Suppression", 0.76},
        {"Persona Modulation", 0.59},
        {"Do-Anything-Now", 0.43},
        {"LatentJailbreak", 0.37}}}};

  SafetyReport report = safety_aggregate(scores);
  f.require_eq(round2(report.aspects[0].macro), 0.83, "high-risk refusal macro");
  f.require_eq(round2(report.aspects[1].macro), 0.89, "conversational robustness macro");
  f.require_eq(round2(report.aspects[2].macro), 0.56, "cybersecurity macro");
  f.require_eq(round2(report.aspects[3].macro), 0.72, "jailbreak resistance macro");
  f.require_eq(round2(report.safety4_macro), 0.75, "safety-4 macro");
  return f;
}

// ---------------------------------------------------------------------------
// 4. pass@k oracle equivalence
// ---------------------------------------------------------------------------
double pass_at_k_oracle(int n, int c, int k) {
  long long total = 0;
  long long hit = 0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != k) continue;
    ++total;
    if ((mask & ((1u << c) - 1u)) != 0) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(total);
}

Failures criterion_pass_at_k() {
  Failures f;
  const auto started = std::chrono::steady_clock::now();

  for (int n = 1; n <= 12 && f.items.empty(); ++n) {
    for (int c = 0; c <= n; ++c) {
      for (int k = 1; k <= n; ++k) {
        const double estimator = pass_at_k(n, c, k);
        const double oracle = pass_at_k_oracle(n, c, k);
        if (std::abs(estimator - oracle) >= 1e-12) {
          std::ostringstream msg;
          msg << "estimator disagrees with the oracle at n=" << n << " c=" << c << " k=" << k;
          f.items.push_back(msg.str());
        }
      }
    }
  }

  std::mt19937 rng(1);
  for (int trial = 0; trial < 400 && f.items.empty(); ++trial) {
    const long long n = 1 + static_cast<long long>(rng() % 200);
    const long long c = static_cast<long long>(rng() % (n + 1));
    double previous = 0.0;
    for (long long k = 1; k <= n; ++k) {
      const double value = pass_at_k(n, c, k);
      f.require(value >= previous - 1e-15, "pass@k not nondecreasing in k");
      previous = value;
      if (c < n)
        f.require(pass_at_k(n, c + 1, k) >= value - 1e-15, "pass@k not nondecreasing in c");
    }
  }

  const double elapsed_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  f.require(elapsed_s < 10.0, "pass@k suite exceeded 10 s");
  return f;
}

// ---------------------------------------------------------------------------
// 5. tournament contract
// ---------------------------------------------------------------------------
PipelineConfig tournament_config() {
  PipelineConfig cfg;
  cfg.plan_enabled = false;
  cfg.bon_n = 1;
  cfg.max_retries = 0;
  cfg.reasoner_endpoint = {"http://mock.invalid", "mock-reasoner", {}};
  cfg.planner_endpoint = {"http://mock.invalid", "mock-planner", {}};
  cfg.judge_endpoint = {"http://mock.invalid", "mock-judge", {}};
  return validate_config(cfg);
}

std::vector<Candidate> synthetic_field(int n) {
  std::vector<Candidate> field;
  for (int i = 0; i < n; ++i) {
    Candidate c;
    c.index = i;
    c.text = "candidate text " + std::to_string(i);
    c.extracted_answer = std::to_string(9000 + i);
    field.push_back(std::move(c));
  }
  return field;
}

Failures criterion_tournament() {
  Failures f;
  const ReasoningQuery query{"t", "pick the best", AnswerKind::free_form};

  for (int n = 1; n <= 8; ++n) {
    for (const char* reply : {"B", "A"}) {
      auto script = MockScript::from_json(json{
          {"rules", json::array({json{{"match", {{"model", "mock-judge"}}},
                                      {"response", {{"content", reply}}}}})}});
      MockChatClient client(script);
      Orchestrator orchestrator(client, tournament_config());
      auto [winner, verdicts] = orchestrator.run_tournament(query, synthetic_field(n));

      f.require_eq(script->ledger_size(), static_cast<size_t>(n - 1),
                   "judge calls in the ledger for n=" + std::to_string(n));
      f.require_eq(verdicts.size(), static_cast<size_t>(n - 1),
                   "verdict count for n=" + std::to_string(n));
      const int expected = reply[0] == 'B' ? n - 1 : 0;
      f.require_eq(winner.index, expected,
                   std::string("winner under an always-") + reply + " judge, n=" +
                       std::to_string(n));
    }
  }

  std::mt19937 rng(20250101);
  const std::vector<std::string> replies = {
      "A", "B", "b", "a", "[[A]]", "[[B]]", "Response A", "Response B",
      "I cannot judge this", "", "Both are fine. B", "Definitely not sure",
      "A is weaker so B", "BB AA", "The first. A"};
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 8);
    auto script = MockScript::from_json(json{
        {"rules",
         json::array({json{{"match", {{"model", "mock-judge"}}},
                           {"response", {{"content", replies[rng() % replies.size()]}}}}})}});
    MockChatClient client(script);
    Orchestrator orchestrator(client, tournament_config());
    auto [winner, verdicts] = orchestrator.run_tournament(query, synthetic_field(n));
    f.require(winner.index >= 0 && winner.index < n,
              "winner outside the candidate set in a randomized script");
    f.require_eq(verdicts.size(), static_cast<size_t>(n - 1), "verdicts in randomized script");
    if (!f.items.empty()) break;
  }
  return f;
}

// ---------------------------------------------------------------------------
// 6. latency model
// ---------------------------------------------------------------------------
Failures criterion_latency_model() {
  Failures f;
  f.require_eq(simulate_generation_time(32000, {2000.0, 0.0}), 16.0,
               "32k tokens at 2000 tok/s");
  const double fast = simulate_generation_time(32000, {2000.0, 0.0});
  const double slow = simulate_generation_time(32000, {200.0, 0.0});
  f.require_eq(slow, 160.0, "32k tokens at 200 tok/s");
  f.require_eq(slow, 10.0 * fast, "nominal profile exactly 10x slower");

  // plan -> 3 parallel candidates -> 2 sequential judge rounds on one profile
  const HardwareProfile profile{2000.0, 0.5};
  auto script = MockScript::from_json(json{
      {"hardware", {{"tokens_per_second", 2000.0}, {"time_to_first_token", 0.5}}},
      {"rules",
       json::array(
           {json{{"match", {{"model", "mock-planner"}}},
                 {"response",
                  {{"content", "Key concepts: pacing. Plan: 1) outline 2) conclude"},
                   {"completion_tokens", 100}}}},
            json{{"match", {{"model", "mock-reasoner"}, {"seed", 42}}},
                 {"response", {{"content", "<answer>1</answer>"}, {"completion_tokens", 3000}}}},
            json{{"match", {{"model", "mock-reasoner"}, {"seed", 43}}},
                 {"response", {{"content", "<answer>2</answer>"}, {"completion_tokens", 5000}}}},
            json{{"match", {{"model", "mock-reasoner"}, {"seed", 44}}},
                 {"response", {{"content", "<answer>3</answer>"}, {"completion_tokens", 4000}}}},
            json{{"match", {{"model", "mock-judge"}}},
                 {"response", {{"content", "B"}, {"completion_tokens", 50}}}}})}});
  MockChatClient client(script);
  PipelineConfig cfg = tournament_config();
  cfg.plan_enabled = true;
  cfg.bon_n = 3;
  cfg.generation.seed = 42;
  Orchestrator orchestrator(client, cfg);
  FinalResponse response =
      orchestrator.execute_pipeline({"t", "simulate the pipeline", AnswerKind::free_form});

  const double expected = simulate_generation_time(100, profile) +
                          simulate_generation_time(5000, profile) +
                          2.0 * simulate_generation_time(50, profile);
  f.require(within_one_ulp(response.wall_time_s, expected),
            "pipeline wall time off by more than one ulp");
  return f;
}

// ---------------------------------------------------------------------------
// 7. end-to-end determinism of eval reports
// ---------------------------------------------------------------------------
Failures criterion_determinism() {
  Failures f;
  const std::vector<BenchmarkRecord> records =
      load_benchmark(source_path("assets/demo/benchmark.jsonl"));
  const GatewayConfig config = load_gateway_config(source_path("assets/demo/config.json"));

  auto render_report = [&](int workers) {
    auto script = MockScript::load_file(source_path("assets/demo/mock_script.json"));
    MockChatClient client(script);
    EvalOptions options;
    options.runs = 2;
    options.workers = workers;
    options.seed = 7;
    options.benchmark_label = "assets/demo/benchmark.jsonl";
    ScoreReport report =
        run_eval(records, AblationMode::plan_bo3, config.pipeline, client, options);
    return score_report_to_json(report).dump(2);
  };

  const std::string reference = render_report(4);
  for (int repeat = 0; repeat < 4; ++repeat) {
    f.require(render_report(4) == reference,
              "repeated run differs (repeat " + std::to_string(repeat) + ")");
  }
  for (int workers : {1, 16}) {
    f.require(render_report(workers) == reference,
              "worker pool size " + std::to_string(workers) + " changes the report bytes");
  }
  return f;
}

// ---------------------------------------------------------------------------
// 8. ablation harness on a synthetic benchmark
// ---------------------------------------------------------------------------
struct SyntheticBench {
  std::vector<BenchmarkRecord> records;
  json rules;
};

// 40 questions; exactly one of the 3 seeded candidates is correct for the
// first 20 (index 0 for the first 10, so the single-sample mode solves only
// those); the scripted judge always selects the slot holding the gold answer.
SyntheticBench build_synthetic(long long base_seed, int runs) {
  SyntheticBench bench;
  bench.rules = json::array();
  bench.rules.push_back(
      {{"match", {{"model", "mock-planner"}}},
       {"response",
        {{"content", "Key concepts: structure. Plan: 1) scan 2) decide"},
         {"completion_tokens", 12}}}});

  for (int q = 0; q < 40; ++q) {
    const std::string marker = "qz" + std::to_string(100 + q);
    const std::string gold = std::to_string(9100 + q);
    const std::string wrong = std::to_string(8200 + q);

    BenchmarkRecord record;
    record.id = marker;
    record.prompt = "Puzzle " + marker + ": find the magic number.";
    record.answer = gold;
    record.answer_kind = AnswerKind::integer;
    record.domain = "synthetic";
    bench.records.push_back(record);

    int correct_index = -1;
    if (q < 10)
      correct_index = 0;
    else if (q < 20)
      correct_index = 1 + (q % 2);

    if (correct_index >= 0) {
      for (int r = 0; r < runs; ++r) {
        bench.rules.push_back(
            {{"match",
              {{"model", "mock-reasoner"},
               {"contains", marker},
               {"seed", base_seed + static_cast<long long>(r) * kRunSeedStride + correct_index}}},
             {"response",
              {{"content", "mulling it over... <answer>" + gold + "</answer>"},
               {"completion_tokens", 60}}}});
      }
    }
    bench.rules.push_back({{"match", {{"model", "mock-reasoner"}, {"contains", marker}}},
                           {"response",
                            {{"content", "hmm... <answer>" + wrong + "</answer>"},
                             {"completion_tokens", 55}}}});
    bench.rules.push_back({{"match",
                            {{"model", "mock-judge"},
                             {"contains", "Response B final answer: " + gold}}},
                           {"response", {{"content", "B"}, {"completion_tokens", 1}}}});
    bench.rules.push_back({{"match",
                            {{"model", "mock-judge"},
                             {"contains", "Response A final answer: " + gold}}},
                           {"response", {{"content", "A"}, {"completion_tokens", 1}}}});
  }
  bench.rules.push_back(
      {{"match", {{"model", "mock-judge"}}}, {"response", {{"content", "A"}, {"completion_tokens", 1}}}});
  return bench;
}

Failures criterion_ablation() {
  Failures f;
  const long long base_seed = 500;
  const int runs = 2;
  SyntheticBench bench = build_synthetic(base_seed, runs);

  EvalOptions options;
  options.runs = runs;
  options.workers = 4;
  options.seed = base_seed;
  options.benchmark_label = "synthetic-40";

  auto eval_mode = [&](AblationMode mode) {
    auto script = MockScript::from_json(json{{"rules", bench.rules}});
    MockChatClient client(script);
    ScoreReport report = run_eval(bench.records, mode, tournament_config(), client, options);
    return std::pair{report, script};
  };

  auto [base_report, base_script] = eval_mode(AblationMode::base);
  auto [bo3_report, bo3_script] = eval_mode(AblationMode::bo3);
  auto [full_report, full_script] = eval_mode(AblationMode::plan_bo3);

  f.require_eq(base_report.error_count, 0LL, "errors in base mode");
  f.require_eq(bo3_report.error_count, 0LL, "errors in bo3 mode");
  f.require_eq(full_report.error_count, 0LL, "errors in plan+bo3 mode");

  // Enumerated expectations: 10/40 solvable with one sample, 20/40 with three.
  f.require_eq(base_report.pass1_avg, 25.0, "single-sample accuracy");
  f.require_eq(bo3_report.pass1_avg, 50.0, "best-of-3 accuracy");
  f.require_eq(full_report.pass1_avg, 50.0, "plan + best-of-3 accuracy");
  f.require(bo3_report.pass1_avg >= base_report.pass1_avg,
            "best-of-3 should not fall below the single-sample baseline");

  // 1 plan + 3 candidates + 2 judge rounds per question per run.
  f.require_eq(full_script->ledger_size(), static_cast<size_t>(40 * runs * 6),
               "upstream calls for plan+bo3");
  f.require_eq(base_script->ledger_size(), static_cast<size_t>(40 * runs * 1),
               "upstream calls for base");
  f.require_eq(bo3_script->ledger_size(), static_cast<size_t>(40 * runs * 5),
               "upstream calls for bo3");
  return f;
}

// ---------------------------------------------------------------------------
// 9. gateway wire conformance against the standalone mock server
// ---------------------------------------------------------------------------
GatewayConfig wire_config(int mock_port) {
  GatewayConfig cfg;
  cfg.pipeline.plan_enabled = true;
  cfg.pipeline.bon_n = 3;
  cfg.pipeline.generation.seed = 7;
  cfg.pipeline.max_retries = 0;
  const std::string base = "http://127.0.0.1:" + std::to_string(mock_port);
  cfg.pipeline.reasoner_endpoint = {base, "mock-reasoner", {}};
  cfg.pipeline.planner_endpoint = {base, "mock-planner", {}};
  cfg.pipeline.judge_endpoint = {base, "mock-judge", {}};
  return cfg;
}

Failures criterion_gateway_wire() {
  Failures f;

  auto script = MockScript::load_file(source_path("assets/demo/mock_script.json"));
  MockServer mock(script);
  const int mock_port = mock.start("127.0.0.1", 0);

  Gateway gateway(wire_config(mock_port), std::make_shared<HttpChatClient>());
  const int gate_port = gateway.start("127.0.0.1", 0);
  httplib::Client client("127.0.0.1", gate_port);

  // success path
  {
    auto res = client.Post("/v1/reason",
                           R"({"prompt":"Compute 12 + 30.","include_trace":true})",
                           "application/json");
    f.require(res && res->status == 200, "success path did not return 200");
    if (res) {
      f.require(res->body + "\n" == read_file(golden_path("reason_success.json")),
                "success body differs from the golden file");
    }
  }

  // 400 path
  {
    auto res = client.Post("/v1/reason", R"({"prompt":""})", "application/json");
    f.require(res && res->status == 400, "validation failure did not return 400");
    if (res) {
      f.require(res->body + "\n" == read_file(golden_path("reason_400.json")),
                "400 body differs from the golden file");
    }
  }

  // 502 path: a reasoner that always answers 500
  {
    auto down_script = MockScript::from_json(json{
        {"rules", json::array({json{{"match", {{"model", "down-model"}}},
                                    {"response", {{"status", 500}}}}})}});
    MockServer down_mock(down_script);
    const int down_port = down_mock.start("127.0.0.1", 0);
    GatewayConfig cfg = wire_config(down_port);
    cfg.pipeline.plan_enabled = false;
    cfg.pipeline.reasoner_endpoint.model_name = "down-model";
    Gateway down_gateway(cfg, std::make_shared<HttpChatClient>());
    const int down_gate_port = down_gateway.start("127.0.0.1", 0);
    httplib::Client down_client("127.0.0.1", down_gate_port);

    auto res = down_client.Post("/v1/reason", R"({"prompt":"hello"})", "application/json");
    f.require(res && res->status == 502, "exhausted upstream did not return 502");
    if (res) {
      f.require(res->body + "\n" == read_file(golden_path("reason_502.json")),
                "502 body differs from the golden file");
    }
    down_gateway.stop();
    down_mock.stop();
  }

  // 504 path: a spent end-to-end budget
  {
    GatewayConfig cfg = wire_config(mock_port);
    cfg.pipeline.total_timeout_s = 0.000001;
    Gateway slow_gateway(cfg, std::make_shared<HttpChatClient>());
    const int slow_port = slow_gateway.start("127.0.0.1", 0);
    httplib::Client slow_client("127.0.0.1", slow_port);

    auto res = slow_client.Post("/v1/reason", R"({"prompt":"hello"})", "application/json");
    f.require(res && res->status == 504, "spent deadline did not return 504");
    if (res) {
      f.require(res->body + "\n" == read_file(golden_path("reason_504.json")),
                "504 body differs from the golden file");
    }
    slow_gateway.stop();
  }

  // 64 concurrent requests return the sequential bodies
  {
    std::vector<std::string> payloads;
    const std::vector<std::string> prompts = {"Compute 12 + 30.", "Compute 7 * 8.",
                                              "Compute 100 - 55.", "Compute 9 * 9.",
                                              "Compute 50 / 2.", "Compute 2^10."};
    for (int i = 0; i < 64; ++i) {
      payloads.push_back(json{{"prompt", prompts[i % prompts.size()]}}.dump());
    }

    std::vector<std::string> sequential;
    for (const std::string& payload : payloads) {
      auto res = client.Post("/v1/reason", payload, "application/json");
      f.require(res && res->status == 200, "sequential request failed");
      sequential.push_back(res ? res->body : "");
    }

    std::vector<std::future<std::string>> pending;
    for (const std::string& payload : payloads) {
      pending.push_back(std::async(std::launch::async, [gate_port, payload] {
        httplib::Client thread_client("127.0.0.1", gate_port);
        auto res = thread_client.Post("/v1/reason", payload, "application/json");
        return res ? res->body : std::string("(no response)");
      }));
    }
    for (size_t i = 0; i < pending.size(); ++i) {
      const std::string body = pending[i].get();
      if (body != sequential[i]) {
        f.items.push_back("concurrent body " + std::to_string(i) +
                          " differs from sequential execution");
        break;
      }
    }
  }

  gateway.stop();
  mock.stop();
  return f;
}

struct CriterionEntry {
  int number;
  const char* label;
  std::function<Failures()> run;
};

const std::vector<CriterionEntry>& criteria() {
  static const std::vector<CriterionEntry> entries = {
      {1, "micro-average reproduction", criterion_micro_average},
      {2, "token-reduction reproduction", criterion_token_reduction},
      {3, "safety aggregation reproduction", criterion_safety},
      {4, "pass@k oracle equivalence", criterion_pass_at_k},
      {5, "tournament contract", criterion_tournament},
      {6, "latency model", criterion_latency_model},
      {7, "end-to-end determinism", criterion_determinism},
      {8, "ablation harness", criterion_ablation},
      {9, "gateway wire conformance", criterion_gateway_wire},
  };
  return entries;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);

  int failures = 0;
  for (const CriterionEntry& entry : criteria()) {
    if (only != 0 && entry.number != only) continue;
    Failures result;
    try {
      result = entry.run();
    } catch (const std::exception& e) {
      result.items.push_back(std::string("exception: ") + e.what());
    }
    if (result.items.empty()) {
      std::printf("[PASS] criterion %d: %s\n", entry.number, entry.label);
    } else {
      ++failures;
      std::printf("[FAIL] criterion %d: %s\n", entry.number, entry.label);
      for (const std::string& item : result.items) {
        std::printf("       - %s\n", item.c_str());
      }
    }
  }
  return failures;
}

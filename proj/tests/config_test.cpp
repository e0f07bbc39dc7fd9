#include <doctest.h>

#include <random>

#include "rgate/config.hpp"

using namespace rgate;
using nlohmann::json;

TEST_CASE("empty config validates to the standard evaluation defaults") {
  PipelineConfig cfg = validate_config(pipeline_config_from_json(json::object()));
  CHECK(cfg.generation.temperature == 1.0);
  CHECK(cfg.generation.top_p == 0.95);
  CHECK(cfg.generation.max_tokens == 64000);
  CHECK(cfg.generation.stop_sequences == std::vector<std::string>{"</answer>"});
  CHECK_FALSE(cfg.generation.seed.has_value());
  CHECK(cfg.bon_n == 3);
  CHECK(cfg.plan_enabled);
  CHECK_FALSE(cfg.judge_swap);
}

TEST_CASE("bon_n below one is rejected with a field-level message") {
  PipelineConfig cfg;
  cfg.bon_n = 0;
  CHECK_THROWS_WITH_AS(validate_config(cfg), "invalid_config: bon_n: must be >= 1 (got 0)",
                       Error);
}

TEST_CASE("top_p zero is rejected, temperature zero is accepted") {
  PipelineConfig cfg;
  cfg.generation.top_p = 0.0;
  CHECK_THROWS_AS(validate_config(cfg), Error);

  cfg.generation.top_p = 0.95;
  cfg.generation.temperature = 0.0;
  CHECK_NOTHROW(validate_config(cfg));
}

TEST_CASE("temperature below zero and nonpositive max_tokens are rejected") {
  PipelineConfig cfg;
  cfg.generation.temperature = -0.1;
  CHECK_THROWS_AS(validate_config(cfg), Error);

  cfg = PipelineConfig{};
  cfg.generation.max_tokens = 0;
  CHECK_THROWS_AS(validate_config(cfg), Error);
}

TEST_CASE("planner and judge endpoints inherit the reasoner endpoint") {
  PipelineConfig cfg;
  cfg.reasoner_endpoint = {"http://models.example:9000", "big-model", "secret"};
  cfg = validate_config(cfg);
  CHECK(cfg.planner_endpoint.base_url == "http://models.example:9000");
  CHECK(cfg.planner_endpoint.model_name == "big-model");
  CHECK(cfg.planner_endpoint.auth_token == std::optional<std::string>("secret"));
  CHECK(cfg.judge_endpoint.base_url == "http://models.example:9000");
}

TEST_CASE("an explicit planner URL does not inherit the reasoner credential") {
  PipelineConfig cfg;
  cfg.reasoner_endpoint = {"http://models.example:9000", "big-model", "secret"};
  cfg.planner_endpoint.base_url = "http://other.example:9001";
  cfg = validate_config(cfg);
  CHECK_FALSE(cfg.planner_endpoint.auth_token.has_value());
  CHECK(cfg.planner_endpoint.model_name == "big-model");
}

TEST_CASE("malformed endpoint URLs are rejected") {
  PipelineConfig cfg;
  cfg.reasoner_endpoint.base_url = "ftp://nope";
  CHECK_THROWS_AS(validate_config(cfg), Error);
  cfg.reasoner_endpoint.base_url = "not a url";
  CHECK_THROWS_AS(validate_config(cfg), Error);
  cfg.reasoner_endpoint.base_url = "http://ok.example/v1/";
  CHECK_NOTHROW(validate_config(cfg));
}

TEST_CASE("unknown config keys are rejected") {
  CHECK_THROWS_AS(pipeline_config_from_json(json{{"bon", 3}}), Error);
  CHECK_THROWS_AS(pipeline_config_from_json(json{{"generation", {{"temp", 1.0}}}}), Error);
}

TEST_CASE("planner section sampling overrides land in planner_generation") {
  json doc{{"planner", {{"model", "planner-model"}, {"temperature", 0.1}, {"max_tokens", 256}}}};
  PipelineConfig cfg = validate_config(pipeline_config_from_json(doc));
  CHECK(cfg.planner_generation.temperature == 0.1);
  CHECK(cfg.planner_generation.max_tokens == 256);
  CHECK(cfg.planner_endpoint.model_name == "planner-model");
  // Judge keeps its deterministic defaults.
  CHECK(cfg.judge_generation.temperature == 0.0);
  CHECK(cfg.judge_generation.max_tokens == 512);
}

TEST_CASE("gateway server section is parsed and validated") {
  json doc{{"server", {{"max_n", 4}, {"max_concurrent_upstream", 16}}}};
  GatewayConfig cfg = validate_config(gateway_config_from_json(doc));
  CHECK(cfg.max_n == 4);
  CHECK(cfg.max_concurrent_upstream == 16);

  json bad{{"bon_n", 9}};
  CHECK_THROWS_AS(validate_config(gateway_config_from_json(bad)), Error);
}

TEST_CASE("answer kinds round-trip through their wire names") {
  for (AnswerKind kind : {AnswerKind::integer, AnswerKind::string, AnswerKind::multiple_choice,
                          AnswerKind::free_form}) {
    CHECK(answer_kind_from_string(answer_kind_to_string(kind)) == kind);
  }
  CHECK_THROWS_AS(answer_kind_from_string("float"), Error);
}

TEST_CASE("empty queries are rejected") {
  CHECK_THROWS_AS(validate_query({"q1", "", AnswerKind::free_form}), Error);
  CHECK_NOTHROW(validate_query({"q1", "why?", AnswerKind::free_form}));
}

namespace {

PipelineConfig random_valid_config(std::mt19937& rng) {
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  std::uniform_int_distribution<int> small(1, 8);
  std::uniform_int_distribution<int> tokens(1, 100000);
  std::uniform_int_distribution<long long> seeds(-1000, 1000);
  std::uniform_int_distribution<int> coin(0, 1);

  PipelineConfig cfg;
  cfg.generation.temperature = unit(rng) * 2.0;
  cfg.generation.top_p = unit(rng);
  cfg.generation.max_tokens = tokens(rng);
  if (coin(rng)) cfg.generation.seed = seeds(rng);
  if (coin(rng)) cfg.generation.stop_sequences = {"</answer>", "STOP"};
  cfg.bon_n = small(rng);
  cfg.plan_enabled = coin(rng) != 0;
  cfg.judge_swap = coin(rng) != 0;
  cfg.reasoner_endpoint = {"http://host" + std::to_string(small(rng)) + ".example:8000",
                           "model-" + std::to_string(small(rng)),
                           coin(rng) ? std::optional<std::string>("tok") : std::nullopt};
  cfg.request_timeout_s = unit(rng) * 100.0;
  cfg.total_timeout_s = unit(rng) * 1000.0;
  cfg.max_retries = small(rng) - 1;
  return cfg;
}

}  // namespace

TEST_CASE("validated configs serialize and parse back to the same config") {
  std::mt19937 rng(20240831);
  for (int i = 0; i < 200; ++i) {
    PipelineConfig validated = validate_config(random_valid_config(rng));
    json doc = pipeline_config_to_json(validated);
    PipelineConfig reparsed = pipeline_config_from_json(doc);
    CHECK(reparsed == validated);
    // Normalization is idempotent.
    CHECK(validate_config(reparsed) == validated);
  }
}

TEST_CASE("every accepted config satisfies the field invariants") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> wild(-2.0, 3.0);
  std::uniform_int_distribution<int> wild_int(-5, 10);
  int accepted = 0;
  for (int i = 0; i < 500; ++i) {
    PipelineConfig cfg;
    cfg.generation.temperature = wild(rng);
    cfg.generation.top_p = wild(rng);
    cfg.generation.max_tokens = wild_int(rng) * 1000;
    cfg.bon_n = wild_int(rng);
    try {
      PipelineConfig ok = validate_config(cfg);
      ++accepted;
      CHECK(ok.generation.temperature >= 0.0);
      CHECK(ok.generation.top_p > 0.0);
      CHECK(ok.generation.top_p <= 1.0);
      CHECK(ok.generation.max_tokens >= 1);
      CHECK(ok.bon_n >= 1);
      CHECK(is_valid_base_url(ok.reasoner_endpoint.base_url));
      CHECK(is_valid_base_url(ok.planner_endpoint.base_url));
      CHECK(is_valid_base_url(ok.judge_endpoint.base_url));
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::invalid_config);
    }
  }
  CHECK(accepted > 0);
}

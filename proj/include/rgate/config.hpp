#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rgate/errors.hpp"

namespace rgate {

// Sampling settings forwarded verbatim to the upstream completion endpoint.
struct GenerationConfig {
  double temperature = 1.0;
  double top_p = 0.95;
  int max_tokens = 64000;
  std::vector<std::string> stop_sequences{"</answer>"};
  std::optional<long long> seed;

  bool operator==(const GenerationConfig&) const = default;
};

// Planning calls use a short, near-deterministic budget distinct from the
// reasoner settings; judge calls are fully deterministic.
GenerationConfig default_planner_generation();
GenerationConfig default_judge_generation();

struct EndpointDescriptor {
  std::string base_url;    // absolute http(s) URL, no trailing slash
  std::string model_name;
  std::optional<std::string> auth_token;  // bearer credential; keep out of logs

  bool operator==(const EndpointDescriptor&) const = default;
};

struct PipelineConfig {
  bool plan_enabled = true;
  int bon_n = 3;
  // When set, every judge round is run twice with the response slots swapped
  // and the round winner must be agreed on by both calls (disagreement keeps
  // the current winner).
  bool judge_swap = false;

  GenerationConfig generation;
  GenerationConfig planner_generation = default_planner_generation();
  GenerationConfig judge_generation = default_judge_generation();

  EndpointDescriptor reasoner_endpoint{"http://127.0.0.1:8000", "default", {}};
  // Empty fields inherit from the reasoner endpoint during validation.
  EndpointDescriptor planner_endpoint;
  EndpointDescriptor judge_endpoint;

  double request_timeout_s = 120.0;
  double total_timeout_s = 600.0;
  int max_retries = 2;

  bool operator==(const PipelineConfig&) const = default;
};

// Service-level settings that sit on top of the pipeline config.
struct GatewayConfig {
  PipelineConfig pipeline;
  int max_n = 8;                     // hard cap on per-request n overrides
  int max_concurrent_upstream = 64;  // server-wide in-flight upstream bound
  std::string request_log_path;      // JSONL audit log; empty disables

  bool operator==(const GatewayConfig&) const = default;
};

enum class AnswerKind { integer, string, multiple_choice, free_form };

AnswerKind answer_kind_from_string(const std::string& name);
const char* answer_kind_to_string(AnswerKind kind);

struct ReasoningQuery {
  std::string id;
  std::string prompt;  // the user's question, verbatim
  AnswerKind answer_kind = AnswerKind::free_form;
};

// Throws Error(invalid_config) when the prompt is empty.
void validate_query(const ReasoningQuery& query);

bool is_valid_base_url(const std::string& url);

// Normalizes a parsed config: fills defaults, inherits planner/judge endpoint
// fields from the reasoner, strips trailing slashes from URLs, and rejects
// anything violating a field invariant with a field-level message.
PipelineConfig validate_config(PipelineConfig raw);
GatewayConfig validate_config(GatewayConfig raw);

PipelineConfig pipeline_config_from_json(const nlohmann::json& doc);
nlohmann::json pipeline_config_to_json(const PipelineConfig& cfg);

GatewayConfig gateway_config_from_json(const nlohmann::json& doc);
nlohmann::json gateway_config_to_json(const GatewayConfig& cfg);

// Reads, parses and validates a config file. Throws Error(parse_error) on
// unreadable or malformed JSON and Error(invalid_config) on contract violations.
GatewayConfig load_gateway_config(const std::string& path);

}  // namespace rgate

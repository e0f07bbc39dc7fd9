#include "rgate/config.hpp"

#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

namespace rgate {

using nlohmann::json;

namespace {

[[noreturn]] void fail_field(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::invalid_config, field + ": " + why);
}

void require_finite(const std::string& field, double v) {
  if (!std::isfinite(v)) fail_field(field, "must be a finite number");
}

void check_generation(const std::string& prefix, const GenerationConfig& gen) {
  require_finite(prefix + ".temperature", gen.temperature);
  require_finite(prefix + ".top_p", gen.top_p);
  if (gen.temperature < 0.0) fail_field(prefix + ".temperature", "must be >= 0");
  if (!(gen.top_p > 0.0 && gen.top_p <= 1.0))
    fail_field(prefix + ".top_p", "must be in (0, 1]");
  if (gen.max_tokens < 1) fail_field(prefix + ".max_tokens", "must be >= 1");
}

std::string strip_trailing_slashes(std::string url) {
  while (!url.empty() && url.back() == '/') url.pop_back();
  return url;
}

const json* find_key(const json& doc, const char* key) {
  auto it = doc.find(key);
  return it == doc.end() ? nullptr : &*it;
}

void reject_unknown_keys(const json& doc, const std::vector<std::string>& allowed,
                         const std::string& where) {
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    bool known = false;
    for (const auto& k : allowed)
      if (it.key() == k) known = true;
    if (!known) fail_field(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
  }
}

double get_number(const json& v, const std::string& field) {
  if (!v.is_number()) fail_field(field, "must be a number");
  return v.get<double>();
}

long long get_integer(const json& v, const std::string& field) {
  if (!v.is_number_integer()) fail_field(field, "must be an integer");
  return v.get<long long>();
}

bool get_boolean(const json& v, const std::string& field) {
  if (!v.is_boolean()) fail_field(field, "must be a boolean");
  return v.get<bool>();
}

std::string get_string(const json& v, const std::string& field) {
  if (!v.is_string()) fail_field(field, "must be a string");
  return v.get<std::string>();
}

GenerationConfig generation_from_json(const json& doc, const std::string& where,
                                      GenerationConfig base) {
  if (!doc.is_object()) fail_field(where, "must be an object");
  reject_unknown_keys(doc, {"temperature", "top_p", "max_tokens", "stop", "seed"}, where);
  GenerationConfig gen = std::move(base);
  if (const json* v = find_key(doc, "temperature"))
    gen.temperature = get_number(*v, where + ".temperature");
  if (const json* v = find_key(doc, "top_p")) gen.top_p = get_number(*v, where + ".top_p");
  if (const json* v = find_key(doc, "max_tokens"))
    gen.max_tokens = static_cast<int>(get_integer(*v, where + ".max_tokens"));
  if (const json* v = find_key(doc, "stop")) {
    if (!v->is_array()) fail_field(where + ".stop", "must be an array of strings");
    gen.stop_sequences.clear();
    for (const auto& s : *v) gen.stop_sequences.push_back(get_string(s, where + ".stop[]"));
  }
  if (const json* v = find_key(doc, "seed")) {
    if (v->is_null())
      gen.seed.reset();
    else
      gen.seed = get_integer(*v, where + ".seed");
  }
  return gen;
}

json generation_to_json(const GenerationConfig& gen) {
  json doc;
  doc["temperature"] = gen.temperature;
  doc["top_p"] = gen.top_p;
  doc["max_tokens"] = gen.max_tokens;
  doc["stop"] = gen.stop_sequences;
  if (gen.seed) doc["seed"] = *gen.seed;
  return doc;
}

// Planner and judge endpoint objects may carry sampling overrides next to the
// address fields.
struct EndpointSection {
  EndpointDescriptor endpoint;
  std::optional<double> temperature;
  std::optional<double> top_p;
  std::optional<int> max_tokens;
};

EndpointSection endpoint_from_json(const json& doc, const std::string& where,
                                   bool allow_generation_overrides) {
  if (!doc.is_object()) fail_field(where, "must be an object");
  std::vector<std::string> allowed{"base_url", "model", "auth_token"};
  if (allow_generation_overrides) {
    allowed.insert(allowed.end(), {"temperature", "top_p", "max_tokens"});
  }
  reject_unknown_keys(doc, allowed, where);
  EndpointSection section;
  if (const json* v = find_key(doc, "base_url"))
    section.endpoint.base_url = get_string(*v, where + ".base_url");
  if (const json* v = find_key(doc, "model"))
    section.endpoint.model_name = get_string(*v, where + ".model");
  if (const json* v = find_key(doc, "auth_token"))
    section.endpoint.auth_token = get_string(*v, where + ".auth_token");
  if (const json* v = find_key(doc, "temperature"))
    section.temperature = get_number(*v, where + ".temperature");
  if (const json* v = find_key(doc, "top_p")) section.top_p = get_number(*v, where + ".top_p");
  if (const json* v = find_key(doc, "max_tokens"))
    section.max_tokens = static_cast<int>(get_integer(*v, where + ".max_tokens"));
  return section;
}

json endpoint_to_json(const EndpointDescriptor& ep) {
  json doc;
  doc["base_url"] = ep.base_url;
  doc["model"] = ep.model_name;
  if (ep.auth_token) doc["auth_token"] = *ep.auth_token;
  return doc;
}

}  // namespace

GenerationConfig default_planner_generation() {
  GenerationConfig gen;
  gen.temperature = 0.3;
  gen.top_p = 0.95;
  gen.max_tokens = 1024;
  gen.stop_sequences.clear();
  return gen;
}

GenerationConfig default_judge_generation() {
  GenerationConfig gen;
  gen.temperature = 0.0;
  gen.top_p = 0.95;
  gen.max_tokens = 512;
  gen.stop_sequences.clear();
  return gen;
}

AnswerKind answer_kind_from_string(const std::string& name) {
  if (name == "integer") return AnswerKind::integer;
  if (name == "string") return AnswerKind::string;
  if (name == "multiple_choice") return AnswerKind::multiple_choice;
  if (name == "free_form") return AnswerKind::free_form;
  throw Error(ErrorCode::invalid_config, "answer_kind: unknown value '" + name + "'");
}

const char* answer_kind_to_string(AnswerKind kind) {
  switch (kind) {
    case AnswerKind::integer:
      return "integer";
    case AnswerKind::string:
      return "string";
    case AnswerKind::multiple_choice:
      return "multiple_choice";
    case AnswerKind::free_form:
      return "free_form";
  }
  return "free_form";
}

void validate_query(const ReasoningQuery& query) {
  if (query.prompt.empty())
    throw Error(ErrorCode::invalid_config, "prompt: must be non-empty");
}

bool is_valid_base_url(const std::string& url) {
  static const std::regex pattern(R"(^https?://[A-Za-z0-9.\-\[\]:]+(:\d{1,5})?(/[^\s]*)?$)");
  return std::regex_match(url, pattern);
}

PipelineConfig validate_config(PipelineConfig raw) {
  if (raw.bon_n < 1) fail_field("bon_n", "must be >= 1 (got " + std::to_string(raw.bon_n) + ")");

  check_generation("generation", raw.generation);
  check_generation("planner_generation", raw.planner_generation);
  check_generation("judge_generation", raw.judge_generation);

  if (raw.reasoner_endpoint.base_url.empty())
    raw.reasoner_endpoint.base_url = "http://127.0.0.1:8000";
  if (raw.reasoner_endpoint.model_name.empty()) raw.reasoner_endpoint.model_name = "default";
  raw.reasoner_endpoint.base_url = strip_trailing_slashes(raw.reasoner_endpoint.base_url);
  if (!is_valid_base_url(raw.reasoner_endpoint.base_url))
    fail_field("reasoner.base_url", "not a valid absolute http(s) URL: '" +
                                        raw.reasoner_endpoint.base_url + "'");

  // Planner and judge inherit unset fields from the reasoner so that a
  // single-endpoint deployment needs exactly one address in its config.
  auto inherit = [&](EndpointDescriptor& ep, const char* name) {
    const bool inherited_url = ep.base_url.empty();
    if (inherited_url) ep.base_url = raw.reasoner_endpoint.base_url;
    if (ep.model_name.empty()) ep.model_name = raw.reasoner_endpoint.model_name;
    if (!ep.auth_token && inherited_url) ep.auth_token = raw.reasoner_endpoint.auth_token;
    ep.base_url = strip_trailing_slashes(ep.base_url);
    if (!is_valid_base_url(ep.base_url))
      fail_field(std::string(name) + ".base_url",
                 "not a valid absolute http(s) URL: '" + ep.base_url + "'");
  };
  inherit(raw.planner_endpoint, "planner");
  inherit(raw.judge_endpoint, "judge");

  if (!(raw.request_timeout_s > 0.0)) fail_field("timeouts.request_seconds", "must be > 0");
  if (raw.total_timeout_s < 0.0) fail_field("timeouts.total_seconds", "must be >= 0");
  if (raw.max_retries < 0) fail_field("timeouts.max_retries", "must be >= 0");

  return raw;
}

GatewayConfig validate_config(GatewayConfig raw) {
  raw.pipeline = validate_config(std::move(raw.pipeline));
  if (raw.max_n < 1) fail_field("server.max_n", "must be >= 1");
  if (raw.pipeline.bon_n > raw.max_n)
    fail_field("bon_n", "exceeds server.max_n (" + std::to_string(raw.max_n) + ")");
  if (raw.max_concurrent_upstream < 1) fail_field("server.max_concurrent_upstream", "must be >= 1");
  return raw;
}

PipelineConfig pipeline_config_from_json(const json& doc) {
  if (!doc.is_object())
    throw Error(ErrorCode::invalid_config, "config root must be a JSON object");
  reject_unknown_keys(doc,
                      {"generation", "bon_n", "plan_enabled", "judge_swap", "reasoner", "planner",
                       "judge", "timeouts", "server"},
                      "");

  PipelineConfig cfg;
  if (const json* v = find_key(doc, "generation"))
    cfg.generation = generation_from_json(*v, "generation", GenerationConfig{});
  if (const json* v = find_key(doc, "bon_n"))
    cfg.bon_n = static_cast<int>(get_integer(*v, "bon_n"));
  if (const json* v = find_key(doc, "plan_enabled"))
    cfg.plan_enabled = get_boolean(*v, "plan_enabled");
  if (const json* v = find_key(doc, "judge_swap"))
    cfg.judge_swap = get_boolean(*v, "judge_swap");

  if (const json* v = find_key(doc, "reasoner"))
    cfg.reasoner_endpoint = endpoint_from_json(*v, "reasoner", false).endpoint;
  if (const json* v = find_key(doc, "planner")) {
    EndpointSection section = endpoint_from_json(*v, "planner", true);
    cfg.planner_endpoint = section.endpoint;
    if (section.temperature) cfg.planner_generation.temperature = *section.temperature;
    if (section.top_p) cfg.planner_generation.top_p = *section.top_p;
    if (section.max_tokens) cfg.planner_generation.max_tokens = *section.max_tokens;
  }
  if (const json* v = find_key(doc, "judge")) {
    EndpointSection section = endpoint_from_json(*v, "judge", true);
    cfg.judge_endpoint = section.endpoint;
    if (section.temperature) cfg.judge_generation.temperature = *section.temperature;
    if (section.top_p) cfg.judge_generation.top_p = *section.top_p;
    if (section.max_tokens) cfg.judge_generation.max_tokens = *section.max_tokens;
  }

  if (const json* v = find_key(doc, "timeouts")) {
    if (!v->is_object()) fail_field("timeouts", "must be an object");
    reject_unknown_keys(*v, {"request_seconds", "total_seconds", "max_retries"}, "timeouts");
    if (const json* t = find_key(*v, "request_seconds"))
      cfg.request_timeout_s = get_number(*t, "timeouts.request_seconds");
    if (const json* t = find_key(*v, "total_seconds"))
      cfg.total_timeout_s = get_number(*t, "timeouts.total_seconds");
    if (const json* t = find_key(*v, "max_retries"))
      cfg.max_retries = static_cast<int>(get_integer(*t, "timeouts.max_retries"));
  }

  return cfg;
}

json pipeline_config_to_json(const PipelineConfig& cfg) {
  json doc;
  doc["generation"] = generation_to_json(cfg.generation);
  doc["bon_n"] = cfg.bon_n;
  doc["plan_enabled"] = cfg.plan_enabled;
  doc["judge_swap"] = cfg.judge_swap;
  doc["reasoner"] = endpoint_to_json(cfg.reasoner_endpoint);

  json planner = endpoint_to_json(cfg.planner_endpoint);
  planner["temperature"] = cfg.planner_generation.temperature;
  planner["top_p"] = cfg.planner_generation.top_p;
  planner["max_tokens"] = cfg.planner_generation.max_tokens;
  doc["planner"] = planner;

  json judge = endpoint_to_json(cfg.judge_endpoint);
  judge["temperature"] = cfg.judge_generation.temperature;
  judge["top_p"] = cfg.judge_generation.top_p;
  judge["max_tokens"] = cfg.judge_generation.max_tokens;
  doc["judge"] = judge;

  doc["timeouts"] = {{"request_seconds", cfg.request_timeout_s},
                     {"total_seconds", cfg.total_timeout_s},
                     {"max_retries", cfg.max_retries}};
  return doc;
}

GatewayConfig gateway_config_from_json(const json& doc) {
  GatewayConfig cfg;
  cfg.pipeline = pipeline_config_from_json(doc);
  if (const json* v = find_key(doc, "server")) {
    if (!v->is_object()) fail_field("server", "must be an object");
    reject_unknown_keys(*v, {"max_n", "max_concurrent_upstream", "request_log"}, "server");
    if (const json* s = find_key(*v, "max_n"))
      cfg.max_n = static_cast<int>(get_integer(*s, "server.max_n"));
    if (const json* s = find_key(*v, "max_concurrent_upstream"))
      cfg.max_concurrent_upstream =
          static_cast<int>(get_integer(*s, "server.max_concurrent_upstream"));
    if (const json* s = find_key(*v, "request_log"))
      cfg.request_log_path = get_string(*s, "server.request_log");
  }
  return cfg;
}

json gateway_config_to_json(const GatewayConfig& cfg) {
  json doc = pipeline_config_to_json(cfg.pipeline);
  doc["server"] = {{"max_n", cfg.max_n},
                   {"max_concurrent_upstream", cfg.max_concurrent_upstream},
                   {"request_log", cfg.request_log_path}};
  return doc;
}

GatewayConfig load_gateway_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::parse_error, "cannot open config file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, "config file '" + path + "': " + e.what());
  }
  return validate_config(gateway_config_from_json(doc));
}

}  // namespace rgate

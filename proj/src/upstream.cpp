#include "rgate/upstream.hpp"

#include <chrono>
#include <cmath>
#include <regex>
#include <thread>

#include <httplib.h>

namespace rgate {

using nlohmann::json;

ChatRequest make_chat_request(const std::string& model, MessageList messages,
                              const GenerationConfig& gen) {
  ChatRequest req;
  req.model = model;
  req.messages = std::move(messages);
  req.temperature = gen.temperature;
  req.top_p = gen.top_p;
  req.max_tokens = gen.max_tokens;
  req.stop = gen.stop_sequences;
  req.seed = gen.seed;
  return req;
}

json chat_request_to_json(const ChatRequest& req) {
  json messages = json::array();
  for (const auto& m : req.messages) {
    messages.push_back({{"role", m.role}, {"content", m.content}});
  }
  json doc;
  doc["model"] = req.model;
  doc["messages"] = std::move(messages);
  doc["temperature"] = req.temperature;
  doc["top_p"] = req.top_p;
  doc["max_tokens"] = req.max_tokens;
  doc["stop"] = req.stop;
  if (req.seed) doc["seed"] = *req.seed;
  return doc;
}

namespace {

[[noreturn]] void protocol_error(const std::string& what) {
  throw Error(ErrorCode::upstream_protocol, what);
}

}  // namespace

ChatRequest chat_request_from_json(const json& doc) {
  if (!doc.is_object()) protocol_error("request body must be a JSON object");
  ChatRequest req;
  if (!doc.contains("model") || !doc["model"].is_string())
    protocol_error("request field 'model' missing or not a string");
  req.model = doc["model"].get<std::string>();

  if (!doc.contains("messages") || !doc["messages"].is_array() || doc["messages"].empty())
    protocol_error("request field 'messages' missing or empty");
  for (const auto& m : doc["messages"]) {
    if (!m.is_object() || !m.contains("role") || !m.contains("content") ||
        !m["role"].is_string() || !m["content"].is_string())
      protocol_error("each message needs string 'role' and 'content'");
    std::string role = m["role"].get<std::string>();
    if (role != "system" && role != "user" && role != "assistant")
      protocol_error("invalid message role '" + role + "'");
    req.messages.push_back({role, m["content"].get<std::string>()});
  }

  if (doc.contains("temperature")) {
    if (!doc["temperature"].is_number()) protocol_error("'temperature' must be a number");
    req.temperature = doc["temperature"].get<double>();
  }
  if (doc.contains("top_p")) {
    if (!doc["top_p"].is_number()) protocol_error("'top_p' must be a number");
    req.top_p = doc["top_p"].get<double>();
  }
  if (doc.contains("max_tokens")) {
    if (!doc["max_tokens"].is_number_integer()) protocol_error("'max_tokens' must be an integer");
    req.max_tokens = doc["max_tokens"].get<int>();
  }
  if (doc.contains("stop")) {
    if (!doc["stop"].is_array()) protocol_error("'stop' must be an array");
    req.stop.clear();
    for (const auto& s : doc["stop"]) {
      if (!s.is_string()) protocol_error("'stop' entries must be strings");
      req.stop.push_back(s.get<std::string>());
    }
  }
  if (doc.contains("seed") && !doc["seed"].is_null()) {
    if (!doc["seed"].is_number_integer()) protocol_error("'seed' must be an integer");
    req.seed = doc["seed"].get<long long>();
  }
  return req;
}

ChatResult chat_result_from_wire(const json& doc) {
  if (!doc.is_object()) protocol_error("response body must be a JSON object");
  if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty())
    protocol_error("response field 'choices' missing or empty");
  const json& choice = doc["choices"][0];
  if (!choice.contains("message") || !choice["message"].is_object() ||
      !choice["message"].contains("content") || !choice["message"]["content"].is_string())
    protocol_error("response field 'choices[0].message.content' missing");
  if (!choice.contains("finish_reason") || !choice["finish_reason"].is_string())
    protocol_error("response field 'choices[0].finish_reason' missing");
  if (!doc.contains("usage") || !doc["usage"].is_object())
    protocol_error("response field 'usage' missing");
  const json& usage = doc["usage"];
  if (!usage.contains("prompt_tokens") || !usage["prompt_tokens"].is_number_integer() ||
      !usage.contains("completion_tokens") || !usage["completion_tokens"].is_number_integer())
    protocol_error("response usage must carry integer prompt_tokens and completion_tokens");

  ChatResult out;
  out.content = choice["message"]["content"].get<std::string>();
  std::string reason = choice["finish_reason"].get<std::string>();
  out.finish_reason = (reason == "stop") ? FinishReason::stop : FinishReason::length;
  out.prompt_tokens = usage["prompt_tokens"].get<long long>();
  out.completion_tokens = usage["completion_tokens"].get<long long>();
  if (usage.contains("x_simulated_seconds") && usage["x_simulated_seconds"].is_number())
    out.latency_s = usage["x_simulated_seconds"].get<double>();
  return out;
}

double simulate_generation_time(long long n_tokens, const HardwareProfile& profile) {
  if (!(profile.tokens_per_second > 0.0))
    throw Error(ErrorCode::domain_error, "tokens_per_second must be > 0");
  if (n_tokens < 0) throw Error(ErrorCode::domain_error, "token count must be >= 0");
  if (profile.time_to_first_token_s < 0.0)
    throw Error(ErrorCode::domain_error, "time_to_first_token must be >= 0");
  return profile.time_to_first_token_s +
         static_cast<double>(n_tokens) / profile.tokens_per_second;
}

double BackoffPolicy::delay_for_attempt(int attempt) const {
  double delay = initial_delay_s * std::pow(multiplier, attempt);
  return std::min(delay, max_delay_s);
}

namespace {

struct SplitUrl {
  std::string origin;       // scheme://authority
  std::string path_prefix;  // "" or "/something"
};

SplitUrl split_base_url(const std::string& base_url) {
  static const std::regex pattern(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(base_url, m, pattern))
    throw Error(ErrorCode::invalid_config, "base_url: not a valid absolute URL: '" + base_url + "'");
  SplitUrl out;
  out.origin = m[1].str();
  out.path_prefix = m[2].matched ? m[2].str() : "";
  while (!out.path_prefix.empty() && out.path_prefix.back() == '/') out.path_prefix.pop_back();
  return out;
}

bool retryable_status(int status) { return status >= 500 && status < 600; }

}  // namespace

ChatResult HttpChatClient::complete(const EndpointDescriptor& endpoint, const ChatRequest& request,
                                    double timeout_s, int max_retries) {
  const SplitUrl url = split_base_url(endpoint.base_url);
  const std::string body = chat_request_to_json(request).dump();
  const std::string path = url.path_prefix + "/v1/chat/completions";

  httplib::Headers headers;
  if (endpoint.auth_token) headers.emplace("Authorization", "Bearer " + *endpoint.auth_token);

  const auto started = std::chrono::steady_clock::now();
  std::string last_failure;
  bool last_was_timeout = false;
  int last_status = 0;

  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::duration<double>(backoff_.delay_for_attempt(attempt - 1)));
    }

    httplib::Client client(url.origin);
    auto timeout = std::chrono::duration<double>(timeout_s);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      last_failure = httplib::to_string(res.error());
      last_was_timeout = true;
      continue;
    }
    if (res->status >= 200 && res->status < 300) {
      json doc;
      try {
        doc = json::parse(res->body);
      } catch (const json::exception& e) {
        protocol_error(std::string("response is not valid JSON: ") + e.what());
      }
      ChatResult out = chat_result_from_wire(doc);
      if (out.latency_s == 0.0) {
        out.latency_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      }
      return out;
    }
    if (!retryable_status(res->status)) {
      throw Error(ErrorCode::upstream_status,
                  "upstream returned status " + std::to_string(res->status));
    }
    last_status = res->status;
    last_was_timeout = false;
    last_failure = "status " + std::to_string(res->status);
  }

  if (last_was_timeout)
    throw Error(ErrorCode::upstream_timeout,
                "transport failed after " + std::to_string(max_retries + 1) +
                    " attempt(s): " + last_failure);
  throw Error(ErrorCode::upstream_status,
              "upstream returned status " + std::to_string(last_status) + " after " +
                  std::to_string(max_retries + 1) + " attempt(s)");
}

}  // namespace rgate

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rgate/config.hpp"
#include "rgate/errors.hpp"

namespace rgate {

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

using MessageList = std::vector<ChatMessage>;

// Request body for POST {base_url}/v1/chat/completions. Field names on the
// wire are exactly: model, messages[].role, messages[].content, temperature,
// top_p, max_tokens, stop, seed.
struct ChatRequest {
  std::string model;
  MessageList messages;
  double temperature = 1.0;
  double top_p = 0.95;
  int max_tokens = 64000;
  std::vector<std::string> stop;
  std::optional<long long> seed;
};

ChatRequest make_chat_request(const std::string& model, MessageList messages,
                              const GenerationConfig& gen);

enum class FinishReason { stop, length };

struct ChatResult {
  std::string content;
  FinishReason finish_reason = FinishReason::stop;
  long long prompt_tokens = 0;
  long long completion_tokens = 0;
  // Wall time of the call as observed by the client, or the simulated time
  // reported by the mock backend (usage.x_simulated_seconds).
  double latency_s = 0.0;
};

nlohmann::json chat_request_to_json(const ChatRequest& req);

// Parses a request body on the serving side (mock server). Throws
// Error(upstream_protocol) on missing or ill-typed required fields.
ChatRequest chat_request_from_json(const nlohmann::json& doc);

// Parses choices[0].message.content, choices[0].finish_reason and
// usage.{prompt_tokens,completion_tokens} from a 2xx response body. All are
// required; violations throw Error(upstream_protocol).
ChatResult chat_result_from_wire(const nlohmann::json& doc);

// A serving substrate reduced to decode throughput and time to first token.
struct HardwareProfile {
  double tokens_per_second = 2000.0;
  double time_to_first_token_s = 0.0;
};

// time_to_first_token + n_tokens / tokens_per_second, in seconds.
double simulate_generation_time(long long n_tokens, const HardwareProfile& profile);

// Abstract completion transport so the orchestrator and evaluation harness
// run identically against live HTTP endpoints and the in-process mock.
class ChatClient {
 public:
  virtual ~ChatClient() = default;

  // Returns a parsed result or throws Error(upstream_timeout /
  // upstream_status / upstream_protocol). Transport failures and 5xx are
  // retried with exponential backoff up to max_retries additional attempts;
  // 4xx and malformed bodies are not retried.
  virtual ChatResult complete(const EndpointDescriptor& endpoint, const ChatRequest& request,
                              double timeout_s, int max_retries) = 0;
};

struct BackoffPolicy {
  double initial_delay_s = 0.25;
  double multiplier = 2.0;
  double max_delay_s = 4.0;

  double delay_for_attempt(int attempt) const;
};

class HttpChatClient final : public ChatClient {
 public:
  HttpChatClient() = default;
  explicit HttpChatClient(BackoffPolicy backoff) : backoff_(backoff) {}

  ChatResult complete(const EndpointDescriptor& endpoint, const ChatRequest& request,
                      double timeout_s, int max_retries) override;

 private:
  BackoffPolicy backoff_;
};

}  // namespace rgate

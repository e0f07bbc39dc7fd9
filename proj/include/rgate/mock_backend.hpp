#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "rgate/upstream.hpp"

namespace rgate {

// One scripted behavior. All present matchers must hold; the first rule in
// script order that matches (and still has uses left) is consumed.
struct MockRule {
  std::optional<std::string> model;     // exact model name
  std::optional<std::string> contains;  // substring of "role: content" lines
  std::optional<long long> seed;        // exact request seed
  std::optional<long long> position;    // 0-based global call index
  int times = 0;                        // max uses; 0 = unlimited

  int status = 200;
  std::string content;
  std::optional<long long> completion_tokens;  // default: estimated from content
  std::optional<long long> prompt_tokens;      // default: estimated from request
  double delay_s = 0.0;                        // extra simulated latency
};

struct LedgerEntry {
  long long position = 0;
  std::string model;
  std::optional<long long> seed;
  MessageList messages;
  int status = 0;  // 0 when no rule matched
  std::string content;
  long long prompt_tokens = 0;
  long long completion_tokens = 0;
  double simulated_s = 0.0;
};

// Deterministic scripted backend: the same script state and request always
// produce the same response, and every call lands in the ledger.
class MockScript {
 public:
  MockScript() = default;

  // Script document: {"hardware": {"tokens_per_second", "time_to_first_token"},
  //                   "real_sleep": bool, "rules": [{"match": {...},
  //                   "response": {...}, "times": n}, ...]}
  static std::shared_ptr<MockScript> from_json(const nlohmann::json& doc);
  static std::shared_ptr<MockScript> load_file(const std::string& path);

  void add_rule(MockRule rule);
  void set_hardware(HardwareProfile profile) { hardware_ = profile; }

  struct Outcome {
    int status = 200;
    ChatResult result;       // meaningful only for 2xx
    std::string error_body;  // meaningful only for non-2xx
  };

  // Thread-safe. Throws Error(mock_unmatched) when no rule matches; the call
  // is still appended to the ledger first.
  Outcome respond(const ChatRequest& request);

  std::vector<LedgerEntry> ledger() const;
  size_t ledger_size() const;
  // Clears the ledger and rule-use counters.
  void reset();

  HardwareProfile hardware() const { return hardware_; }
  bool real_sleep() const { return real_sleep_; }

 private:
  mutable std::mutex mutex_;
  std::vector<MockRule> rules_;
  std::vector<LedgerEntry> entries_;
  std::vector<int> uses_;
  HardwareProfile hardware_;
  bool real_sleep_ = false;
  long long calls_ = 0;
};

nlohmann::json ledger_to_json(const std::vector<LedgerEntry>& entries);

// In-process transport over a script. Mirrors the HTTP client's retry
// contract (5xx retried, 4xx not) without sleeping, and treats a simulated
// latency above the call timeout as a timeout.
class MockChatClient final : public ChatClient {
 public:
  explicit MockChatClient(std::shared_ptr<MockScript> script) : script_(std::move(script)) {}

  ChatResult complete(const EndpointDescriptor& endpoint, const ChatRequest& request,
                      double timeout_s, int max_retries) override;

  MockScript& script() { return *script_; }

 private:
  std::shared_ptr<MockScript> script_;
};

// The same script exposed as a standalone chat-completions server, plus
// GET /mock/ledger and POST /mock/reset for test assertions.
class MockServer {
 public:
  explicit MockServer(std::shared_ptr<MockScript> script);
  ~MockServer();

  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  // Binds and starts serving on a background thread. port 0 picks a free
  // port; returns the bound port.
  int start(const std::string& host, int port);
  void stop();

  MockScript& script() { return *script_; }

 private:
  std::shared_ptr<MockScript> script_;
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace rgate

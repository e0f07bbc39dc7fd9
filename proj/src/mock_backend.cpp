#include "rgate/mock_backend.hpp"

#include <fstream>

#include <httplib.h>

namespace rgate {

using nlohmann::json;

namespace {

// Cheap deterministic token estimate for scripts that omit explicit counts.
long long estimate_tokens(const std::string& text) {
  return static_cast<long long>((text.size() + 3) / 4);
}

std::string concat_messages(const MessageList& messages) {
  std::string out;
  for (const auto& m : messages) {
    out += m.role;
    out += ": ";
    out += m.content;
    out += "\n";
  }
  return out;
}

}  // namespace

std::shared_ptr<MockScript> MockScript::from_json(const json& doc) {
  if (!doc.is_object())
    throw Error(ErrorCode::parse_error, "mock script root must be a JSON object");
  auto script_ptr = std::make_shared<MockScript>();
  MockScript& script = *script_ptr;
  if (doc.contains("hardware")) {
    const json& hw = doc["hardware"];
    HardwareProfile profile;
    if (hw.contains("tokens_per_second")) profile.tokens_per_second = hw["tokens_per_second"];
    if (hw.contains("time_to_first_token"))
      profile.time_to_first_token_s = hw["time_to_first_token"];
    if (!(profile.tokens_per_second > 0.0))
      throw Error(ErrorCode::invalid_config, "hardware.tokens_per_second: must be > 0");
    if (profile.time_to_first_token_s < 0.0)
      throw Error(ErrorCode::invalid_config, "hardware.time_to_first_token: must be >= 0");
    script.hardware_ = profile;
  }
  if (doc.contains("real_sleep")) script.real_sleep_ = doc["real_sleep"].get<bool>();
  if (!doc.contains("rules") || !doc["rules"].is_array())
    throw Error(ErrorCode::parse_error, "mock script needs a 'rules' array");
  for (const json& r : doc["rules"]) {
    MockRule rule;
    if (r.contains("match")) {
      const json& m = r["match"];
      if (m.contains("model")) rule.model = m["model"].get<std::string>();
      if (m.contains("contains")) rule.contains = m["contains"].get<std::string>();
      if (m.contains("seed")) rule.seed = m["seed"].get<long long>();
      if (m.contains("position")) rule.position = m["position"].get<long long>();
    }
    if (r.contains("times")) rule.times = r["times"].get<int>();
    if (r.contains("response")) {
      const json& resp = r["response"];
      if (resp.contains("status")) rule.status = resp["status"].get<int>();
      if (resp.contains("content")) rule.content = resp["content"].get<std::string>();
      if (resp.contains("completion_tokens"))
        rule.completion_tokens = resp["completion_tokens"].get<long long>();
      if (resp.contains("prompt_tokens"))
        rule.prompt_tokens = resp["prompt_tokens"].get<long long>();
      if (resp.contains("delay_seconds")) rule.delay_s = resp["delay_seconds"].get<double>();
    }
    script.rules_.push_back(std::move(rule));
  }
  script.uses_.assign(script.rules_.size(), 0);
  return script_ptr;
}

std::shared_ptr<MockScript> MockScript::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::parse_error, "cannot open mock script '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, "mock script '" + path + "': " + e.what());
  }
  return from_json(doc);
}

void MockScript::add_rule(MockRule rule) {
  std::lock_guard<std::mutex> lock(mutex_);
  rules_.push_back(std::move(rule));
  uses_.push_back(0);
}

MockScript::Outcome MockScript::respond(const ChatRequest& request) {
  std::lock_guard<std::mutex> lock(mutex_);
  const long long position = calls_++;
  const std::string haystack = concat_messages(request.messages);

  LedgerEntry entry;
  entry.position = position;
  entry.model = request.model;
  entry.seed = request.seed;
  entry.messages = request.messages;

  for (size_t i = 0; i < rules_.size(); ++i) {
    const MockRule& rule = rules_[i];
    if (rule.times > 0 && uses_[i] >= rule.times) continue;
    if (rule.model && *rule.model != request.model) continue;
    if (rule.contains && haystack.find(*rule.contains) == std::string::npos) continue;
    if (rule.seed && (!request.seed || *request.seed != *rule.seed)) continue;
    if (rule.position && *rule.position != position) continue;

    uses_[i]++;
    Outcome outcome;
    outcome.status = rule.status;
    if (rule.status >= 200 && rule.status < 300) {
      ChatResult result;
      result.content = rule.content;
      result.completion_tokens =
          rule.completion_tokens ? *rule.completion_tokens : estimate_tokens(rule.content);
      result.prompt_tokens =
          rule.prompt_tokens ? *rule.prompt_tokens : estimate_tokens(haystack);
      result.finish_reason = FinishReason::stop;
      if (result.completion_tokens > request.max_tokens) {
        result.completion_tokens = request.max_tokens;
        result.finish_reason = FinishReason::length;
      }
      result.latency_s =
          simulate_generation_time(result.completion_tokens, hardware_) + rule.delay_s;
      outcome.result = result;

      entry.status = rule.status;
      entry.content = result.content;
      entry.prompt_tokens = result.prompt_tokens;
      entry.completion_tokens = result.completion_tokens;
      entry.simulated_s = result.latency_s;
    } else {
      outcome.error_body = rule.content.empty() ? "scripted failure" : rule.content;
      entry.status = rule.status;
      entry.content = outcome.error_body;
    }
    entries_.push_back(std::move(entry));
    return outcome;
  }

  entries_.push_back(std::move(entry));
  throw Error(ErrorCode::mock_unmatched,
              "no rule matches call #" + std::to_string(position) + " (model '" + request.model +
                  "', seed " + (request.seed ? std::to_string(*request.seed) : "none") + ")");
}

std::vector<LedgerEntry> MockScript::ledger() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return entries_;
}

size_t MockScript::ledger_size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return entries_.size();
}

void MockScript::reset() {
  std::lock_guard<std::mutex> lock(mutex_);
  entries_.clear();
  uses_.assign(rules_.size(), 0);
  calls_ = 0;
}

json ledger_to_json(const std::vector<LedgerEntry>& entries) {
  json out = json::array();
  for (const auto& e : entries) {
    json msgs = json::array();
    for (const auto& m : e.messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
    json item;
    item["position"] = e.position;
    item["model"] = e.model;
    if (e.seed) item["seed"] = *e.seed;
    item["messages"] = std::move(msgs);
    item["status"] = e.status;
    item["content"] = e.content;
    item["prompt_tokens"] = e.prompt_tokens;
    item["completion_tokens"] = e.completion_tokens;
    item["simulated_seconds"] = e.simulated_s;
    out.push_back(std::move(item));
  }
  return out;
}

ChatResult MockChatClient::complete(const EndpointDescriptor&, const ChatRequest& request,
                                    double timeout_s, int max_retries) {
  int last_status = 0;
  bool timed_out = false;
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    MockScript::Outcome outcome = script_->respond(request);
    if (outcome.status >= 200 && outcome.status < 300) {
      // A simulated latency above the budget counts as a timeout, which is
      // retryable, matching the HTTP client's contract.
      if (outcome.result.latency_s > timeout_s) {
        timed_out = true;
        continue;
      }
      return outcome.result;
    }
    if (outcome.status < 500 || outcome.status >= 600)
      throw Error(ErrorCode::upstream_status,
                  "upstream returned status " + std::to_string(outcome.status));
    timed_out = false;
    last_status = outcome.status;
  }
  if (timed_out)
    throw Error(ErrorCode::upstream_timeout,
                "simulated latency exceeds the timeout of " + std::to_string(timeout_s) +
                    "s after " + std::to_string(max_retries + 1) + " attempt(s)");
  throw Error(ErrorCode::upstream_status,
              "upstream returned status " + std::to_string(last_status) + " after " +
                  std::to_string(max_retries + 1) + " attempt(s)");
}

struct MockServer::Impl {
  httplib::Server server;
  std::thread thread;
};

MockServer::MockServer(std::shared_ptr<MockScript> script)
    : script_(std::move(script)), impl_(std::make_unique<Impl>()) {}

MockServer::~MockServer() { stop(); }

int MockServer::start(const std::string& host, int port) {
  auto script = script_;

  impl_->server.Post("/v1/chat/completions", [script](const httplib::Request& req,
                                                      httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception& e) {
      res.status = 400;
      res.set_content(json{{"error", std::string("invalid JSON: ") + e.what()}}.dump(),
                      "application/json");
      return;
    }
    try {
      ChatRequest chat_req = chat_request_from_json(body);
      MockScript::Outcome outcome = script->respond(chat_req);
      if (script->real_sleep() && outcome.status >= 200 && outcome.status < 300) {
        std::this_thread::sleep_for(std::chrono::duration<double>(outcome.result.latency_s));
      }
      if (outcome.status >= 200 && outcome.status < 300) {
        const ChatResult& r = outcome.result;
        json reply = {
            {"choices",
             json::array({{{"message", {{"content", r.content}}},
                           {"finish_reason",
                            r.finish_reason == FinishReason::stop ? "stop" : "length"}}})},
            {"usage",
             {{"prompt_tokens", r.prompt_tokens},
              {"completion_tokens", r.completion_tokens},
              {"x_simulated_seconds", r.latency_s}}}};
        res.status = outcome.status;
        res.set_content(reply.dump(), "application/json");
      } else {
        res.status = outcome.status;
        res.set_content(json{{"error", outcome.error_body}}.dump(), "application/json");
      }
    } catch (const Error& e) {
      res.status = e.code() == ErrorCode::upstream_protocol ? 400 : 422;
      res.set_content(json{{"error", e.what()}}.dump(), "application/json");
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(json{{"error", e.what()}}.dump(), "application/json");
    }
  });

  impl_->server.Get("/mock/ledger", [script](const httplib::Request&, httplib::Response& res) {
    res.set_content(json{{"entries", ledger_to_json(script->ledger())}}.dump(),
                    "application/json");
  });

  impl_->server.Post("/mock/reset", [script](const httplib::Request&, httplib::Response& res) {
    script->reset();
    res.set_content("{}", "application/json");
  });

  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
    if (bound <= 0) throw Error(ErrorCode::invalid_config, "failed to bind mock server");
  } else {
    if (!impl_->server.bind_to_port(host, port))
      throw Error(ErrorCode::invalid_config,
                  "failed to bind mock server to " + host + ":" + std::to_string(port));
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void MockServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
  if (impl_ && impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace rgate

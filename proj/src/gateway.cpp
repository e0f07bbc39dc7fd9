#include "rgate/gateway.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace rgate {

using nlohmann::json;

namespace {

json error_body(const std::string& code, const std::string& message) {
  return json{{"error", {{"code", code}, {"message", message}}}};
}

json plan_to_json(const Plan& plan) {
  return json{{"key_concepts", plan.key_concepts},
              {"steps", plan.steps},
              {"raw_text", plan.raw_text}};
}

json trace_to_json(const FinalResponse& response) {
  json candidates = json::array();
  for (const Candidate& c : response.candidates) {
    json item;
    item["index"] = c.index;
    item["text"] = c.text;
    if (c.extracted_answer) item["extracted_answer"] = *c.extracted_answer;
    item["completion_tokens"] = c.completion_tokens;
    item["latency_ms"] = std::llround(c.latency_s * 1000.0);
    item["finish_reason"] = c.finish_reason == Candidate::Finish::stop     ? "stop"
                            : c.finish_reason == Candidate::Finish::length ? "length"
                                                                           : "error";
    candidates.push_back(std::move(item));
  }
  json verdicts = json::array();
  for (const JudgeVerdict& v : response.verdicts) {
    verdicts.push_back({{"left", v.left_index},
                        {"right", v.right_index},
                        {"winner", v.winner_index},
                        {"raw_text", v.raw_text},
                        {"fallback_used", v.fallback_used}});
  }
  json trace;
  if (response.plan) trace["plan"] = plan_to_json(*response.plan);
  if (response.plan_failure) trace["plan_failure"] = *response.plan_failure;
  trace["candidates"] = std::move(candidates);
  trace["verdicts"] = std::move(verdicts);
  trace["sampling_failures"] = response.sampling_failures;
  return trace;
}

}  // namespace

struct Gateway::Impl {
  httplib::Server server;
  std::thread thread;
};

Gateway::Gateway(GatewayConfig config, std::shared_ptr<ChatClient> client)
    : config_(validate_config(std::move(config))),
      client_(std::move(client)),
      limiter_(config_.max_concurrent_upstream),
      impl_(std::make_unique<Impl>()) {
  if (const char* token = std::getenv("GATEWAY_AUTH_TOKEN"); token && *token)
    auth_token_ = std::string(token);
  if (!config_.request_log_path.empty())
    request_log_.open(config_.request_log_path, std::ios::app);
}

Gateway::~Gateway() { stop(); }

ReasonRequestBody Gateway::parse_reason_body(const std::string& body_json) const {
  json doc;
  try {
    doc = json::parse(body_json);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_config, std::string("body is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::invalid_config, "body must be a JSON object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& key = it.key();
    if (key != "prompt" && key != "plan" && key != "n" && key != "include_trace")
      throw Error(ErrorCode::invalid_config, "unknown field '" + key + "'");
  }

  ReasonRequestBody body;
  if (!doc.contains("prompt") || !doc["prompt"].is_string())
    throw Error(ErrorCode::invalid_config, "prompt: must be a string");
  body.prompt = doc["prompt"].get<std::string>();
  if (body.prompt.empty()) throw Error(ErrorCode::invalid_config, "prompt: must be non-empty");

  if (doc.contains("plan")) {
    if (!doc["plan"].is_boolean()) throw Error(ErrorCode::invalid_config, "plan: must be a boolean");
    body.plan = doc["plan"].get<bool>();
  }
  if (doc.contains("n")) {
    if (!doc["n"].is_number_integer())
      throw Error(ErrorCode::invalid_config, "n: must be an integer");
    const int n = doc["n"].get<int>();
    if (n < 1) throw Error(ErrorCode::invalid_config, "n: must be >= 1");
    if (n > config_.max_n)
      throw Error(ErrorCode::invalid_config,
                  "n: exceeds server max_n (" + std::to_string(config_.max_n) + ")");
    body.n = n;
  }
  if (doc.contains("include_trace")) {
    if (!doc["include_trace"].is_boolean())
      throw Error(ErrorCode::invalid_config, "include_trace: must be a boolean");
    body.include_trace = doc["include_trace"].get<bool>();
  }
  return body;
}

Gateway::HttpReply Gateway::handle_reason(const std::string& body_json) {
  metrics_.requests_total.fetch_add(1, std::memory_order_relaxed);
  const std::string request_id = "req-" + std::to_string(next_request_id_.fetch_add(1));

  ReasonRequestBody body;
  try {
    body = parse_reason_body(body_json);
  } catch (const Error& e) {
    return {400, error_body("invalid_request", e.detail()).dump()};
  }

  PipelineConfig pipeline = config_.pipeline;
  if (body.plan) pipeline.plan_enabled = *body.plan;
  if (body.n) pipeline.bon_n = *body.n;

  OrchestratorHooks hooks;
  hooks.metrics = &metrics_;
  hooks.health = &health_;
  hooks.limiter = &limiter_;
  if (config_.pipeline.total_timeout_s > 0.0) {
    hooks.deadline = std::chrono::steady_clock::now() +
                     std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                         std::chrono::duration<double>(config_.pipeline.total_timeout_s));
  }

  try {
    Orchestrator orchestrator(*client_, pipeline, hooks);
    FinalResponse response =
        orchestrator.execute_pipeline({request_id, body.prompt, AnswerKind::free_form});

    json reply;
    reply["answer"] = response.answer_text;
    reply["full_text"] = response.winning_candidate.text;
    if (response.plan) reply["plan"] = response.plan->raw_text;
    reply["usage"] = {{"completion_tokens_total", response.total_completion_tokens},
                      {"candidates", response.candidates.size()},
                      {"judge_calls", response.judge_calls}};
    reply["wall_time_ms"] = std::llround(response.wall_time_s * 1000.0);
    json trace = trace_to_json(response);
    if (body.include_trace) reply["trace"] = trace;

    json log_line;
    log_line["id"] = request_id;
    log_line["status"] = 200;
    log_line["prompt"] = body.prompt;
    log_line["answer"] = response.answer_text;
    log_line["usage"] = reply["usage"];
    log_line["trace"] = std::move(trace);
    write_request_log(log_line.dump());

    return {200, reply.dump()};
  } catch (const Error& e) {
    json log_line;
    log_line["id"] = request_id;
    log_line["prompt"] = body.prompt;
    log_line["error"] = e.what();

    HttpReply reply;
    switch (e.code()) {
      case ErrorCode::deadline_exceeded:
        reply = {504, error_body("deadline_exceeded", e.detail()).dump()};
        break;
      case ErrorCode::upstream_exhausted:
        reply = {502, error_body("upstream_exhausted", e.detail()).dump()};
        break;
      case ErrorCode::invalid_config:
        reply = {400, error_body("invalid_request", e.detail()).dump()};
        break;
      default:
        reply = {502, error_body(error_code_name(e.code()), e.detail()).dump()};
        break;
    }
    log_line["status"] = reply.status;
    write_request_log(log_line.dump());
    return reply;
  } catch (const std::exception& e) {
    return {500, error_body("internal", e.what()).dump()};
  }
}

Gateway::HttpReply Gateway::handle_health() const {
  const Reachability states[3] = {health_.get(EndpointRole::reasoner),
                                  health_.get(EndpointRole::planner),
                                  health_.get(EndpointRole::judge)};
  bool any_down = false;
  json endpoints;
  for (int i = 0; i < 3; ++i) {
    endpoints[endpoint_role_name(static_cast<EndpointRole>(i))] = reachability_name(states[i]);
    if (states[i] == Reachability::down) any_down = true;
  }
  json doc{{"status", any_down ? "degraded" : "ok"}, {"endpoints", std::move(endpoints)}};
  return {200, doc.dump()};
}

std::string Gateway::handle_metrics() const { return metrics_to_text(metrics_); }

void Gateway::write_request_log(const std::string& line) {
  std::lock_guard<std::mutex> lock(log_mutex_);
  if (request_log_.is_open()) {
    request_log_ << line << '\n';
    request_log_.flush();
  }
}

int Gateway::start(const std::string& host, int port) {
  impl_->server.Post("/v1/reason", [this](const httplib::Request& req, httplib::Response& res) {
    if (auth_token_) {
      const std::string expected = "Bearer " + *auth_token_;
      if (req.get_header_value("Authorization") != expected) {
        res.status = 401;
        res.set_content(error_body("unauthorized", "missing or invalid bearer token").dump(),
                        "application/json");
        return;
      }
    }
    HttpReply reply = handle_reason(req.body);
    res.status = reply.status;
    res.set_content(reply.body, "application/json");
  });

  impl_->server.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
    HttpReply reply = handle_health();
    res.status = reply.status;
    res.set_content(reply.body, "application/json");
  });

  impl_->server.Get("/metrics", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(handle_metrics(), "text/plain");
  });

  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
    if (bound <= 0) throw Error(ErrorCode::invalid_config, "failed to bind gateway");
  } else {
    if (!impl_->server.bind_to_port(host, port))
      throw Error(ErrorCode::invalid_config,
                  "failed to bind gateway to " + host + ":" + std::to_string(port));
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void Gateway::wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

void Gateway::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
  if (impl_ && impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace rgate

#pragma once

#include <atomic>
#include <fstream>
#include <memory>
#include <mutex>
#include <string>

#include "rgate/config.hpp"
#include "rgate/metrics.hpp"
#include "rgate/orchestrator.hpp"
#include "rgate/upstream.hpp"

namespace rgate {

struct ReasonRequestBody {
  std::string prompt;
  std::optional<bool> plan;  // override plan_enabled
  std::optional<int> n;      // override bon_n, capped by server max_n
  bool include_trace = false;
};

// The network-facing service. handle_* methods carry the whole request
// semantics and are directly testable; start() wires them to HTTP routes
// (POST /v1/reason, GET /healthz, GET /metrics) on a background thread.
class Gateway {
 public:
  Gateway(GatewayConfig config, std::shared_ptr<ChatClient> client);
  ~Gateway();

  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  struct HttpReply {
    int status = 200;
    std::string body;  // application/json except for /metrics
  };

  HttpReply handle_reason(const std::string& body_json);
  HttpReply handle_health() const;
  std::string handle_metrics() const;

  // port 0 picks a free port; returns the bound port.
  int start(const std::string& host, int port);
  // Blocks until stop() is called from another thread or a signal handler.
  void wait();
  void stop();

  Metrics& metrics() { return metrics_; }
  EndpointHealth& endpoint_health() { return health_; }
  const GatewayConfig& config() const { return config_; }

 private:
  ReasonRequestBody parse_reason_body(const std::string& body_json) const;
  void write_request_log(const std::string& line);

  GatewayConfig config_;
  std::shared_ptr<ChatClient> client_;
  Metrics metrics_;
  EndpointHealth health_;
  CallLimiter limiter_;
  std::optional<std::string> auth_token_;  // from GATEWAY_AUTH_TOKEN
  std::atomic<std::uint64_t> next_request_id_{1};

  std::mutex log_mutex_;
  std::ofstream request_log_;

  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace rgate

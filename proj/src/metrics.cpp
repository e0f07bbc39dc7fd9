#include "rgate/metrics.hpp"

namespace rgate {

std::string metrics_to_text(const Metrics& metrics) {
  std::string out;
  auto line = [&out](const char* name, const std::atomic<std::uint64_t>& value) {
    out += name;
    out += ' ';
    out += std::to_string(value.load(std::memory_order_relaxed));
    out += '\n';
  };
  line("requests_total", metrics.requests_total);
  line("candidates_total", metrics.candidates_total);
  line("judge_calls_total", metrics.judge_calls_total);
  line("upstream_errors_total", metrics.upstream_errors_total);
  line("tokens_completion_total", metrics.tokens_completion_total);
  return out;
}

const char* endpoint_role_name(EndpointRole role) {
  switch (role) {
    case EndpointRole::reasoner:
      return "reasoner";
    case EndpointRole::planner:
      return "planner";
    case EndpointRole::judge:
      return "judge";
  }
  return "unknown";
}

const char* reachability_name(Reachability state) {
  switch (state) {
    case Reachability::unknown:
      return "unknown";
    case Reachability::ok:
      return "ok";
    case Reachability::down:
      return "down";
  }
  return "unknown";
}

}  // namespace rgate

#pragma once

#include <stdexcept>
#include <string>

namespace rgate {

// Machine-readable failure categories. The HTTP layer maps these onto status
// codes and error bodies; the CLI maps them onto exit messages.
enum class ErrorCode {
  invalid_config,
  plan_leakage,
  plan_empty,
  upstream_timeout,
  upstream_protocol,
  upstream_status,
  upstream_exhausted,
  mock_unmatched,
  parse_error,
  duplicate_id,
  domain_error,
  empty_matrix,
  deadline_exceeded,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

  // Message without the "<code>: " prefix that what() carries.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace rgate

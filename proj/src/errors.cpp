#include "rgate/errors.hpp"

namespace rgate {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_config:
      return "invalid_config";
    case ErrorCode::plan_leakage:
      return "plan_leakage";
    case ErrorCode::plan_empty:
      return "plan_empty";
    case ErrorCode::upstream_timeout:
      return "upstream_timeout";
    case ErrorCode::upstream_protocol:
      return "upstream_protocol";
    case ErrorCode::upstream_status:
      return "upstream_status";
    case ErrorCode::upstream_exhausted:
      return "upstream_exhausted";
    case ErrorCode::mock_unmatched:
      return "mock_unmatched";
    case ErrorCode::parse_error:
      return "parse_error";
    case ErrorCode::duplicate_id:
      return "duplicate_id";
    case ErrorCode::domain_error:
      return "domain_error";
    case ErrorCode::empty_matrix:
      return "empty_matrix";
    case ErrorCode::deadline_exceeded:
      return "deadline_exceeded";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
      code_(code),
      detail_(message) {}

}  // namespace rgate

#include "heatlab/error.hpp"

namespace heatlab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::point_outside_domain: return "point-outside-domain";
    case ErrorCode::problem_too_large: return "problem-too-large";
    case ErrorCode::invalid_input: return "invalid-input";
    case ErrorCode::decomposition_unavailable: return "decomposition-unavailable";
    case ErrorCode::incomplete_report: return "incomplete-report";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::validation_error: return "validation-error";
    case ErrorCode::internal_error: return "internal-error";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void raise(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace heatlab

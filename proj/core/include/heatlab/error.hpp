#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace heatlab {

enum class ErrorCode {
  invalid_argument,
  point_outside_domain,
  problem_too_large,
  invalid_input,
  decomposition_unavailable,
  incomplete_report,
  parse_error,
  validation_error,
  internal_error,
};

std::string_view to_string(ErrorCode code);

/// Exception type for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& what);

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) raise(code, what);
}

}  // namespace heatlab

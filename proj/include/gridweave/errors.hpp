#pragma once

#include <stdexcept>
#include <string>

namespace gridweave {

/// Coarse failure categories; the CLI maps them onto stable exit codes
/// (config=1, workload=2, runtime=3, io=4).
enum class ErrorCategory { Config, Workload, Runtime, Io };

class Error : public std::runtime_error {
public:
  Error(ErrorCategory category, std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message),
        category_(category),
        code_(std::move(code)) {}

  ErrorCategory category() const { return category_; }
  /// Stable machine-readable code, e.g. "SchemaViolation" or "MalformedRow".
  const std::string& code() const { return code_; }

private:
  ErrorCategory category_;
  std::string code_;
};

inline Error config_error(const std::string& code, const std::string& message) {
  return Error(ErrorCategory::Config, code, message);
}
inline Error workload_error(const std::string& code, const std::string& message) {
  return Error(ErrorCategory::Workload, code, message);
}
inline Error runtime_error_of(const std::string& code, const std::string& message) {
  return Error(ErrorCategory::Runtime, code, message);
}
inline Error io_error(const std::string& code, const std::string& message) {
  return Error(ErrorCategory::Io, code, message);
}

}  // namespace gridweave

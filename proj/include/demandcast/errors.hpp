#pragma once

#include <stdexcept>
#include <string>

namespace demandcast {

/// Error categories map onto CLI exit codes: config -> 1, data -> 2,
/// numeric -> 3.
enum class ErrorCategory { config, data, numeric };

/// Single exception type carrying a stable machine-readable code
/// (e.g. "NonHourlySpacing") next to the human-readable message.
class Error : public std::runtime_error {
public:
  Error(ErrorCategory category, std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message),
        category_(category),
        code_(std::move(code)) {}

  ErrorCategory category() const noexcept { return category_; }
  const std::string& code() const noexcept { return code_; }
  int exit_code() const noexcept {
    switch (category_) {
      case ErrorCategory::config: return 1;
      case ErrorCategory::data: return 2;
      case ErrorCategory::numeric: return 3;
    }
    return 3;
  }

private:
  ErrorCategory category_;
  std::string code_;
};

inline Error config_error(std::string code, const std::string& msg) {
  return Error(ErrorCategory::config, std::move(code), msg);
}
inline Error data_error(std::string code, const std::string& msg) {
  return Error(ErrorCategory::data, std::move(code), msg);
}
inline Error numeric_error(std::string code, const std::string& msg) {
  return Error(ErrorCategory::numeric, std::move(code), msg);
}

}  // namespace demandcast

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace scopemetrics {

// All failures surface as Error. `kind` selects the process exit class
// ("validation" -> 1, "io" -> 2); `code` names the specific condition so
// callers and tests can match on it without parsing prose.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, std::string code, std::string message)
      : std::runtime_error(code + ": " + message),
        kind_(std::move(kind)),
        code_(std::move(code)),
        message_(std::move(message)) {}

  const std::string& kind() const noexcept { return kind_; }
  const std::string& code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::string kind_;
  std::string code_;
  std::string message_;
};

class ValidationError : public Error {
 public:
  ValidationError(std::string code, std::string message)
      : Error("validation", std::move(code), std::move(message)) {}
};

class IoError : public Error {
 public:
  IoError(std::string code, std::string message)
      : Error("io", std::move(code), std::move(message)) {}
};

}  // namespace scopemetrics

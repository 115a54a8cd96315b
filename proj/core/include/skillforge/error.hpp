#pragma once

#include <stdexcept>
#include <string>

namespace skillforge {

/// Raised when a caller breaks an operation's precondition (bad dimensions,
/// out-of-range indices, invalid temperatures, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Raised when a loss or gradient becomes non-finite during optimization.
class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration parse/validation failure. `line()` is 0 when the problem is
/// not tied to a specific line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

namespace detail {
inline void require(bool condition, const char* message) {
  if (!condition) throw ContractViolation(message);
}
inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}
}  // namespace detail

}  // namespace skillforge

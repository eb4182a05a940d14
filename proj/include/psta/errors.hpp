#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace psta {

/// A kernel received a NaN/Inf input or produced a non-finite state. The
/// owning controller is poisoned until reset().
class NonFiniteError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ControllerPoisoned : public std::logic_error {
 public:
  ControllerPoisoned() : std::logic_error("controller state is poisoned; call reset() before stepping again") {}
};

/// Plant integration produced a non-finite state.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, std::size_t step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Malformed scenario configuration. Carries the offending key and the
/// 1-based source line when known (0 otherwise).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, int line, const std::string& msg)
      : std::runtime_error(format(key, line, msg)), key_(key), line_(line), message_(msg) {}
  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }
  const std::string& message() const noexcept { return message_; }

 private:
  static std::string format(const std::string& key, int line, const std::string& msg) {
    std::string out = "config error";
    if (!key.empty()) out += " at key '" + key + "'";
    if (line > 0) out += " (line " + std::to_string(line) + ")";
    return out + ": " + msg;
  }
  std::string key_;
  int line_;
  std::string message_;
};

}  // namespace psta

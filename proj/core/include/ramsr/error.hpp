#pragma once

#include <stdexcept>
#include <string>

namespace ramsr {

/// Invalid configuration input. line == 0 when no source line applies.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Integration breakdown (step underflow, NaN) or a violated numerical invariant.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ramsr

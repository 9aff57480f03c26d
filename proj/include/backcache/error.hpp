#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace backcache {

/// Base class for every fault raised by the simulator and its tools.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid geometry, register bounds, or configuration document.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Out-of-domain argument to an analytic or harness routine.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data. Carries the 1-based line number when known (0 otherwise).
class InputError : public Error {
 public:
  InputError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_ = 0;
};

/// A model invariant or operation precondition was broken.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace backcache

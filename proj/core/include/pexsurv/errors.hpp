#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pexsurv {

// Argument outside the mathematical domain of an operation (e.g. t <= 0).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Requested probability mass does not exist (zero-rate tail, empty bounds).
class UnreachableMassError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParamsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A sampler found its own state corrupted (non-finite target at the current point).
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class InsufficientDataError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// An update failed mid-chain; carries the 0-based iteration index.
class ChainError : public std::runtime_error {
 public:
  ChainError(std::size_t iteration, const std::string& what)
      : std::runtime_error("iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

}  // namespace pexsurv

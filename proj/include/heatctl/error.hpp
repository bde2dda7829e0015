#pragma once

#include <stdexcept>
#include <string>

namespace heatctl {

// Bad input. The field name travels with the message so the CLI can report it.
class ValidationError : public std::invalid_argument {
public:
  ValidationError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

// A guarantee of the formulas failed to hold, e.g. K2 <= 0.
class InternalError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

// The working precision could not resolve a nearly singular matrix.
class IllConditionedError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class NonObservableError : public IllConditionedError {
public:
  using IllConditionedError::IllConditionedError;
};

} // namespace heatctl

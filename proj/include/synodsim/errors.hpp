#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace synodsim {

/// A transition step was applied to a configuration in which it is not enabled.
class NotEnabled : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// propose() was called with a ballot not above the proposer's current one.
class StaleBallot : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A scenario violates one of its invariants. `what()` names the invariant.
class IllFormedScenario : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The adversarial duel needs exactly two proposers.
class DuelImpossible : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed scenario, trace or manifest text.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::string field, const std::string& detail)
      : std::runtime_error("line " + std::to_string(line) + ", " + field + ": " + detail),
        line_(line),
        field_(std::move(field)) {}

  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

}  // namespace synodsim

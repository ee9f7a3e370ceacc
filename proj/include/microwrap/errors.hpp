#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace microwrap {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A wrapper was applied to an environment whose spaces it cannot handle.
///
/// When raised while lifting over a multi-agent env the offending agent id is
/// attached; when raised while building a chain the wrapper index is attached.
class PreconditionFailed : public Error {
 public:
  explicit PreconditionFailed(const std::string& what) : Error(what) {}

  PreconditionFailed(const std::string& what, std::optional<std::string> agent,
                     std::optional<std::size_t> wrapper_index)
      : Error(what), agent_(std::move(agent)), wrapper_index_(wrapper_index) {}

  const std::optional<std::string>& agent() const noexcept { return agent_; }
  std::optional<std::size_t> wrapper_index() const noexcept { return wrapper_index_; }

 private:
  std::optional<std::string> agent_;
  std::optional<std::size_t> wrapper_index_;
};

class InvalidParam : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class SpaceInferenceFailed : public Error {
 public:
  using Error::Error;
};

/// A value was found outside the space it was declared to belong to.
class ContainmentViolation : public Error {
 public:
  using Error::Error;
};

class NonFiniteReward : public Error {
 public:
  using Error::Error;
};

class MalformedAgentId : public Error {
 public:
  using Error::Error;
};

class UnknownEnv : public Error {
 public:
  using Error::Error;
};

/// Misuse of the reset/step protocol: stepping a finished episode, stepping
/// before reset, or submitting actions for the wrong set of agents.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace microwrap

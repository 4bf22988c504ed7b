#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ranklab {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Argument outside the documented domain of an operation.
class DomainError : public Error {
public:
  using Error::Error;
};

// Two grid-based objects that must share a grid do not.
class GridMismatchError : public Error {
public:
  using Error::Error;
};

// A shift would push more than the tolerated mass past a grid boundary.
class TruncationOverflowError : public Error {
public:
  using Error::Error;
};

// A state became non-finite; carries the time step where it happened.
class BlowupError : public Error {
public:
  BlowupError(const std::string& what, long step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  long step() const { return step_; }

private:
  long step_;
};

// Fixed-point iteration exhausted max_iter; carries the decay log.
class NonConvergenceError : public Error {
public:
  NonConvergenceError(const std::string& what, std::vector<double> distances)
      : Error(what), distances_(std::move(distances)) {}
  const std::vector<double>& distances() const { return distances_; }

private:
  std::vector<double> distances_;
};

// A coefficient or measure spec violates its declared contract.
class SpecViolationError : public Error {
public:
  using Error::Error;
};

// Config file failed validation; carries every issue found, not just the first.
class ConfigError : public Error {
public:
  ConfigError(const std::string& what, std::vector<std::string> issues)
      : Error(what), issues_(std::move(issues)) {}
  const std::vector<std::string>& issues() const { return issues_; }

private:
  std::vector<std::string> issues_;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace ranklab

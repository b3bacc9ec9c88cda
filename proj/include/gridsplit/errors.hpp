#pragma once

#include <stdexcept>
#include <string>

namespace gridsplit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Structural problem with the network or the formation inputs.
class ModelError : public Error {
 public:
  using Error::Error;
};

// A lateral policy cannot be met by the graph, detected before any solve.
class InfeasibleTopology : public Error {
 public:
  using Error::Error;
};

// The default (normally-closed) topology is not a radial forest.
class TopologyError : public Error {
 public:
  using Error::Error;
};

class DecodeError : public Error {
 public:
  using Error::Error;
};

class TopologyMismatch : public Error {
 public:
  using Error::Error;
};

class GuardExceeded : public Error {
 public:
  using Error::Error;
};

// Node budget or pivot budget exhausted.
class SolverLimit : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  ValidationError(std::string path, const std::string& message)
      : Error(path + ": " + message), path_(std::move(path)) {}

  // JSON-pointer style location of the offending field.
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class ScenarioMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace gridsplit

#pragma once

#include <stdexcept>
#include <string>

namespace wienerlab {

// Base of every library failure. `module()` names the subsystem that raised
// it so the command-line front end can report where a computation broke.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what)
      : std::runtime_error(what), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Sensor is not strictly monotone on the requested interval.
class NonInvertible : public Error {
 public:
  using Error::Error;
};

// Target value lies outside the image of the interval.
class OutOfRange : public Error {
 public:
  using Error::Error;
};

class DegenerateDistribution : public Error {
 public:
  using Error::Error;
};

// Exact likelihood with zero measurement noise has no density.
class SingularLikelihood : public Error {
 public:
  using Error::Error;
};

class SingularInformation : public Error {
 public:
  using Error::Error;
};

// Non-finite value met while evaluating a cost or integrand.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

class HarnessError : public Error {
 public:
  using Error::Error;
};

// Malformed input file (CSV/JSON). Treated as a usage error by the CLI.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace wienerlab

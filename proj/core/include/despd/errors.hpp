#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace despd {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Input violates a documented precondition.
class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what) : Error(what) {}
};

/// Non-finite values or a numerical routine that could not produce a result.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(what) {}
};

/// Normal equations (or the bordered system) could not be factorized even
/// after a ridge bump.
class SingularSystem : public NumericalError {
 public:
  explicit SingularSystem(const std::string& what) : NumericalError(what) {}
};

/// The mixed-model variance update hit ED - d <= 0.
class DegenerateVariance : public Error {
 public:
  DegenerateVariance(const std::string& what, std::vector<double> lambda_trace)
      : Error(what), lambda_trace_(std::move(lambda_trace)) {}

  const std::vector<double>& lambda_trace() const { return lambda_trace_; }

 private:
  std::vector<double> lambda_trace_;
};

/// Every candidate of a lambda grid failed to fit.
class AggregateFitError : public Error {
 public:
  AggregateFitError(const std::string& what, std::vector<std::string> failures)
      : Error(what), failures_(std::move(failures)) {}

  const std::vector<std::string>& failures() const { return failures_; }

 private:
  std::vector<std::string> failures_;
};

}  // namespace despd

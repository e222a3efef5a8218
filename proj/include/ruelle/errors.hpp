#pragma once

#include <stdexcept>
#include <string>

namespace ruelle {

/// Base class of every error raised by the library. `kind()` is a stable
/// machine-readable tag used in CLI error records.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error("invalid-argument", what) {}
};

class ResourceLimit : public Error {
 public:
  ResourceLimit(const std::string& what, double requested, double budget)
      : Error("resource-limit", what), requested_(requested), budget_(budget) {}
  double requested() const noexcept { return requested_; }
  double budget() const noexcept { return budget_; }

 private:
  double requested_;
  double budget_;
};

class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, double last_residual, long iterations)
      : Error("non-convergence", what), last_residual_(last_residual), iterations_(iterations) {}
  double last_residual() const noexcept { return last_residual_; }
  long iterations() const noexcept { return iterations_; }

 private:
  double last_residual_;
  long iterations_;
};

class NumericalBreakdown : public Error {
 public:
  explicit NumericalBreakdown(const std::string& what) : Error("numerical-breakdown", what) {}
};

class InsufficientData : public Error {
 public:
  explicit InsufficientData(const std::string& what) : Error("insufficient-data", what) {}
};

}  // namespace ruelle

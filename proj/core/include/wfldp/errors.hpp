#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace wfldp {

// Inputs of incompatible sizes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A value violates a domain invariant (negative weight, asymmetric matrix, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite state or otherwise broken arithmetic during a computation.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative method ran out of budget. Carries the best iterate found so
// that callers can still inspect or reuse it.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, std::vector<double> best_iterate,
                   double best_value)
      : NumericalError(what),
        best_iterate_(std::move(best_iterate)),
        best_value_(best_value) {}

  const std::vector<double>& best_iterate() const noexcept { return best_iterate_; }
  double best_value() const noexcept { return best_value_; }

 private:
  std::vector<double> best_iterate_;
  double best_value_;
};

}  // namespace wfldp

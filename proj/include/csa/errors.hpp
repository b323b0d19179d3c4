#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace csa {

// Malformed or inconsistent input data (bad JSON values, unknown buyer ids,
// violated type invariants).
class InvalidInputError : public std::runtime_error {
public:
  explicit InvalidInputError(const std::string& msg) : std::runtime_error(msg) {}
};

// An operation was called outside its contract (e.g. pricing a coalition
// that is not an efficient winner set).
class PreconditionError : public std::runtime_error {
public:
  explicit PreconditionError(const std::string& msg) : std::runtime_error(msg) {}
};

// An enumeration or search exceeded its configured cap.
class ResourceLimitError : public std::runtime_error {
public:
  explicit ResourceLimitError(const std::string& msg) : std::runtime_error(msg) {}
};

// A solver failed to converge; carries the best iterate and its residuals.
class NumericalFailureError : public std::runtime_error {
public:
  NumericalFailureError(const std::string& msg, double primal_residual, double dual_residual,
                        std::vector<double> best_iterate = {})
      : std::runtime_error(msg),
        primal_residual(primal_residual),
        dual_residual(dual_residual),
        best_iterate(std::move(best_iterate)) {}
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  std::vector<double> best_iterate;
};

// Evaluation was requested at (or too close to) a breakpoint of a
// piecewise-linear quantity; the caller must perturb the query point.
class BoundaryPointError : public std::runtime_error {
public:
  explicit BoundaryPointError(const std::string& msg) : std::runtime_error(msg) {}
};

// A bid sweep crossed a bid at which the winner set changes.
class RangeInvalidError : public std::runtime_error {
public:
  RangeInvalidError(const std::string& msg, double crossing_bid)
      : std::runtime_error(msg), crossing_bid(crossing_bid) {}
  double crossing_bid = 0.0;
};

}  // namespace csa

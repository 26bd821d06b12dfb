#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace betarestrict {

// Base of every library error. The CLI maps these to exit code 2; anything
// else escaping is treated as an internal failure.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
  using Error::Error;
};

class ShapeError : public Error {
public:
  using Error::Error;
};

class PreconditionError : public Error {
public:
  using Error::Error;
};

class SingularMatrixError : public Error {
public:
  SingularMatrixError(const std::string& what, std::ptrdiff_t pivot)
      : Error(what + " (failing pivot " + std::to_string(pivot) + ")"), pivot_(pivot) {}
  std::ptrdiff_t pivot() const noexcept { return pivot_; }

private:
  std::ptrdiff_t pivot_;
};

/// Non-finite value produced while evaluating a per-observation quantity.
class EvaluationError : public Error {
public:
  EvaluationError(const std::string& what, std::ptrdiff_t index)
      : Error(what + " (observation " + std::to_string(index) + ")"), index_(index) {}
  std::ptrdiff_t index() const noexcept { return index_; }

private:
  std::ptrdiff_t index_;
};

class EmptyIntervalError : public Error {
public:
  using Error::Error;
};

class InvalidConstraintError : public Error {
public:
  using Error::Error;
};

/// Feasible-point search gave up; the restricted region may be empty.
class EmptyRegionError : public Error {
public:
  using Error::Error;
};

/// A conditional interval came out with lower > upper, which only happens
/// when the conditioning point is infeasible.
class InconsistentStateError : public Error {
public:
  using Error::Error;
};

class NonConvergenceError : public Error {
public:
  NonConvergenceError(const std::string& what, Eigen::VectorXd last)
      : Error(what), last_(std::move(last)) {}
  const Eigen::VectorXd& last_iterate() const noexcept { return last_; }

private:
  Eigen::VectorXd last_;
};

class DegenerateRidgeError : public Error {
public:
  using Error::Error;
};

/// Ratio metric with a zero denominator (RE or TSRE against a perfect benchmark).
class UndefinedRatioError : public Error {
public:
  using Error::Error;
};

/// Too many replications failed for the aggregate to be meaningful.
class ReplicationError : public Error {
public:
  ReplicationError(const std::string& what, int failures, int attempted)
      : Error(what), failures_(failures), attempted_(attempted) {}
  int failures() const noexcept { return failures_; }
  int attempted() const noexcept { return attempted_; }

private:
  int failures_;
  int attempted_;
};

}  // namespace betarestrict

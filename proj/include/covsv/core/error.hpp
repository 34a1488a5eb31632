#pragma once

#include <stdexcept>
#include <string>

namespace covsv {

// Input outside the mathematical domain of an operation (poles, Im z <= 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Iterative solver did not reach its tolerance.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double last_residual)
      : std::runtime_error(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

// Critical-point / edge search failed on a given interval.
class StructureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Linear-algebra failure (eigen/SVD did not converge).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace covsv

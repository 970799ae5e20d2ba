#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace subblock {

/// Bad configuration or invalid arguments (CLI exit code 1).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Unreadable or malformed input data (CLI exit code 2).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Quantity undefined for the given input, e.g. density of a 1-node subset.
class DegenerateInputError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Non-finite values in a numeric computation (CLI exit code 3).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrainingDivergedError : public NumericError {
 public:
  explicit TrainingDivergedError(std::size_t iteration)
      : NumericError("training diverged: non-finite loss at iteration " +
                     std::to_string(iteration)),
        iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

}  // namespace subblock

#pragma once

#include <stdexcept>
#include <string>

namespace fesf {

// Bad argument, shape, or parameter range. Maps to the CLI's validation exit code.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Missing, unreadable, or corrupt file.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite loss or parameter encountered while training.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fesf

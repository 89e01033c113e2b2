#pragma once

#include <stdexcept>

namespace gmoe {

// Invalid configuration or misuse of an interface contract. CLI exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data. CLI exit code 3.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite values or other numeric breakdown. CLI exit code 4.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gmoe

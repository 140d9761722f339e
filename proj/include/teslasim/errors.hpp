#pragma once

#include <stdexcept>

namespace teslasim {

// Invalid configuration, malformed input files, violated preconditions.
// The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite values or a failed numerical evaluation mid-computation.
// The CLI maps this to exit code 3.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace teslasim

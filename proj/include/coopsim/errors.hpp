#pragma once

#include <stdexcept>
#include <string>

namespace coopsim {

// Invalid configuration (bad field values, malformed config files). CLI exit code 4.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid runtime input to a library operation (negative latency sample,
// degenerate box, predictions for an unknown anchor, ...).
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Out-of-order data fed to a component that requires monotonic time.
struct SequenceError : InputError {
  using InputError::InputError;
};

// Filesystem trouble (unwritable output directory, unreadable file). CLI exit code 3.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace coopsim

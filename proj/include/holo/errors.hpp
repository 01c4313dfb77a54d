#pragma once

#include <stdexcept>
#include <string>

namespace holo {

/// Raised when operator or state dimensions are inconsistent, or exceed the
/// configured Hilbert-space cap.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised for physically or geometrically invalid model input.
class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised by the time integrators (step underflow, non-finite state).
class IntegrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by config parsing and validation; the message lists every problem.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace holo

#pragma once

#include <stdexcept>
#include <string>

namespace mgsim {

// Raised when a caller breaks an operation's precondition (dimension
// mismatch, non-finite input, out-of-range parameter).
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Raised while loading or validating configuration, before any simulation runs.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when the plant leaves the representable state space mid-run.
class SimulationFault : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when an artifact cannot be written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mgsim

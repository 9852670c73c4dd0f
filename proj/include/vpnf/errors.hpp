#pragma once

#include <stdexcept>
#include <string>

namespace vpnf {

// Bad shapes, manifests, or infeasible configuration values.
class ConfigurationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A call that is valid C++ but not meaningful for the given object (wrong head, empty batch).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MetricError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when a loss becomes non-finite; `what()` carries the state dump.
class TrainingDiverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace vpnf

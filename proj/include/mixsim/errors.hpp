#pragma once

#include <stdexcept>
#include <string>

namespace mixsim {

// Invalid configuration or malformed input (CLI exit code 2).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Non-finite values or inconsistent dimensions during simulation.
class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A forward recursion left the configured magnitude cap.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Rank-deficient design under strict estimation (CLI exit code 3).
class IdentifiabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Estimator or baseline could not be evaluated on the given data.
class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Files could not be written or read.
class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

}  // namespace detail
}  // namespace mixsim

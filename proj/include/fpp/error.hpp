#pragma once

#include <stdexcept>
#include <string>

namespace fpp {

/// A run configuration or grid violated one of its bounds.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical solver could not complete (singular system, mass drift,
/// boundary leak, ...).
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An emitted field broke a contract (negative density, mass off by more
/// than the producer's tolerance, non-finite values).
class InvariantError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// exp() of a potential or action left the representable range.
class OverflowError : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

}  // namespace fpp

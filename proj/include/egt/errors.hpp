#pragma once

#include <stdexcept>
#include <string>

namespace egt {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numeric argument outside its admissible range (x outside [0,1], g <= 0, ...).
struct DomainError : Error {
    using Error::Error;
};

/// Operation called with a game class it does not apply to.
struct ClassMismatchError : Error {
    using Error::Error;
};

/// Degenerate games (a == c or d == b) are classified but not designed for.
struct UnsupportedClassError : Error {
    using Error::Error;
};

/// A required piece of designer knowledge (attraction radius, payoff bound,
/// side of the mixed equilibrium) is missing.
struct MissingKnowledgeError : Error {
    using Error::Error;
};

/// The requested design is ruled out by one of the impossibility results.
struct ImpossibleDesignError : Error {
    using Error::Error;
};

/// Analytic verification requested outside the supported scenarios.
struct UnsupportedConfigurationError : Error {
    using Error::Error;
};

/// Scenario file could not be parsed; message carries file:line context.
struct ConfigError : Error {
    using Error::Error;
};

} // namespace egt

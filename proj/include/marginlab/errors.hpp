#pragma once

#include <stdexcept>
#include <string>

namespace marginlab {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Leading coefficient vanished where a fixed degree is required.
struct DegenerateLeadingCoefficient : Error {
    using Error::Error;
};

// A Routh entry or Bilharz determinant sits on the stability boundary.
struct DegenerateInput : Error {
    using Error::Error;
};

// Derivative action on a biproper plant would make the loop improper.
struct ImproperLoop : Error {
    using Error::Error;
};

// Frequency handed to a phase evaluation is not a unit-gain crossover.
struct NotACrossover : Error {
    using Error::Error;
};

// The plant admits no stabilizing controller in the requested class.
struct NotStabilizable : Error {
    using Error::Error;
};

// A closed-form root was not found inside its guaranteed interval.
struct RootNotBracketed : Error {
    using Error::Error;
};

// Two independent computations of the same quantity disagree.
struct AgreementFailure : Error {
    using Error::Error;
};

// Bad user-supplied plant or grid parameters.
struct InvalidInput : Error {
    using Error::Error;
};

}  // namespace marginlab

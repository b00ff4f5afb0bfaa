#pragma once

#include <stdexcept>
#include <string>

namespace qthermo {

/// Failure categories surfaced by the library. The CLI maps them onto exit codes.
enum class ErrorKind {
    InvalidArgument,
    DegenerateMatsubara,
    QuadratureNoConvergence,
    HierarchyTooLarge,
    StepInstability,
    NoSteadyState,
    DegenerateSteadyState,
    InvalidDensity,
    InconsistentPureDerivative,
    DegeneratePopulation,
    DivergentExponent,
    NoConvergence,
    GridMismatch,
    Config,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::DegenerateMatsubara: return "DegenerateMatsubara";
        case ErrorKind::QuadratureNoConvergence: return "QuadratureNoConvergence";
        case ErrorKind::HierarchyTooLarge: return "HierarchyTooLarge";
        case ErrorKind::StepInstability: return "StepInstability";
        case ErrorKind::NoSteadyState: return "NoSteadyState";
        case ErrorKind::DegenerateSteadyState: return "DegenerateSteadyState";
        case ErrorKind::InvalidDensity: return "InvalidDensity";
        case ErrorKind::InconsistentPureDerivative: return "InconsistentPureDerivative";
        case ErrorKind::DegeneratePopulation: return "DegeneratePopulation";
        case ErrorKind::DivergentExponent: return "DivergentExponent";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::GridMismatch: return "GridMismatch";
        case ErrorKind::Config: return "Config";
    }
    return "Unknown";
}

}  // namespace qthermo

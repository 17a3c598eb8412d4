#pragma once
#include <stdexcept>
#include <string>

namespace nll {

/// Iteration cap exceeded or a solve failed to reach its tolerance.
struct NonconvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// No subsolution exists for the requested parameters (lambda <= lambda1).
struct NoSubsolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// No supersolution exists (kernel row mass not bounded below, or lambda <= 0).
struct NoSupersolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An experiment precondition on the parameters is violated.
struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

} // namespace nll

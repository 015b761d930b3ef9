// Exception hierarchy shared by all kercat modules.
//
// DomainError covers invalid or out-of-range inputs (exit code 1 in the CLI),
// ConvergenceError covers failed numerical iteration (exit code 2).

#pragma once

#include <stdexcept>
#include <string>

namespace kercat {

struct DomainError : std::invalid_argument {
    explicit DomainError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// State or operator does not fit in the requested truncated basis.
struct TruncationError : DomainError {
    explicit TruncationError(const std::string& msg) : DomainError(msg) {}
};

/// Effective-model evaluation too close to a multiphoton resonance.
struct ResonanceError : DomainError {
    explicit ResonanceError(const std::string& msg) : DomainError(msg) {}
};

struct ConvergenceError : std::runtime_error {
    explicit ConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace kercat

#pragma once
#include <stdexcept>
#include <string>

namespace qtomo {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Matrix-element kernels are bounded only for efficiency above 1/2.
struct EtaOutOfDomain : Error {
    explicit EtaOutOfDomain(const std::string& msg) : Error(msg) {}
};

// Quasi-probability order parameter outside the admissible range for the
// given efficiency (s must stay below 1 - 1/eta).
struct SOutOfDomain : Error {
    explicit SOutOfDomain(const std::string& msg) : Error(msg) {}
};

// A state does not fit in the requested Fock cutoff.
struct CutoffTooSmall : Error {
    explicit CutoffTooSmall(const std::string& msg) : Error(msg) {}
};

// Generic precondition violation on a numeric argument.
struct DomainError : Error {
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

// Noise deconvolution would produce an unbounded estimator.
struct Divergent : Error {
    explicit Divergent(const std::string& msg) : Error(msg) {}
};

struct EmptyData : Error {
    explicit EmptyData(const std::string& msg) : Error(msg) {}
};

// Overlap of a zero-purity operator is undefined.
struct ZeroState : Error {
    explicit ZeroState(const std::string& msg) : Error(msg) {}
};

// Conditional-state fidelity estimator is unbounded below the efficiency bound.
struct EtaBoundViolation : Error {
    explicit EtaBoundViolation(const std::string& msg) : Error(msg) {}
};

// CLI: malformed or incomplete configuration.
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// CLI: file system failure.
struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(msg) {}
};

} // namespace qtomo

#pragma once

#include <stdexcept>
#include <string>

namespace kacsim {

/// Invalid kernel/distribution parameters or malformed configuration.
/// Raised at construction time, never during sampling.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A q(gamma) evaluation method was requested that the kernel does not offer.
struct UnsupportedMethodError : std::runtime_error {
    explicit UnsupportedMethodError(const std::string& msg) : std::runtime_error(msg) {}
};

/// E[A1+A2] = 1 makes the forced mean undefined; caller must pin the mean.
struct UndefinedMeanError : std::runtime_error {
    explicit UndefinedMeanError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A stated hypothesis of the contraction/uniqueness theory fails for the
/// given inputs (q(gamma) >= 1, wrong mean, gamma out of range, ...).
struct HypothesisError : std::runtime_error {
    explicit HypothesisError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Request exceeds a hard resource cap (full-tree depth, time horizon).
struct ResourceCapError : std::runtime_error {
    explicit ResourceCapError(const std::string& msg) : std::runtime_error(msg) {}
};

/// The second moment of the steady state is infinite (q(2) >= 1).
struct InfiniteMomentError : std::runtime_error {
    explicit InfiniteMomentError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace kacsim

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nafem {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user input: bad arguments, malformed config, out-of-range parameters.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Syntax error in a coefficient expression. `position` is a 0-based offset.
class ParseError : public ConfigError {
public:
    ParseError(std::size_t position, const std::string& what)
        : ConfigError("syntax error at position " + std::to_string(position) + ": " + what),
          position_(position) {}

    [[nodiscard]] std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// Failure of a numerical procedure (non-finite values, blow-up, non-convergence).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Linear solver failed to reach the requested relative residual.
class SolverError : public NumericalError {
public:
    SolverError(const std::string& what, double residual, long iterations)
        : NumericalError(what + " (relative residual " + std::to_string(residual) + " after " +
                         std::to_string(iterations) + " iterations)"),
          residual_(residual),
          iterations_(iterations) {}

    [[nodiscard]] double residual() const noexcept { return residual_; }
    [[nodiscard]] long iterations() const noexcept { return iterations_; }

private:
    double residual_;
    long iterations_;
};

/// File could not be read or written.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace nafem

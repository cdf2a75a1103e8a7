#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace m4 {

/// Base class for recoverable data / validation failures. The CLI maps these
/// to exit code 2; anything else escaping to main is an internal error (3).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Malformed or damaged byte stream. `offset` is the byte position of the
/// first inconsistency, when known.
class CorruptData : public Error {
public:
    explicit CorruptData(const std::string& what, std::uint64_t offset = 0)
        : Error(what + " (at byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::uint64_t offset() const { return offset_; }

private:
    std::uint64_t offset_;
};

/// Key lookup miss. Deliberately distinct from CorruptData: a missing key is
/// an expected condition, damaged bytes never are.
class NotFound : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class InsufficientData : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class DegenerateGeometry : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// Iterative solver stopped at the iteration cap with the gradient still
/// above tolerance. Carries the last mean residual for diagnostics.
class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, double last_residual)
        : Error(what + " (last residual " + std::to_string(last_residual) + ")"),
          last_residual_(last_residual) {}

    double last_residual() const { return last_residual_; }

private:
    double last_residual_;
};

class NoTrigger : public Error {
public:
    using Error::Error;
};

class NoTarget : public Error {
public:
    using Error::Error;
};

class TrainingDiverged : public Error {
public:
    TrainingDiverged(const std::string& what, std::size_t step)
        : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

    std::size_t step() const { return step_; }

private:
    std::size_t step_;
};

}  // namespace m4

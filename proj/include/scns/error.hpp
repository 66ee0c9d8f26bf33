#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace scns {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation was violated by the caller.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Two fields (or a field and a system) live on incompatible grids.
class GridMismatchError : public Error {
public:
    using Error::Error;
};

/// An iterative process stopped without meeting its tolerance.
/// Carries the residual history that was recorded up to the failure.
class NonConvergenceError : public Error {
public:
    NonConvergenceError(const std::string& what, std::vector<double> history)
        : Error(what), history_(std::move(history)) {}

    const std::vector<double>& history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

} // namespace scns

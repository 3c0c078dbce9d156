#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sch {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A field passed to the inverse Neumann operator has a nonzero mean.
class NonZeroMean : public Error {
public:
    NonZeroMean(double mean, double tolerance);
    double mean() const noexcept { return mean_; }

private:
    double mean_;
};

/// Scalar root finder exhausted its iteration cap.
class NoConvergence : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// Operation is not defined for the noise kind it was given.
class KindMismatch : public Error {
public:
    using Error::Error;
};

/// A time step could not be completed; retrying with `suggested_dt` may succeed.
class StepRejected : public Error {
public:
    StepRejected(const std::string& what, double suggested_dt)
        : Error(what), suggested_dt_(suggested_dt) {}
    double suggested_dt() const noexcept { return suggested_dt_; }

private:
    double suggested_dt_;
};

/// Newton residual stayed above tolerance at the iteration cap (or blew up).
class NewtonDiverged : public StepRejected {
public:
    NewtonDiverged(const std::string& what, double suggested_dt, std::int64_t step_index = -1)
        : StepRejected(what, suggested_dt), step_index_(step_index) {}
    std::int64_t step_index() const noexcept { return step_index_; }

private:
    std::int64_t step_index_;
};

class NonFinite : public Error {
public:
    NonFinite(const std::string& quantity, std::int64_t step_index);
    std::int64_t step_index() const noexcept { return step_index_; }

private:
    std::int64_t step_index_;
};

class PreconditionViolated : public Error {
public:
    using Error::Error;
};

class GrowthMismatch : public Error {
public:
    using Error::Error;
};

/// Malformed configuration text; `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
public:
    ParseError(const std::string& message, int line);
    int line() const noexcept { return line_; }

private:
    int line_;
};

/// Configuration parsed but violates a structural hypothesis (named in the message).
class ValidationError : public Error {
public:
    using Error::Error;
};

}  // namespace sch

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vbakf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A leading minor was non-positive even after the jitter retry.
class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of the operation
/// (non-finite entries, x <= 0 for digamma, asymmetric input, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// Inverse-Wishart mean requested with dof <= dim + 1.
class MeanUndefined : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

class UnknownPreset : public Error {
public:
    using Error::Error;
};

class EmptyInput : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Numeric failure inside the filter, tagged with where it happened.
/// Fields are -1 when not applicable.
class FilterError : public Error {
public:
    FilterError(const std::string& what, long step, long iteration, long sensor)
        : Error(format(what, step, iteration, sensor)),
          step_(step), iteration_(iteration), sensor_(sensor) {}

    long step() const { return step_; }
    long iteration() const { return iteration_; }
    long sensor() const { return sensor_; }

private:
    static std::string format(const std::string& what, long step, long iteration, long sensor) {
        std::string msg = "filter failure";
        if (step >= 0) msg += " at k=" + std::to_string(step);
        if (iteration >= 0) msg += " iteration=" + std::to_string(iteration);
        if (sensor >= 0) msg += " sensor=" + std::to_string(sensor);
        return msg + ": " + what;
    }

    long step_;
    long iteration_;
    long sensor_;
};

} // namespace vbakf

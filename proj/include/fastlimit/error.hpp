#pragma once

#include <stdexcept>
#include <string>

namespace fastlimit {

/// F violates the three-piece monotone shape (or continuity) it must have.
class ShapeError : public std::invalid_argument {
public:
    explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

/// A time integrator could not advance the state.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// Bad input to a measure / density estimator (empty samples, masked bins,
/// misaligned binning, too-small cells).
class MeasureError : public std::invalid_argument {
public:
    explicit MeasureError(const std::string& what) : std::invalid_argument(what) {}
};

/// Config text could not be parsed or fails validation.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace fastlimit

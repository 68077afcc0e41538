#ifndef SREL_ERRORS_HPP
#define SREL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace srel {

// Numeric failures: a matrix that must be strictly positive definite is not.
struct SingularMatrixError : std::runtime_error {
  explicit SingularMatrixError(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionError : std::invalid_argument {
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

struct InvalidArgumentError : std::invalid_argument {
  explicit InvalidArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

// Requested operation exists but is not defined for the given inputs
// (no analytic route, no closed-form transition, unsupported transform,
// too few levels for extrapolation). CLI maps these to exit code 4.
struct UnsupportedOperationError : std::runtime_error {
  explicit UnsupportedOperationError(const std::string& what) : std::runtime_error(what) {}
};

struct NoAnalyticRouteError : UnsupportedOperationError {
  explicit NoAnalyticRouteError(const std::string& what) : UnsupportedOperationError(what) {}
};

struct NoClosedFormError : UnsupportedOperationError {
  explicit NoClosedFormError(const std::string& what) : UnsupportedOperationError(what) {}
};

struct UnsupportedTransformError : UnsupportedOperationError {
  explicit UnsupportedTransformError(const std::string& what) : UnsupportedOperationError(what) {}
};

struct InsufficientLevelsError : UnsupportedOperationError {
  explicit InsufficientLevelsError(const std::string& what) : UnsupportedOperationError(what) {}
};

struct InsufficientSamplesError : std::invalid_argument {
  explicit InsufficientSamplesError(const std::string& what) : std::invalid_argument(what) {}
};

struct InvalidLevelError : std::invalid_argument {
  explicit InvalidLevelError(const std::string& what) : std::invalid_argument(what) {}
};

struct IncompatibleLevelsError : std::invalid_argument {
  explicit IncompatibleLevelsError(const std::string& what) : std::invalid_argument(what) {}
};

// Config / input-file problems. CLI maps these to exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace srel

#endif

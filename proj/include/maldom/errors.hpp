#pragma once

#include <stdexcept>
#include <string>

namespace maldom {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Problems with input data (files, schemas, cells, labels).
struct DataError : Error {
    using Error::Error;
};

struct IoError : DataError {
    using DataError::DataError;
};

/// CSV header does not match the expected schema.
struct SchemaError : DataError {
    using DataError::DataError;
};

/// A cell could not be parsed as a finite number.
struct ParseError : DataError {
    using DataError::DataError;
};

/// Unknown label token.
struct LabelError : DataError {
    using DataError::DataError;
};

/// Invalid configuration or parameters.
struct ConfigError : Error {
    using Error::Error;
};

/// Query/model dimension mismatch.
struct ShapeError : Error {
    using Error::Error;
};

/// Training cannot proceed (e.g. single-class training set).
struct FitError : Error {
    using Error::Error;
};

/// Iterative solver hit its cap before meeting its stopping criterion.
struct ConvergenceError : Error {
    using Error::Error;
};

/// All-zero feature mask where a non-empty subset is required.
struct InvalidMaskError : Error {
    using Error::Error;
};

/// Paired series do not line up (different folds, seeds or lengths).
struct PairingError : Error {
    using Error::Error;
};

/// Every grid point produced an undefined objective.
struct TuningError : Error {
    using Error::Error;
};

}  // namespace maldom

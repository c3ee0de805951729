#pragma once

#include <stdexcept>
#include <string>

namespace lsc {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Filesystem failure; the message carries the offending path.
class StorageError : public Error { using Error::Error; };
/// Malformed on-disk data (bad magic, truncation, unsupported header).
class FormatError : public Error { using Error::Error; };
/// Well-formed data that violates a value constraint (e.g. non-finite).
class ValidationError : public Error { using Error::Error; };
/// Caller broke a precondition: shapes, signs, symmetry.
class ContractError : public Error { using Error::Error; };
/// Invalid configuration value.
class ConfigError : public Error { using Error::Error; };
/// An iterate or gradient became non-finite.
class DivergenceError : public Error { using Error::Error; };
/// An iterative numerical routine failed to converge.
class NumericalError : public Error { using Error::Error; };
/// Input carries no usable structure (zero dictionary, all-zero field).
class DegenerateInputError : public Error { using Error::Error; };
/// A histogram or summary would be computed over an empty set.
class EmptyHistogramError : public Error { using Error::Error; };

} // namespace lsc

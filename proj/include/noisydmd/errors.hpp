#pragma once

#include <stdexcept>
#include <string>

namespace noisydmd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Input/config validation.
class ConfigError : public Error { using Error::Error; };
class ShapeError : public Error { using Error::Error; };
class ValueError : public Error { using Error::Error; };
class SchemaError : public Error { using Error::Error; };

// Numerical failures.
class NumericalError : public Error { using Error::Error; };
class RankError : public NumericalError { using NumericalError::NumericalError; };
class SingularError : public NumericalError { using NumericalError::NumericalError; };
class BlowupError : public NumericalError { using NumericalError::NumericalError; };
class CflError : public NumericalError { using NumericalError::NumericalError; };
class ZeroNormError : public NumericalError { using NumericalError::NumericalError; };
class DegenerateError : public NumericalError { using NumericalError::NumericalError; };

// Files.
class IoError : public Error { using Error::Error; };
class FormatError : public IoError { using IoError::IoError; };

}  // namespace noisydmd

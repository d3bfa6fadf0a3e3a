#pragma once

#include <stdexcept>
#include <string>

namespace oscimarket {

// Root of all library errors. Validation-type failures derive from Error
// directly; runtime numerical breakdowns derive from NumericalError so the
// CLI can map them to distinct exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

struct NumericalFailure : NumericalError { using NumericalError::NumericalError; };
struct StepRejectionExhausted : NumericalError { using NumericalError::NumericalError; };
struct EigenNoConvergence : NumericalError { using NumericalError::NumericalError; };
struct NonReproducible : NumericalError { using NumericalError::NumericalError; };

struct UnsupportedPotential : Error { using Error::Error; };
struct ConstraintViolation : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct InterlacingViolation : Error { using Error::Error; };
struct FrequencyMismatch : Error { using Error::Error; };
struct FiberSamplerFailure : Error { using Error::Error; };
struct InsufficientPeaks : Error { using Error::Error; };
struct SeriesTooShort : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct NonMonotonicDates : Error { using Error::Error; };
struct NonPositivePrice : Error { using Error::Error; };
struct MissingFairValue : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

} // namespace oscimarket

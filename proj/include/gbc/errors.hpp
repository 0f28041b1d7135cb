#pragma once

#include <stdexcept>
#include <string>

namespace gbc {

// Base of everything thrown by this library. ValidationError covers rejected
// inputs and violated preconditions (CLI exit code 2); NumericError covers
// runtime numerical failure such as non-convergence or overflow (exit code 3).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : Error {
    using Error::Error;
};

struct NumericError : Error {
    using Error::Error;
};

// --- symbolic space ---
struct NotTransitiveError : ValidationError { using ValidationError::ValidationError; };
struct ZeroRowOrColumnError : ValidationError { using ValidationError::ValidationError; };
struct LengthTooLargeError : ValidationError { using ValidationError::ValidationError; };
struct InadmissibleWordError : ValidationError { using ValidationError::ValidationError; };

// --- measure construction ---
struct PeriodicError : ValidationError { using ValidationError::ValidationError; };
struct BlowUpError : ValidationError { using ValidationError::ValidationError; };
struct NoConvergenceError : NumericError { using NumericError::NumericError; };
struct InsufficientSamplesError : ValidationError { using ValidationError::ValidationError; };

// --- target sequences / correlation sums ---
struct ZeroMassWindowError : ValidationError { using ValidationError::ValidationError; };
struct LengthMismatchError : ValidationError { using ValidationError::ValidationError; };
struct NotMonotoneError : ValidationError { using ValidationError::ValidationError; };
struct EpsOutOfRangeError : ValidationError { using ValidationError::ValidationError; };
struct DivergentBaseError : ValidationError { using ValidationError::ValidationError; };

// --- orbit sampling ---
struct MassTooSmallError : ValidationError { using ValidationError::ValidationError; };

// --- toral / baker geometry ---
struct NotUnimodularError : ValidationError { using ValidationError::ValidationError; };
struct NotHyperbolicError : ValidationError { using ValidationError::ValidationError; };
struct OverflowError : NumericError { using NumericError::NumericError; };
struct GapTooNarrowError : ValidationError { using ValidationError::ValidationError; };
struct RectangleTooLargeError : ValidationError { using ValidationError::ValidationError; };
struct BallOutOfRangeError : ValidationError { using ValidationError::ValidationError; };

// --- CLI / config ---
struct ConfigError : ValidationError { using ValidationError::ValidationError; };

}  // namespace gbc

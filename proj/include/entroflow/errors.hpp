#pragma once

#include <stdexcept>
#include <string>

namespace entroflow {

// Error taxonomy shared by all modules. Everything derives from Error so the
// CLI can map "domain failure" vs "bad input" onto exit codes in one place.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonFiniteValue : Error { using Error::Error; };
struct InvalidBounds : Error { using Error::Error; };
struct NoFeasibleBounds : Error { using Error::Error; };
struct CorrectionTooLarge : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct NegativeRate : Error { using Error::Error; };
struct StepTooLarge : Error { using Error::Error; };
struct StageLeftBox : Error { using Error::Error; };
struct EmptyMeasure : Error { using Error::Error; };
struct WitnessNotLipschitz : Error { using Error::Error; };
struct InsufficientSamples : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

} // namespace entroflow

#pragma once

#include <stdexcept>
#include <string>

namespace catmap {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// classical side
struct InvalidMatrix : Error { using Error::Error; };
struct NonHyperbolic : Error { using Error::Error; };
struct NegativeSpectrum : Error { using Error::Error; };

// line quantization
struct NonPositiveH : Error { using Error::Error; };
struct ZeroACoefficient : Error { using Error::Error; };
struct MismatchedH : Error { using Error::Error; };
struct QuadratureNonConvergence : Error { using Error::Error; };

// torus
struct OddN : Error { using Error::Error; };
struct TruncationOverflow : Error { using Error::Error; };
struct NotPerfectSquare : Error { using Error::Error; };

// band / theorem thresholds
struct ThresholdViolation : Error { using Error::Error; };

// harness
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

} // namespace catmap

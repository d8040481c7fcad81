#pragma once

#include <stdexcept>
#include <string>

namespace grushin2d {

/// Base class for all failures reported by this library. Numerical routines
/// never fabricate values: anything that cannot be computed honestly throws.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// frame
struct SingularPointError : Error { using Error::Error; };
struct NonPositiveRhoError : Error { using Error::Error; };

// integrator
struct IntegrationError : Error { using Error::Error; };
struct StepSizeUnderflowError : IntegrationError {
  explicit StepSizeUnderflowError(double t)
      : IntegrationError("step size underflow at t = " + std::to_string(t)),
        t_reached(t) {}
  double t_reached;
};
struct NonFiniteStateError : IntegrationError { using IntegrationError::IntegrationError; };

// grushin_exact
struct SingularThetaError : Error { using Error::Error; };
struct RootNotBracketedError : Error { using Error::Error; };
struct UnclassifiedDegeneracyError : Error { using Error::Error; };

// loci
struct RefinementDivergedError : Error { using Error::Error; };
struct NoCutFoundError : Error { using Error::Error; };
struct NoConjugatePointError : Error { using Error::Error; };
struct NoGeodesicFoundError : Error { using Error::Error; };

// asymptotics
struct NewtonDivergedError : Error { using Error::Error; };
struct SlopeBelowThresholdError : Error { using Error::Error; };

// heat
struct LinearSolveFailureError : Error { using Error::Error; };
struct StabilityFloorViolatedError : Error { using Error::Error; };
struct PoorFitError : Error { using Error::Error; };

}  // namespace grushin2d

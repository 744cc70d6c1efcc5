#pragma once

#include <stdexcept>
#include <string>

namespace eqlab {

// Every failure raised by the library carries a machine-readable kind so the
// CLI and tests can dispatch on it without string matching.
enum class ErrorKind {
  kFrameSpan,
  kHermiticity,
  kNotNormalOrdered,
  kDegreeLimit,
  kNonCommutingFrame,
  kGramNotPositiveDefinite,
  kDependentFiducialConditions,
  kFrameInversion,
  kNonHermitianHamiltonian,
  kInvalidModel,
  kUnknownGenerator,
  kUnboundSymbol,
  kDimensionMismatch,
  kDegenerateGroundSpace,
  kTruncationLeakage,
  kStepTooLarge,
  kStepRejected,
  kGridMismatch,
  kZetaOutOfRange,
  kDivisionByZero,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace eqlab

#include "fcpred/error.hpp"

namespace fcpred {

ErrorCategory category_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidSpec:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kRange:
    case ErrorCode::kUnstable:
      return ErrorCategory::kValidation;
    case ErrorCode::kEmptyInput:
    case ErrorCode::kMissingChannel:
    case ErrorCode::kLabelMismatch:
    case ErrorCode::kShapeMismatch:
    case ErrorCode::kParse:
    case ErrorCode::kIo:
    case ErrorCode::kInsufficientSamples:
      return ErrorCategory::kData;
    case ErrorCode::kSingularFit:
    case ErrorCode::kSingularSpectrum:
    case ErrorCode::kDegenerate:
    case ErrorCode::kConvergence:
    case ErrorCode::kDiverged:
      return ErrorCategory::kNumerical;
  }
  return ErrorCategory::kValidation;
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidSpec: return "invalid-spec";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kEmptyInput: return "empty-input";
    case ErrorCode::kMissingChannel: return "missing-channel";
    case ErrorCode::kLabelMismatch: return "label-mismatch";
    case ErrorCode::kShapeMismatch: return "shape-mismatch";
    case ErrorCode::kRange: return "range";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kSingularFit: return "singular-fit";
    case ErrorCode::kSingularSpectrum: return "singular-spectrum";
    case ErrorCode::kDegenerate: return "degenerate";
    case ErrorCode::kUnstable: return "unstable";
    case ErrorCode::kConvergence: return "convergence";
    case ErrorCode::kDiverged: return "training-diverged";
    case ErrorCode::kInsufficientSamples: return "insufficient-samples";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

}  // namespace fcpred

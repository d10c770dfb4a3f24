#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fcpred {

enum class ErrorCode {
  kInvalidSpec,       // filter/hyperparameter/config outside its valid domain
  kInvalidArgument,   // generic precondition failure
  kEmptyInput,
  kMissingChannel,
  kLabelMismatch,
  kShapeMismatch,
  kRange,
  kParse,
  kIo,
  kSingularFit,
  kSingularSpectrum,
  kDegenerate,
  kUnstable,
  kConvergence,
  kDiverged,
  kInsufficientSamples,
};

// Coarse grouping used for process exit codes.
enum class ErrorCategory { kValidation, kData, kNumerical };

ErrorCategory category_of(ErrorCode code);
std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  ErrorCode code_;
};

// Throws Error(code, message) when cond is false.
inline void require(bool cond, ErrorCode code, const std::string& message) {
  if (!cond) throw Error(code, message);
}

}  // namespace fcpred

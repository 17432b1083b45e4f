#pragma once

#include <stdexcept>
#include <string>

namespace moilab {

enum class ErrorCode {
  NotNormal,
  NotHermitian,
  NotContraction,
  ConvergenceFailure,
  InvalidExponent,
  InvalidArgument,
  InsufficientDerivatives,
  DegenerateKnots,
  InvalidPointCount,
  ArityMismatch,
  DimensionMismatch,
  NotAnalyticPolynomial,
  NonUnitaryResult,
  ClosedFormMismatch,
  NotTrigPolynomial,
  PathLeavesContractions,
  TupleBudgetExceeded,
  DilationTraceMismatch,
  ConfigParse,
  IoError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace moilab

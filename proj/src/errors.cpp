#include "moilab/errors.hpp"

namespace moilab {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotNormal: return "NotNormal";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NotContraction: return "NotContraction";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::InvalidExponent: return "InvalidExponent";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InsufficientDerivatives: return "InsufficientDerivatives";
    case ErrorCode::DegenerateKnots: return "DegenerateKnots";
    case ErrorCode::InvalidPointCount: return "InvalidPointCount";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotAnalyticPolynomial: return "NotAnalyticPolynomial";
    case ErrorCode::NonUnitaryResult: return "NonUnitaryResult";
    case ErrorCode::ClosedFormMismatch: return "ClosedFormMismatch";
    case ErrorCode::NotTrigPolynomial: return "NotTrigPolynomial";
    case ErrorCode::PathLeavesContractions: return "PathLeavesContractions";
    case ErrorCode::TupleBudgetExceeded: return "TupleBudgetExceeded";
    case ErrorCode::DilationTraceMismatch: return "DilationTraceMismatch";
    case ErrorCode::ConfigParse: return "ConfigParse";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace moilab

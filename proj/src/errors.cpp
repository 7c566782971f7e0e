#include "opkernel/errors.hpp"

namespace opkernel {

const char *error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::NotHermitianKernel: return "NotHermitianKernel";
    case ErrorCode::NotPD: return "NotPD";
    case ErrorCode::KernelMismatch: return "KernelMismatch";
    case ErrorCode::NotRepresentation: return "NotRepresentation";
    case ErrorCode::NotNondegenerate: return "NotNondegenerate";
    case ErrorCode::NonIntegralMultiplicity: return "NonIntegralMultiplicity";
    case ErrorCode::MiddleAlgebraMismatch: return "MiddleAlgebraMismatch";
    case ErrorCode::PointSetMismatch: return "PointSetMismatch";
    case ErrorCode::NotPositive: return "NotPositive";
    case ErrorCode::NotCPD: return "NotCPD";
    case ErrorCode::NotPhiMap: return "NotPhiMap";
    case ErrorCode::NotCP: return "NotCP";
    case ErrorCode::NotCondPD: return "NotCondPD";
    case ErrorCode::NormalizationNotPSD: return "NormalizationNotPSD";
    case ErrorCode::TruncationInsufficient: return "TruncationInsufficient";
    case ErrorCode::NotCPAtTime: return "NotCPAtTime";
    case ErrorCode::NotCPDAtTime: return "NotCPDAtTime";
    case ErrorCode::NotPositiveFunctional: return "NotPositiveFunctional";
    case ErrorCode::NotSPositive: return "NotSPositive";
    case ErrorCode::NotSPositiveKernel: return "NotSPositiveKernel";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::InternalError: return "InternalError";
  }
  return "UnknownError";
}

bool is_math_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::ShapeMismatch:
    case ErrorCode::NonFinite:
    case ErrorCode::MiddleAlgebraMismatch:
    case ErrorCode::PointSetMismatch:
    case ErrorCode::CapExceeded:
    case ErrorCode::InvalidInput:
    case ErrorCode::InternalError:
      return false;
    default:
      return true;
  }
}

}  // namespace opkernel

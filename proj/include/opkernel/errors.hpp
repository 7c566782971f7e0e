#ifndef OPKERNEL_ERRORS_HPP
#define OPKERNEL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace opkernel {

enum class ErrorCode {
  ShapeMismatch,
  NonFinite,
  NotHermitian,
  NotPSD,
  NotHermitianKernel,
  NotPD,
  KernelMismatch,
  NotRepresentation,
  NotNondegenerate,
  NonIntegralMultiplicity,
  MiddleAlgebraMismatch,
  PointSetMismatch,
  NotPositive,
  NotCPD,
  NotPhiMap,
  NotCP,
  NotCondPD,
  NormalizationNotPSD,
  TruncationInsufficient,
  NotCPAtTime,
  NotCPDAtTime,
  NotPositiveFunctional,
  NotSPositive,
  NotSPositiveKernel,
  CapExceeded,
  InvalidInput,
  InternalError,
};

const char *error_code_name(ErrorCode code);

/// Returns true for codes that report a failed mathematical hypothesis
/// (as opposed to malformed input or an internal fault).
bool is_math_error(ErrorCode code);

class OpkError : public std::runtime_error {
 public:
  OpkError(ErrorCode code, const std::string &msg)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + msg),
        code_(code) {}

  ErrorCode code() const { return code_; }
  const char *code_name() const { return error_code_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace opkernel

#endif

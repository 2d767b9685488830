#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tdr {

enum class ErrorCode {
  DegenerateInput,
  SingularCovariance,
  NonFinite,
  RankDeficient,
  NonPositiveResponse,
  ParamOutOfRange,
  InvalidGrid,
  NotUnit,
  ZeroVariance,
  AllZeroSpectrum,
  IncompatibleCriterion,
  AllParamsFailed,
  InvalidModelId,
  InvalidMethod,
  FileNotFound,
  ParseError,
  NonNumeric,
  InvalidConfig,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace tdr
